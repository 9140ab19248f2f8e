#include "peri/app/config.hpp"
#include "peri/app/scenarios.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace peri::app {

namespace {

const std::set<std::string> kernel_families{"gaussian", "exponential", "boxcar", "triangle", "table"};
const std::set<std::string> law_families{"cubic", "power", "linear", "polynomial", "atan"};
const std::set<std::string> field_presets{"zero", "gaussian_bump", "sine", "cosine", "random", "csv"};
const std::set<std::string> rhs_modes{"direct", "cubic_fast", "general", "auto"};
const std::set<std::string> solver_modes{"verlet", "picard", "both"};
const std::set<std::string> output_formats{"csv", "ndjson", "json", "dat"};

json field_defaults(const char* preset) {
  return {{"preset", preset}, {"amp", 1.0},     {"width", 1.0}, {"center", 0.0},
          {"mode", 1},        {"max_mode", 8}, {"path", ""},   {"column", 0}};
}

// Null when any segment is missing.
const json& lookup(const json& doc, std::initializer_list<const char*> path) {
  static const json null_value;
  const json* cur = &doc;
  for (const char* key : path) {
    if (!cur->is_object()) return null_value;
    auto it = cur->find(key);
    if (it == cur->end()) return null_value;
    cur = &*it;
  }
  return *cur;
}

std::string join(std::initializer_list<const char*> path) {
  std::string out;
  for (const char* k : path) {
    if (!out.empty()) out += '.';
    out += k;
  }
  return out;
}

class Checker {
 public:
  explicit Checker(const json& doc) : doc_(doc) {}

  std::vector<std::string> errors;

  void fail(const std::string& path, const std::string& msg) { errors.push_back(path + ": " + msg); }

  // Returns the value if present and numeric, otherwise records an error.
  std::optional<double> number(std::initializer_list<const char*> path, const std::function<bool(double)>& ok,
                               const char* what, bool nullable = false) {
    const json& v = lookup(doc_, path);
    if (v.is_null() && nullable) return std::nullopt;
    if (!v.is_number()) {
      fail(join(path), std::string("expected a number ") + what);
      return std::nullopt;
    }
    const double x = v.get<double>();
    if (!std::isfinite(x) || !ok(x)) {
      fail(join(path), std::string("must be ") + what);
      return std::nullopt;
    }
    return x;
  }

  std::optional<long long> integer(std::initializer_list<const char*> path, long long min, bool nullable = false) {
    const json& v = lookup(doc_, path);
    if (v.is_null() && nullable) return std::nullopt;
    if (!v.is_number_integer() || v.get<long long>() < min) {
      fail(join(path), "expected an integer >= " + std::to_string(min));
      return std::nullopt;
    }
    return v.get<long long>();
  }

  std::optional<std::string> choice(std::initializer_list<const char*> path, const std::set<std::string>& allowed) {
    const json& v = lookup(doc_, path);
    if (!v.is_string() || !allowed.count(v.get<std::string>())) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      fail(join(path), "expected one of {" + list + "}");
      return std::nullopt;
    }
    return v.get<std::string>();
  }

  void boolean(std::initializer_list<const char*> path) {
    if (!lookup(doc_, path).is_boolean()) fail(join(path), "expected true or false");
  }

  void string(std::initializer_list<const char*> path) {
    if (!lookup(doc_, path).is_string()) fail(join(path), "expected a string");
  }

  // Keys absent from the defaults are typos or unsupported options.
  void unknown_keys(const json& doc, const json& reference, const std::string& prefix) {
    if (!doc.is_object()) {
      if (!prefix.empty() && reference.is_object()) fail(prefix, "expected an object");
      return;
    }
    for (auto it = doc.begin(); it != doc.end(); ++it) {
      const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
      if (!reference.is_object() || !reference.contains(it.key())) {
        fail(path, "unknown key");
        continue;
      }
      const json& ref = reference.at(it.key());
      if (ref.is_object()) unknown_keys(it.value(), ref, path);
    }
  }

 private:
  const json& doc_;
};

void check_field(Checker& c, const char* which) {
  c.choice({"initial", which, "preset"}, field_presets);
  c.number({"initial", which, "amp"}, [](double) { return true; }, "finite");
  c.number({"initial", which, "width"}, [](double x) { return x > 0; }, "> 0");
  c.number({"initial", which, "center"}, [](double) { return true; }, "finite");
  c.integer({"initial", which, "mode"}, 0);
  c.integer({"initial", which, "max_mode"}, 1);
  c.string({"initial", which, "path"});
  c.integer({"initial", which, "column"}, 0);
}

}  // namespace

bool SimConfig::wants(const std::string& fmt) const {
  return std::find(formats.begin(), formats.end(), fmt) != formats.end();
}

json default_document() {
  return {
      {"scenario", nullptr},
      {"seed", 0},
      {"grid", {{"L", 10.0}, {"N", 256}}},
      {"kernel",
       {{"family", "gaussian"}, {"scale", 1.0}, {"amplitude", 1.0}, {"support_radius", nullptr}, {"table", ""}}},
      {"nonlinearity", {{"family", "cubic"}, {"nu", 3.0}, {"sign", 1}, {"coefficients", json::array({1.0})}, {"a", 1.0}}},
      {"initial", {{"phi", field_defaults("gaussian_bump")}, {"psi", field_defaults("zero")}}},
      {"rhs", {{"mode", "auto"}, {"dealias", false}}},
      {"solver",
       {{"mode", "verlet"},
        {"dt", "auto"},
        {"dt_scale", 1.0},
        {"T_end", 1.0},
        {"picard", {{"M_t", 256}, {"tol", 1e-10}, {"max_iter", 200}, {"T", nullptr}}}}},
      {"diagnostics",
       {{"stride", 10}, {"sup_threshold", 1e6}, {"nu", nullptr}, {"track_H", false}, {"dispersion_mode", nullptr}}},
      {"output", {{"dir", "out"}, {"formats", json::array({"csv", "ndjson", "json", "dat"})}, {"stride", 10}}},
  };
}

std::vector<std::string> validate(const json& doc) {
  Checker c(doc);
  if (!doc.is_object()) {
    c.fail("(root)", "expected a JSON object");
    return c.errors;
  }
  c.unknown_keys(doc, default_document(), "");

  const json& scen = lookup(doc, {"scenario"});
  if (!scen.is_null() && !(scen.is_string() && find_scenario(scen.get<std::string>())))
    c.fail("scenario", "unknown scenario");
  c.integer({"seed"}, 0);

  const auto L = c.number({"grid", "L"}, [](double x) { return x > 0; }, "> 0");
  const auto N = c.integer({"grid", "N"}, 8);
  if (N && *N % 2 != 0) c.fail("grid.N", "must be even");

  const auto family = c.choice({"kernel", "family"}, kernel_families);
  const auto scale = c.number({"kernel", "scale"}, [](double x) { return x > 0; }, "> 0");
  c.number({"kernel", "amplitude"}, [](double x) { return x > 0; }, "> 0");
  const auto support = c.number({"kernel", "support_radius"}, [](double x) { return x > 0; }, "> 0", true);
  c.string({"kernel", "table"});
  if (family == "table") {
    const json& t = lookup(doc, {"kernel", "table"});
    if (t.is_string() && t.get<std::string>().empty()) c.fail("kernel.table", "required for the table family");
  }
  if (family && scale && L && *family != "table") {
    // Tail guard, evaluated without building the kernel.
    KernelSpec<double> spec{*family == "gaussian"      ? KernelFamily::gaussian
                            : *family == "exponential" ? KernelFamily::exponential
                            : *family == "boxcar"      ? KernelFamily::boxcar
                                                       : KernelFamily::triangle,
                            *scale, 1.0, support, {}};
    const double radius = spec.support();
    if (std::isfinite(radius) ? radius > *L : detail::tail_fraction(spec, *L) >= 1e-12)
      c.fail("kernel.scale", "kernel mass does not fit in [-L, L); reduce the scale or enlarge grid.L");
  }

  const auto law = c.choice({"nonlinearity", "family"}, law_families);
  if (law == "power") {
    c.number({"nonlinearity", "nu"}, [](double x) { return x >= 1; }, ">= 1");
    const json& s = lookup(doc, {"nonlinearity", "sign"});
    if (!(s.is_number_integer() && (s.get<int>() == 1 || s.get<int>() == -1)))
      c.fail("nonlinearity.sign", "expected 1 or -1");
  }
  if (law == "atan") c.number({"nonlinearity", "a"}, [](double x) { return x > 0; }, "> 0");
  if (law == "polynomial") {
    const json& co = lookup(doc, {"nonlinearity", "coefficients"});
    if (!co.is_array() || co.empty() || !std::all_of(co.begin(), co.end(), [](const json& x) { return x.is_number(); }))
      c.fail("nonlinearity.coefficients", "expected a non-empty array of numbers");
  }

  for (const char* which : {"phi", "psi"}) {
    check_field(c, which);
    const json& preset = lookup(doc, {"initial", which, "preset"});
    const json& path = lookup(doc, {"initial", which, "path"});
    if (preset == "csv" && path.is_string() && path.get<std::string>().empty())
      c.fail(std::string("initial.") + which + ".path", "required for the csv preset");
  }

  const auto mode = c.choice({"rhs", "mode"}, rhs_modes);
  c.boolean({"rhs", "dealias"});
  if (mode == "cubic_fast" && law) {
    const json& nu = lookup(doc, {"nonlinearity", "nu"});
    const bool cubic_like = *law == "cubic" || (*law == "power" && nu.is_number() && nu.get<double>() == 3.0);
    if (!cubic_like) c.fail("rhs.mode", "cubic_fast needs the cubic law");
  }

  c.choice({"solver", "mode"}, solver_modes);
  const json& dt = lookup(doc, {"solver", "dt"});
  if (!(dt == "auto" || (dt.is_number() && dt.get<double>() > 0))) c.fail("solver.dt", "expected \"auto\" or a number > 0");
  c.number({"solver", "dt_scale"}, [](double x) { return x > 0; }, "> 0");
  c.number({"solver", "T_end"}, [](double x) { return x > 0; }, "> 0");
  c.integer({"solver", "picard", "M_t"}, 16);
  c.number({"solver", "picard", "tol"}, [](double x) { return x > 0; }, "> 0");
  c.integer({"solver", "picard", "max_iter"}, 1);
  c.number({"solver", "picard", "T"}, [](double x) { return x > 0; }, "> 0", true);

  c.integer({"diagnostics", "stride"}, 1);
  c.number({"diagnostics", "sup_threshold"}, [](double x) { return x > 0; }, "> 0");
  const auto nu = c.number({"diagnostics", "nu"}, [](double x) { return x > 0; }, "> 0", true);
  c.boolean({"diagnostics", "track_H"});
  if (lookup(doc, {"diagnostics", "track_H"}) == true && !nu) c.fail("diagnostics.track_H", "requires diagnostics.nu");
  c.integer({"diagnostics", "dispersion_mode"}, 1, true);

  c.string({"output", "dir"});
  const json& formats = lookup(doc, {"output", "formats"});
  if (!formats.is_array() || !std::all_of(formats.begin(), formats.end(), [](const json& f) {
        return f.is_string() && output_formats.count(f.get<std::string>());
      }))
    c.fail("output.formats", "expected an array drawn from {csv, dat, json, ndjson}");
  c.integer({"output", "stride"}, 1);
  return c.errors;
}

SimConfig parse(const json& doc) {
  const auto errors = validate(doc);
  if (!errors.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw Error(Errc::Config, msg);
  }
  SimConfig cfg;
  if (doc.contains("scenario") && doc["scenario"].is_string()) cfg.scenario = doc["scenario"].get<std::string>();
  cfg.seed = doc["seed"].get<std::uint64_t>();
  cfg.L = doc["grid"]["L"].get<double>();
  cfg.N = doc["grid"]["N"].get<Index>();

  const json& k = doc["kernel"];
  const std::string fam = k["family"];
  const double scale = k["scale"], amp = k["amplitude"];
  if (fam == "gaussian") cfg.kernel = KernelSpec<double>::gaussian(scale, amp);
  if (fam == "exponential") cfg.kernel = KernelSpec<double>::exponential(scale, amp);
  if (fam == "boxcar") cfg.kernel = KernelSpec<double>::boxcar(scale, amp);
  if (fam == "triangle") cfg.kernel = KernelSpec<double>::triangle(scale, amp);
  if (fam == "table") {
    cfg.kernel_table = k["table"].get<std::string>();
    cfg.kernel = KernelSpec<double>::from_table({});
  }
  if (k["support_radius"].is_number()) cfg.kernel.support_radius = k["support_radius"].get<double>();

  const json& w = doc["nonlinearity"];
  const std::string law = w["family"];
  if (law == "cubic") cfg.nonlinearity = Nonlinearity<double>::cubic();
  if (law == "linear") cfg.nonlinearity = Nonlinearity<double>::linear();
  if (law == "power") cfg.nonlinearity = Nonlinearity<double>::power(w["nu"].get<double>(), w["sign"].get<int>());
  if (law == "atan") cfg.nonlinearity = Nonlinearity<double>::sublinear_atan(w["a"].get<double>());
  if (law == "polynomial") cfg.nonlinearity = Nonlinearity<double>::polynomial(w["coefficients"].get<std::vector<double>>());

  for (auto [which, dst] : {std::pair{"phi", &cfg.phi}, std::pair{"psi", &cfg.psi}}) {
    const json& f = doc["initial"][which];
    dst->preset = f["preset"];
    dst->amp = f["amp"];
    dst->width = f["width"];
    dst->center = f["center"];
    dst->mode = f["mode"];
    dst->max_mode = f["max_mode"];
    dst->path = f["path"];
    dst->column = f["column"];
  }

  cfg.rhs_mode = doc["rhs"]["mode"];
  cfg.dealias = doc["rhs"]["dealias"];

  const json& s = doc["solver"];
  cfg.solver_mode = s["mode"];
  if (s["dt"].is_number()) cfg.dt = s["dt"].get<double>();
  cfg.dt_scale = s["dt_scale"];
  cfg.T_end = s["T_end"];
  cfg.picard_intervals = s["picard"]["M_t"];
  cfg.picard_tol = s["picard"]["tol"];
  cfg.picard_max_iter = s["picard"]["max_iter"];
  if (s["picard"]["T"].is_number()) cfg.picard_T = s["picard"]["T"].get<double>();

  const json& d = doc["diagnostics"];
  cfg.diag_stride = d["stride"];
  cfg.sup_threshold = d["sup_threshold"];
  if (d["nu"].is_number()) cfg.nu = d["nu"].get<double>();
  cfg.track_H = d["track_H"];
  if (d["dispersion_mode"].is_number()) cfg.dispersion_mode = d["dispersion_mode"].get<Index>();

  cfg.out_dir = doc["output"]["dir"];
  cfg.formats = doc["output"]["formats"].get<std::vector<std::string>>();
  cfg.out_stride = doc["output"]["stride"];
  return cfg;
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw Error(Errc::Config, "override must look like key.path=value: " + assignment);
  const std::string key = assignment.substr(0, eq), text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  std::string pointer;
  std::stringstream ss(key);
  for (std::string part; std::getline(ss, part, '.');) {
    if (part.empty()) throw Error(Errc::Config, "empty segment in override key: " + key);
    pointer += "/" + part;
  }
  try {
    doc[json::json_pointer(pointer)] = value;
  } catch (const json::exception& e) {
    throw Error(Errc::Config, key + ": cannot assign (" + e.what() + ")");
  }
}

json resolve(const std::optional<std::string>& scenario, const json& user, const std::vector<std::string>& overrides) {
  // merge_patch would delete keys set to null; assign leaf by leaf instead.
  std::function<void(json&, const json&)> overlay = [&](json& dst, const json& src) {
    for (auto it = src.begin(); it != src.end(); ++it) {
      if (it.value().is_object() && dst.contains(it.key()) && dst[it.key()].is_object())
        overlay(dst[it.key()], it.value());
      else
        dst[it.key()] = it.value();
    }
  };
  json doc = default_document();
  std::optional<std::string> name = scenario;
  if (!name && user.is_object() && user.contains("scenario") && user["scenario"].is_string())
    name = user["scenario"].get<std::string>();
  if (name) {
    const Scenario* s = find_scenario(*name);
    if (!s) throw Error(Errc::Config, "scenario: unknown scenario '" + *name + "'");
    overlay(doc, s->patch);
    doc["scenario"] = *name;
  }
  if (user.is_object()) overlay(doc, user);
  else if (!user.is_null()) throw Error(Errc::Config, "(root): expected a JSON object");
  for (const auto& o : overrides) apply_override(doc, o);
  return doc;
}

json load_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Config, "cannot open config file " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(Errc::Config, path + ": " + e.what());
  }
}

}  // namespace peri::app
