#include "peri/app/runner.hpp"

#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace peri::app {

namespace fs = std::filesystem;

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

Vector<double> read_csv_column(const std::string& path, Index column, Index n) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Config, "cannot open initial data file " + path);
  std::vector<double> vals;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string cell;
    Index c = 0;
    bool taken = false;
    while (std::getline(ss, cell, ',')) {
      if (c++ != column) continue;
      try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        vals.push_back(v);
        taken = true;
      } catch (const std::exception&) {
        if (!vals.empty()) throw Error(Errc::Config, path + ": non-numeric value '" + cell + "'");
      }
    }
    if (!taken && !vals.empty()) throw Error(Errc::Config, path + ": missing column " + std::to_string(column));
  }
  if (Index(vals.size()) != n)
    throw Error(Errc::LengthMismatch, path + ": expected " + std::to_string(n) + " values, found " +
                                          std::to_string(vals.size()));
  return Eigen::Map<Vector<double>>(vals.data(), n);
}

ForceEvaluator<double> build_evaluator(const SimConfig& cfg, const Kernel<double>& kernel) {
  const auto& nl = cfg.nonlinearity;
  if (cfg.rhs_mode == "direct") return ForceEvaluator<double>::direct(kernel, nl);
  if (cfg.rhs_mode == "cubic_fast") return ForceEvaluator<double>::cubic_fast(kernel, nl, cfg.dealias);
  if (cfg.rhs_mode == "general") return ForceEvaluator<double>::general(kernel.grid(), separable_force(kernel.spec(), nl));
  auto ev = ForceEvaluator<double>::automatic(kernel, nl);
  if (cfg.dealias && ev.mode() == RhsMode::cubic_fast) return ForceEvaluator<double>::cubic_fast(kernel, nl, true);
  return ev;
}

json to_json(const DiagnosticsRecord<double>& r) {
  json j = {{"t", r.t},         {"kinetic", r.kinetic}, {"potential", r.potential}, {"E", r.E},
            {"sup_u", r.sup_u}, {"l2_u", r.l2_u},       {"blowup", r.blowup}};
  if (r.H) {
    j["H"] = *r.H;
    j["H_prime"] = *r.H_prime;
    j["H_second"] = *r.H_second;
    j["concavity_gap"] = r.concavity_gap ? json(*r.concavity_gap) : json(nullptr);
    j["concavity_gap_analytic"] = *r.concavity_gap_analytic;
  }
  return j;
}

// Streams one route's snapshots to the trajectory and diagnostics files.
class Recorder {
 public:
  Recorder(const SimConfig& cfg, const Kernel<double>& kernel, const BlowupPlan<double>* plan, const fs::path& dir,
           const std::string& prefix)
      : cfg_(cfg), kernel_(kernel), plan_(plan) {
    const auto& g = kernel.grid();
    if (cfg.wants("csv")) {
      traj_.open(dir / (prefix + "trajectory.csv"));
      traj_ << "t";
      for (Index i = 0; i < g.size(); ++i) traj_ << ',' << format_number(g.x(i));
      traj_ << '\n';
      diag_csv_.open(dir / (prefix + "diagnostics.csv"));
      diag_csv_ << "t,kinetic,potential,E,sup_u,l2_u";
      if (plan) diag_csv_ << ",H,H_prime,H_second,concavity_gap,concavity_gap_analytic";
      diag_csv_ << '\n';
    }
    if (cfg.wants("ndjson")) ndjson_.open(dir / (prefix + "diagnostics.ndjson"));
  }

  void snapshot(const State<double>& s) {
    if (!traj_.is_open()) return;
    traj_ << format_number(s.t);
    for (Index i = 0; i < s.u.size(); ++i) traj_ << ',' << format_number(s.u[i]);
    traj_ << '\n';
  }

  void diagnostics(const State<double>& s, const Vector<double>& accel) {
    records.push_back(make_record(s, accel, kernel_, cfg_.nonlinearity, plan_));
  }

  // Gaps need the neighbouring records, so diagnostics are written once the run ends.
  void flush() {
    if (plan_) fill_concavity_gaps(records, plan_->nu);
    auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
    for (const auto& r : records) {
      if (ndjson_.is_open()) ndjson_ << to_json(r).dump() << '\n';
      if (!diag_csv_.is_open()) continue;
      diag_csv_ << format_number(r.t) << ',' << format_number(r.kinetic) << ',' << format_number(r.potential) << ','
                << format_number(r.E) << ',' << format_number(r.sup_u) << ',' << format_number(r.l2_u);
      if (r.H)
        diag_csv_ << ',' << format_number(*r.H) << ',' << format_number(*r.H_prime) << ','
                  << format_number(*r.H_second) << ',' << opt(r.concavity_gap) << ','
                  << format_number(*r.concavity_gap_analytic);
      diag_csv_ << '\n';
    }
  }

  std::vector<DiagnosticsRecord<double>> records;

 private:
  const SimConfig& cfg_;
  const Kernel<double>& kernel_;
  const BlowupPlan<double>* plan_;
  std::ofstream traj_, diag_csv_, ndjson_;
};

void write_dat(const fs::path& path, const std::vector<std::pair<double, double>>& rows) {
  std::ofstream out(path);
  for (const auto& [a, b] : rows) out << format_number(a) << ' ' << format_number(b) << '\n';
}

json energy_summary(const std::vector<DiagnosticsRecord<double>>& recs) {
  json j;
  if (recs.empty()) return j;
  const double E0 = recs.front().E;
  double drift = 0, max_sup = 0;
  for (const auto& r : recs) {
    if (std::isfinite(r.E)) drift = std::max(drift, std::abs(r.E - E0) / std::max(std::abs(E0), 1.0));
    max_sup = std::max(max_sup, r.sup_u);
  }
  j["E0"] = E0;
  j["E_final"] = recs.back().E;
  j["drift"] = drift;
  j["max_sup_u"] = max_sup;
  return j;
}

json norms(const Grid<double>& g, const Vector<double>& u) {
  return {{"sup", sup(u)}, {"l2", l2(g, u)}, {"h1", hs(g, u, 1.0)}};
}

}  // namespace

Vector<double> make_field(const FieldConfig& f, const Grid<double>& grid, std::uint64_t seed) {
  if (f.preset == "zero") return Vector<double>::Zero(grid.size());
  if (f.preset == "gaussian_bump") return gaussian_bump(grid, f.amp, f.width, f.center);
  if (f.preset == "sine") return sine_mode(grid, f.mode, f.amp);
  if (f.preset == "cosine") return cosine_mode(grid, f.mode, f.amp);
  if (f.preset == "random") return random_smooth(grid, f.amp, f.max_mode, seed);
  if (f.preset == "csv") return read_csv_column(f.path, f.column, grid.size());
  throw Error(Errc::Config, "unknown field preset " + f.preset);
}

json run(const SimConfig& cfg, const fs::path& out_dir) {
  const Grid<double> grid(cfg.L, cfg.N);
  KernelSpec<double> spec = cfg.kernel;
  if (spec.family == KernelFamily::table) spec = KernelSpec<double>::from_table(load_kernel_table<double>(cfg.kernel_table));
  const auto kernel = make_kernel(spec, grid);
  const auto ev = build_evaluator(cfg, kernel);
  const auto& nl = cfg.nonlinearity;

  const Vector<double> phi = make_field(cfg.phi, grid, cfg.seed);
  const Vector<double> psi = make_field(cfg.psi, grid, cfg.seed + 1);

  std::optional<BlowupPlan<double>> bplan;
  if (cfg.nu) bplan = plan_blowup(phi, psi, kernel, nl, *cfg.nu);
  const BlowupPlan<double>* plan_ptr = cfg.track_H && bplan ? &*bplan : nullptr;

  fs::create_directories(out_dir);

  json summary;
  summary["scenario"] = cfg.scenario ? json(*cfg.scenario) : json(nullptr);
  summary["grid"] = {{"L", cfg.L}, {"N", cfg.N}, {"dx", grid.dx()}};
  summary["kernel"] = {{"family", to_string(spec.family)}, {"l1_norm", kernel.l1_norm()}, {"mass", kernel.mass()}};
  summary["nonlinearity"] = {{"family", to_string(nl.family())}, {"nu", nl.nu()}, {"sign", nl.sign()}};
  summary["rhs_mode"] = to_string(ev.mode());
  summary["initial"] = {{"phi", norms(grid, phi)}, {"psi", norms(grid, psi)}};
  summary["status"] = "bounded";
  summary["t_exit"] = nullptr;
  summary["t1_bound"] = bplan ? json(bplan->t1_bound) : json(nullptr);
  if (bplan)
    summary["blowup_plan"] = {{"nu", bplan->nu},   {"b", bplan->b},   {"t0", bplan->t0},
                              {"E0", bplan->E0},   {"H0", bplan->H0}, {"H0_prime", bplan->H0_prime},
                              {"hypothesis_certified", bplan->hypothesis_certified}};

  const bool do_picard = cfg.solver_mode != "verlet";
  const bool do_verlet = cfg.solver_mode != "picard";
  const std::string picard_prefix = do_verlet ? "picard_" : "";
  std::optional<PicardResult<double>> pic;
  double verlet_end = cfg.T_end;

  if (do_picard) {
    const auto plan = plan_contraction(phi, psi, ev);
    PicardOptions opt;
    opt.time_intervals = cfg.picard_intervals;
    opt.tol = cfg.picard_tol;
    opt.max_iter = cfg.picard_max_iter;
    opt.T = cfg.picard_T;
    pic = picard_solve(phi, psi, plan, ev, opt);
    const auto& field = pic->field;
    verlet_end = field.times[field.time_nodes() - 1];

    Recorder rec(cfg, kernel, plan_ptr, out_dir, picard_prefix);
    for (Index m = 0; m < field.time_nodes(); ++m) {
      const bool last = m + 1 == field.time_nodes();
      State<double> s{field.slice(m), field.velocities.col(m), field.times[m]};
      if (m % cfg.out_stride == 0 || last) rec.snapshot(s);
      if (m % cfg.diag_stride == 0 || last) rec.diagnostics(s, ev(s.u));
    }
    rec.flush();
    const auto ratios = pic->ratios();
    json pj = {{"R", plan.R},
               {"T_star", plan.T_star},
               {"T", verlet_end},
               {"J1", plan.J1},
               {"J2", plan.J2},
               {"contraction_factor", plan.contraction_factor},
               {"iterations", pic->iterations},
               {"history", pic->history},
               {"max_ratio", ratios.empty() ? json(nullptr) : json(*std::max_element(ratios.begin(), ratios.end()))},
               {"energy", energy_summary(rec.records)},
               {"final_norms", norms(grid, field.final_slice())}};
    summary["picard"] = pj;
    if (!do_verlet) {
      for (auto it = pj["energy"].begin(); it != pj["energy"].end(); ++it) summary[it.key()] = it.value();
      summary["final_norms"] = pj["final_norms"];
      summary["T_end"] = verlet_end;
    }
    if (cfg.wants("dat")) {
      std::vector<std::pair<double, double>> rows;
      for (std::size_t i = 0; i < pic->history.size(); ++i) rows.emplace_back(double(i + 1), pic->history[i]);
      write_dat(out_dir / "picard_history.dat", rows);
    }
    if (!do_verlet && cfg.wants("dat")) {
      std::vector<std::pair<double, double>> e, su, fu;
      for (const auto& r : rec.records) {
        e.emplace_back(r.t, r.E);
        su.emplace_back(r.t, r.sup_u);
      }
      const Vector<double> last = field.final_slice();
      for (Index i = 0; i < grid.size(); ++i) fu.emplace_back(grid.x(i), last[i]);
      write_dat(out_dir / "energy.dat", e);
      write_dat(out_dir / "sup.dat", su);
      write_dat(out_dir / "final_u.dat", fu);
    }
  }

  if (do_verlet) {
    const double R0 = std::max(sup(phi), sup(psi));
    const double dt = cfg.dt ? *cfg.dt : recommend_dt(ev, R0 > 0 ? R0 : 1.0) * cfg.dt_scale;
    Recorder rec(cfg, kernel, plan_ptr, out_dir, "");
    const Index stride = cfg.dispersion_mode ? 1 : std::gcd(cfg.out_stride, cfg.diag_stride);
    const double span = verlet_end;
    const Index steps = std::max<Index>(1, static_cast<Index>(std::ceil(span / dt * (1 - 1e-12))));
    const double h = span / double(steps);

    std::vector<double> amp_t, amp;
    State<double> last;
    IntegrateOptions<double> opt;
    opt.stride = stride;
    opt.keep_snapshots = false;
    opt.sup_threshold = cfg.sup_threshold;
    opt.observer = [&](const State<double>& s, const Vector<double>& a) {
      const Index k = static_cast<Index>(std::llround(s.t / h));
      const bool final = k == steps || sup(s.u) > cfg.sup_threshold;
      if (k % cfg.out_stride == 0 || final) rec.snapshot(s);
      if (k % cfg.diag_stride == 0 || final) rec.diagnostics(s, a);
      if (cfg.dispersion_mode) {
        amp_t.push_back(s.t);
        amp.push_back(cosine_amplitude(grid, s.u, *cfg.dispersion_mode));
      }
      last = s;
    };
    const auto traj = integrate(State<double>{phi, psi, 0.0}, dt, verlet_end, ev, opt);
    // A non-finite step never reaches the observer; record the last finite state.
    if (traj.non_finite && (rec.records.empty() || rec.records.back().t != last.t)) {
      rec.snapshot(last);
      rec.diagnostics(last, ev(last.u));
    }
    rec.flush();

    summary["status"] = to_string(traj.status);
    summary["t_exit"] = traj.t_exit ? json(*traj.t_exit) : json(nullptr);
    summary["dt"] = traj.dt;
    summary["steps"] = traj.steps;
    summary["T_end"] = verlet_end;
    const json es = energy_summary(rec.records);
    for (auto it = es.begin(); it != es.end(); ++it) summary[it.key()] = it.value();
    summary["final_norms"] = last.u.allFinite() ? norms(grid, last.u) : json(nullptr);

    if (nl.family() == NonlinearityFamily::sublinear_atan) {
      // |w| <= a pi/2 gives |K u| <= a pi/2 ||alpha||_1.
      const double T = verlet_end;
      summary["a_priori_sup_bound"] =
          sup(phi) + T * sup(psi) + 0.5 * T * T * nl.atan_amplitude() * M_PI / 2 * kernel.l1_norm();
    }
    if (plan_ptr) {
      double worst_gap = std::numeric_limits<double>::infinity();
      for (const auto& r : rec.records)
        if (r.concavity_gap && std::isfinite(*r.H)) worst_gap = std::min(worst_gap, *r.concavity_gap / (*r.H * *r.H));
      summary["min_relative_concavity_gap"] = std::isfinite(worst_gap) ? json(worst_gap) : json(nullptr);
    }
    if (cfg.dispersion_mode) {
      const double xi = M_PI * double(*cfg.dispersion_mode) / grid.half_length();
      const double predicted2 = kernel.mass() - kernel.multiplier(xi);
      const double measured = measure_frequency(amp_t, amp);
      summary["dispersion"] = {{"mode", *cfg.dispersion_mode},
                               {"xi", xi},
                               {"predicted", predicted2 >= 0 ? json(std::sqrt(predicted2)) : json(nullptr)},
                               {"measured", std::isfinite(measured) ? json(measured) : json(nullptr)}};
    }
    if (pic && last.u.allFinite())
      summary["picard_vs_verlet_sup_diff"] = sup(Vector<double>(pic->field.final_slice() - last.u));

    if (cfg.wants("dat")) {
      std::vector<std::pair<double, double>> e, su, H, fu;
      for (const auto& r : rec.records) {
        e.emplace_back(r.t, r.E);
        su.emplace_back(r.t, r.sup_u);
        if (r.H) H.emplace_back(r.t, *r.H);
      }
      write_dat(out_dir / "energy.dat", e);
      write_dat(out_dir / "sup.dat", su);
      if (!H.empty()) write_dat(out_dir / "H.dat", H);
      for (Index i = 0; i < grid.size() && last.u.size() == grid.size(); ++i) fu.emplace_back(grid.x(i), last.u[i]);
      write_dat(out_dir / "final_u.dat", fu);
    }
  }

  if (cfg.wants("json")) {
    std::ofstream out(out_dir / "summary.json");
    out << summary.dump(2) << '\n';
  }
  return summary;
}

}  // namespace peri::app
