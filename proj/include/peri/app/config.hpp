#pragma once

#include "peri/peri.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace peri::app {

using json = nlohmann::json;

struct FieldConfig {
  std::string preset = "zero";  // zero, gaussian_bump, sine, cosine, random, csv
  double amp = 1.0;
  double width = 1.0;
  double center = 0.0;
  Index mode = 1;
  Index max_mode = 8;
  std::string path;  // csv preset
  Index column = 0;
};

struct SimConfig {
  std::optional<std::string> scenario;
  double L = 10.0;
  Index N = 256;

  KernelSpec<double> kernel;
  std::string kernel_table;  // path, family "table" only

  Nonlinearity<double> nonlinearity = Nonlinearity<double>::cubic();

  FieldConfig phi, psi;
  std::uint64_t seed = 0;

  std::string rhs_mode = "auto";
  bool dealias = false;

  std::string solver_mode = "verlet";  // verlet, picard, both
  std::optional<double> dt;            // empty means recommended step times dt_scale
  double dt_scale = 1.0;
  double T_end = 1.0;
  Index picard_intervals = 256;
  double picard_tol = 1e-10;
  int picard_max_iter = 200;
  std::optional<double> picard_T;

  Index diag_stride = 10;
  double sup_threshold = 1e6;
  std::optional<double> nu;
  bool track_H = false;
  std::optional<Index> dispersion_mode;

  std::string out_dir = "out";
  std::vector<std::string> formats{"csv", "ndjson", "json", "dat"};
  Index out_stride = 10;

  bool wants(const std::string& fmt) const;
};

/// Built-in values for every key; user documents are merged on top.
json default_document();

/// "key.path: message" for every schema violation; empty when valid.
std::vector<std::string> validate(const json& doc);

/// Parses a validated document. Throws Error(Errc::Config) listing all violations otherwise.
SimConfig parse(const json& doc);

/// Applies `key.path=value`. The value is read as JSON, falling back to a plain string.
void apply_override(json& doc, const std::string& assignment);

/// defaults <- scenario preset <- user document <- overrides.
json resolve(const std::optional<std::string>& scenario, const json& user, const std::vector<std::string>& overrides);

json load_document(const std::string& path);

}  // namespace peri::app
