#include "peri/app/scenarios.hpp"

namespace peri::app {

namespace {

json bump(double amp, double width = 1.0) { return {{"preset", "gaussian_bump"}, {"amp", amp}, {"width", width}}; }

json zero() { return {{"preset", "zero"}}; }

// Boxcar with delta = 1 and c = 1/2 on a grid whose dx divides 1, so ||alpha||_1 = 1.
json unit_boxcar() { return {{"family", "boxcar"}, {"scale", 1.0}, {"amplitude", 0.5}}; }

std::vector<Scenario> build() {
  std::vector<Scenario> s;
  s.push_back({"cubic_conserve", "cubic law, gaussian kernel, Verlet to T=10; reports energy drift",
               {{"grid", {{"L", 10.0}, {"N", 256}}},
                {"kernel", {{"family", "gaussian"}, {"scale", 1.0}, {"amplitude", 1.0}}},
                {"nonlinearity", {{"family", "cubic"}}},
                {"initial", {{"phi", bump(1.0)}, {"psi", zero()}}},
                {"solver", {{"mode", "verlet"}, {"dt", "auto"}, {"dt_scale", 0.25}, {"T_end", 10.0}}},
                {"diagnostics", {{"stride", 10}}},
                {"output", {{"stride", 20}}}}});
  s.push_back({"blowup_negcubic", "w = -eta^3 with negative initial energy; sup|u| grows past 1e6 in finite time",
               {{"grid", {{"L", 8.0}, {"N", 128}}},
                {"kernel", unit_boxcar()},
                {"nonlinearity", {{"family", "power"}, {"nu", 3.0}, {"sign", -1}}},
                {"initial", {{"phi", bump(2.0)}, {"psi", zero()}}},
                {"solver", {{"mode", "verlet"}, {"dt", 1e-4}, {"T_end", 20.0}}},
                {"diagnostics", {{"stride", 10}, {"sup_threshold", 1e6}, {"nu", 0.5}, {"track_H", true}}},
                {"output", {{"stride", 100}}}}});
  s.push_back({"sublinear_global", "w = arctan(eta) to T=100; bounded, compared with the a priori growth bound",
               {{"grid", {{"L", 10.0}, {"N", 128}}},
                {"kernel", {{"family", "gaussian"}, {"scale", 1.0}, {"amplitude", 1.0}}},
                {"nonlinearity", {{"family", "atan"}, {"a", 1.0}}},
                {"initial", {{"phi", bump(1.0)}, {"psi", bump(0.5)}}},
                {"rhs", {{"mode", "direct"}}},
                {"solver", {{"mode", "verlet"}, {"dt", "auto"}, {"dt_scale", 0.25}, {"T_end", 100.0}}},
                {"diagnostics", {{"stride", 50}}},
                {"output", {{"stride", 200}}}}});
  s.push_back({"linear_dispersion", "linear law, single cosine mode; measured frequency against sqrt(A - alpha_hat)",
               {{"grid", {{"L", 10.0}, {"N", 128}}},
                {"kernel", {{"family", "gaussian"}, {"scale", 1.0}, {"amplitude", 1.0}}},
                {"nonlinearity", {{"family", "linear"}}},
                {"initial", {{"phi", {{"preset", "cosine"}, {"mode", 3}, {"amp", 0.1}}}, {"psi", zero()}}},
                {"solver", {{"mode", "verlet"}, {"dt", "auto"}, {"dt_scale", 0.125}, {"T_end", 40.0}}},
                {"diagnostics", {{"stride", 10}, {"dispersion_mode", 3}}},
                {"output", {{"stride", 50}}}}});
  s.push_back({"picard_vs_verlet", "Picard on [0, T*] against a fine Verlet run; reports the sup difference at T*",
               {{"grid", {{"L", 8.0}, {"N", 256}}},
                {"kernel", unit_boxcar()},
                {"nonlinearity", {{"family", "cubic"}}},
                {"initial", {{"phi", bump(1.0)}, {"psi", bump(1.0)}}},
                {"solver", {{"mode", "both"}, {"dt", 1e-4}, {"picard", {{"M_t", 256}, {"tol", 1e-10}}}}},
                {"diagnostics", {{"stride", 50}}},
                {"output", {{"stride", 50}}}}});
  s.push_back({"contraction_probe", "contraction plan for ||phi|| = ||psi|| = 1 and measured Picard ratios",
               {{"grid", {{"L", 8.0}, {"N", 256}}},
                {"kernel", unit_boxcar()},
                {"nonlinearity", {{"family", "cubic"}}},
                {"initial", {{"phi", bump(1.0)}, {"psi", bump(1.0)}}},
                {"solver", {{"mode", "picard"}, {"picard", {{"M_t", 256}, {"tol", 1e-10}}}}},
                {"diagnostics", {{"stride", 16}}},
                {"output", {{"stride", 16}}}}});
  s.push_back({"zero", "zero data; everything stays at rest",
               {{"grid", {{"L", 8.0}, {"N", 64}}},
                {"kernel", unit_boxcar()},
                {"initial", {{"phi", zero()}, {"psi", zero()}}},
                {"solver", {{"mode", "verlet"}, {"dt", 0.01}, {"T_end", 1.0}}}},
               false});
  return s;
}

}  // namespace

const std::vector<Scenario>& scenarios() {
  static const std::vector<Scenario> all = build();
  return all;
}

const Scenario* find_scenario(const std::string& name) {
  for (const auto& s : scenarios())
    if (s.name == name) return &s;
  return nullptr;
}

}  // namespace peri::app
