#pragma once

#include "peri/core.hpp"
#include "peri/grid.hpp"
#include "peri/kernel.hpp"
#include "peri/model.hpp"
#include "peri/solver.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace peri {

template <typename Scalar = double>
struct EnergySplit {
  Scalar kinetic = Scalar(0);
  Scalar potential = Scalar(0);
  Scalar total = Scalar(0);
};

namespace detail {

// sum_m alpha_m W(u_{i+m} - u_i) for each i, without the dx factor.
template <typename Scalar>
Vector<Scalar> pair_potential_rows(const Vector<Scalar>& u, const Kernel<Scalar>& kernel,
                                   const Nonlinearity<Scalar>& nl) {
  const Index n = u.size();
  Vector<Scalar> rows(n);
  for (Index i = 0; i < n; ++i) {
    Scalar acc(0);
    const Scalar ui = u[i];
    kernel.for_each_offset([&](Index m, Scalar a) { acc += a * nl.W(u[((i + m) % n + n) % n] - ui); });
    rows[i] = acc;
  }
  return rows;
}

}  // namespace detail

/// kinetic = 1/2 ||v||_2^2, potential = 1/2 dx^2 sum_i sum_j alpha(x_j - x_i) W(u_j - u_i).
template <typename Scalar>
EnergySplit<Scalar> energy(const State<Scalar>& s, const Kernel<Scalar>& kernel, const Nonlinearity<Scalar>& nl) {
  const Scalar dx = kernel.grid().dx();
  if (s.u.size() != kernel.grid().size() || s.v.size() != kernel.grid().size())
    throw Error(Errc::LengthMismatch, "state length differs from grid");
  EnergySplit<Scalar> e;
  e.kinetic = Scalar(0.5) * dx * s.v.squaredNorm();
  e.potential = Scalar(0.5) * dx * dx * detail::pair_potential_rows(s.u, kernel, nl).sum();
  e.total = e.kinetic + e.potential;
  return e;
}

/// e_i = 1/2 v_i^2 + dx sum_j alpha(x_j - x_i) W(u_j - u_i); dx * sum e = kinetic + 2 potential.
template <typename Scalar>
Vector<Scalar> energy_density(const State<Scalar>& s, const Kernel<Scalar>& kernel,
                              const Nonlinearity<Scalar>& nl) {
  return Scalar(0.5) * s.v.cwiseProduct(s.v) + kernel.grid().dx() * detail::pair_potential_rows(s.u, kernel, nl);
}

/// Constants of H(t) = ||u||_2^2 + b (t + t0)^2 for the concavity argument.
template <typename Scalar = double>
struct BlowupPlan {
  Scalar nu = Scalar(0);
  Scalar b = Scalar(0);
  Scalar t0 = Scalar(0);
  Scalar E0 = Scalar(0);
  Scalar H0 = Scalar(0);
  Scalar H0_prime = Scalar(0);
  Scalar t1_bound = Scalar(0);  // H(0) / (nu H'(0))
  bool hypothesis_certified = true;

  Scalar H(Scalar l2sq, Scalar t) const { return l2sq + b * (t + t0) * (t + t0); }
  Scalar H_prime(Scalar uv, Scalar t) const { return Scalar(2) * uv + Scalar(2) * b * (t + t0); }
};

/// b = -2 E0 and t0 = max(1, (1 - <phi,psi>)/b), which gives H'(0) >= 2.
template <typename Scalar>
BlowupPlan<Scalar> plan_blowup_from(Scalar E0, Scalar phi_dot_psi, Scalar phi_l2sq, Scalar nu) {
  if (!(nu > Scalar(0))) throw Error(Errc::BadNu, "nu must be positive");
  if (!(E0 < Scalar(0))) throw Error(Errc::NonNegativeEnergy, "initial energy must be negative");
  BlowupPlan<Scalar> p;
  p.nu = nu;
  p.E0 = E0;
  p.b = Scalar(-2) * E0;
  p.t0 = std::max(Scalar(1), (Scalar(1) - phi_dot_psi) / p.b);
  p.H0 = phi_l2sq + p.b * p.t0 * p.t0;
  p.H0_prime = Scalar(2) * phi_dot_psi + Scalar(2) * p.b * p.t0;
  p.t1_bound = p.H0 / (nu * p.H0_prime);
  return p;
}

template <typename Scalar>
BlowupPlan<Scalar> plan_blowup(const Vector<Scalar>& phi, const Vector<Scalar>& psi, const Kernel<Scalar>& kernel,
                               const Nonlinearity<Scalar>& nl, Scalar nu) {
  if (!(nu > Scalar(0))) throw Error(Errc::BadNu, "nu must be positive");
  const auto verdict = check_blowup_hypothesis(nl, nu);
  if (!verdict.holds) throw Error(Errc::BadNu, "eta w(eta) <= 2(1+2nu) W(eta) fails for this nu");
  const auto& grid = kernel.grid();
  const Scalar E0 = energy(State<Scalar>{phi, psi, Scalar(0)}, kernel, nl).total;
  auto plan = plan_blowup_from(E0, inner(grid, phi, psi), inner(grid, phi, phi), nu);
  plan.hypothesis_certified = verdict.certified;
  return plan;
}

/// Per-snapshot diagnostics.
template <typename Scalar = double>
struct DiagnosticsRecord {
  Scalar t = Scalar(0);
  Scalar kinetic = Scalar(0);
  Scalar potential = Scalar(0);
  Scalar E = Scalar(0);
  Scalar sup_u = Scalar(0);
  Scalar l2_u = Scalar(0);
  std::optional<Scalar> H;
  std::optional<Scalar> H_prime;
  std::optional<Scalar> H_second;                // 2||v||^2 + 2<u, K u> + 2b
  std::optional<Scalar> concavity_gap_analytic;  // H'' H - (1 + nu) H'^2 with H'' above
  std::optional<Scalar> concavity_gap;           // same with H'' from central differences of H'
  bool blowup = false;
};

template <typename Scalar>
DiagnosticsRecord<Scalar> make_record(const State<Scalar>& s, const Vector<Scalar>& accel,
                                      const Kernel<Scalar>& kernel, const Nonlinearity<Scalar>& nl,
                                      const BlowupPlan<Scalar>* plan = nullptr) {
  DiagnosticsRecord<Scalar> r;
  r.t = s.t;
  if (!s.finite()) {
    r.blowup = true;
    r.E = r.kinetic = r.potential = std::numeric_limits<Scalar>::quiet_NaN();
    r.sup_u = std::numeric_limits<Scalar>::infinity();
    return r;
  }
  const auto& grid = kernel.grid();
  const auto e = energy(s, kernel, nl);
  r.kinetic = e.kinetic;
  r.potential = e.potential;
  r.E = e.total;
  r.sup_u = sup(s.u);
  r.l2_u = l2(grid, s.u);
  if (plan) {
    const Scalar l2sq = inner(grid, s.u, s.u);
    r.H = plan->H(l2sq, s.t);
    r.H_prime = plan->H_prime(inner(grid, s.u, s.v), s.t);
    r.H_second = Scalar(2) * inner(grid, s.v, s.v) + Scalar(2) * inner(grid, s.u, accel) + Scalar(2) * plan->b;
    r.concavity_gap_analytic = *r.H_second * *r.H - (Scalar(1) + plan->nu) * *r.H_prime * *r.H_prime;
  }
  r.blowup = !std::isfinite(static_cast<double>(r.E));
  return r;
}

/// Fills concavity_gap at interior records from central differences of H'.
/// The analytic H'' inherits the time stepper's energy error, which is large on the
/// last under-resolved steps before a blowup; the differenced one follows the recorded H'.
template <typename Scalar>
void fill_concavity_gaps(std::vector<DiagnosticsRecord<Scalar>>& recs, Scalar nu) {
  for (std::size_t i = 1; i + 1 < recs.size(); ++i) {
    auto &a = recs[i - 1], &r = recs[i], &b = recs[i + 1];
    if (!a.H_prime || !r.H || !b.H_prime) continue;
    const Scalar h2 = (*b.H_prime - *a.H_prime) / (b.t - a.t);
    r.concavity_gap = h2 * *r.H - (Scalar(1) + nu) * *r.H_prime * *r.H_prime;
  }
}

template <typename Scalar = double>
struct HSample {
  Scalar t = Scalar(0);
  Scalar H = Scalar(0);
  Scalar H_prime = Scalar(0);
};

/// H = ||u||_2^2 + b (t + t0)^2 and H' = 2<u, v> + 2b (t + t0) for every snapshot.
template <typename Scalar>
std::vector<HSample<Scalar>> track_H(const Trajectory<Scalar>& traj, const BlowupPlan<Scalar>& plan,
                                     const Grid<Scalar>& grid) {
  std::vector<HSample<Scalar>> out;
  out.reserve(traj.snapshots.size());
  for (const auto& s : traj.snapshots)
    out.push_back({s.t, plan.H(inner(grid, s.u, s.u), s.t), plan.H_prime(inner(grid, s.u, s.v), s.t)});
  return out;
}

/// H'' H - (1 + nu) H'^2 at interior samples, H'' by central differences of H'.
template <typename Scalar>
std::vector<Scalar> concavity_gaps(const std::vector<HSample<Scalar>>& series, Scalar nu) {
  std::vector<Scalar> gaps;
  for (std::size_t i = 1; i + 1 < series.size(); ++i) {
    const Scalar h2 = (series[i + 1].H_prime - series[i - 1].H_prime) / (series[i + 1].t - series[i - 1].t);
    gaps.push_back(h2 * series[i].H - (Scalar(1) + nu) * series[i].H_prime * series[i].H_prime);
  }
  return gaps;
}

template <typename Scalar = double>
struct BlowupReport {
  RunStatus status = RunStatus::bounded;
  std::optional<Scalar> t_exit;
  Scalar max_sup = Scalar(0);
};

/// Blowup iff sup|u| crosses the threshold or the run produced non-finite values.
template <typename Scalar>
BlowupReport<Scalar> monitor_blowup(const Trajectory<Scalar>& traj, Scalar sup_threshold) {
  if (!traj.snapshots.empty() && !(sup_threshold > sup(traj.snapshots.front().u)))
    throw Error(Errc::InvalidParameter, "threshold must exceed the initial sup norm");
  BlowupReport<Scalar> rep;
  for (const auto& s : traj.snapshots) {
    const Scalar m = s.u.allFinite() ? sup(s.u) : std::numeric_limits<Scalar>::infinity();
    rep.max_sup = std::max(rep.max_sup, m);
    if (m > sup_threshold) {
      rep.status = RunStatus::blowup;
      rep.t_exit = s.t;
      return rep;
    }
  }
  if (traj.status == RunStatus::blowup && traj.t_exit) {
    rep.status = RunStatus::blowup;
    rep.t_exit = traj.t_exit;
  }
  return rep;
}

/// Projection of u onto cos(xi_mode x), normalized so that u = a cos gives a.
template <typename Scalar>
Scalar cosine_amplitude(const Grid<Scalar>& grid, const Vector<Scalar>& u, Index mode) {
  const Vector<Scalar> c = cosine_mode(grid, mode, Scalar(1));
  return u.dot(c) / c.squaredNorm();
}

/// Angular frequency from the zero crossings of an oscillating signal; crossings are
/// located by linear interpolation. NaN when fewer than two crossings exist.
template <typename Scalar>
Scalar measure_frequency(const std::vector<Scalar>& times, const std::vector<Scalar>& signal) {
  std::vector<Scalar> crossings;
  for (std::size_t i = 1; i < signal.size(); ++i) {
    const Scalar a = signal[i - 1], b = signal[i];
    if ((a < Scalar(0) && b >= Scalar(0)) || (a > Scalar(0) && b <= Scalar(0))) {
      if (b == Scalar(0) && i + 1 < signal.size() && signal[i + 1] * a > Scalar(0)) continue;
      crossings.push_back(times[i - 1] + (times[i] - times[i - 1]) * a / (a - b));
    }
  }
  if (crossings.size() < 2) return std::numeric_limits<Scalar>::quiet_NaN();
  const Scalar span = crossings.back() - crossings.front();
  return Scalar(M_PI) * Scalar(crossings.size() - 1) / span;
}

}  // namespace peri
