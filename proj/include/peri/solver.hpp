#pragma once

#include "peri/core.hpp"
#include "peri/grid.hpp"
#include "peri/rhs.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

namespace peri {

/// Ball radius R and interval length T_star on which u -> S u maps the R-ball of
/// C([0,T], C_b) into itself and contracts, with
///   J1(R,T) = ||psi||_inf + G(R) R T,   J2(R,T) = L(R) T,
/// where G = L = M(R)||alpha||_1 for the separable law.
template <typename Scalar = double>
struct ContractionPlan {
  Scalar R = Scalar(0);
  Scalar T_star = Scalar(0);
  Scalar J1 = Scalar(0);
  Scalar J2 = Scalar(0);
  Scalar contraction_factor = Scalar(0);  // T_star * J2
  Scalar phi_sup = Scalar(0);
  Scalar psi_sup = Scalar(0);
  Scalar growth = Scalar(0);     // G(R)
  Scalar lipschitz = Scalar(0);  // L(R)
  bool trivial = false;          // phi = psi = 0; T_star is +inf

  Scalar j1(Scalar T) const { return psi_sup + growth * R * T; }
  Scalar j2(Scalar T) const { return lipschitz * T; }
};

template <typename Scalar>
ContractionPlan<Scalar> plan_contraction(const Vector<Scalar>& phi, const Vector<Scalar>& psi,
                                         const ForceEvaluator<Scalar>& ev) {
  ContractionPlan<Scalar> plan;
  plan.phi_sup = sup(phi);
  plan.psi_sup = sup(psi);
  if (plan.phi_sup == Scalar(0) && plan.psi_sup == Scalar(0)) {
    plan.trivial = true;
    plan.T_star = std::numeric_limits<Scalar>::infinity();
    return plan;
  }
  // With phi = 0 the ball R = 2||phi|| is degenerate; size it from psi instead.
  plan.R = plan.phi_sup > Scalar(0) ? Scalar(2) * plan.phi_sup : Scalar(2) * plan.psi_sup;
  plan.growth = ev.growth_constant(plan.R);
  plan.lipschitz = ev.lipschitz_constant(plan.R);

  auto feasible = [&](Scalar T) {
    return T * plan.j1(T) <= plan.R / Scalar(2) && T * plan.j2(T) <= Scalar(0.5);
  };
  Scalar lo(0), hi(1);
  while (feasible(hi)) {
    lo = hi;
    hi *= Scalar(2);
    if (hi > Scalar(1e12)) {
      plan.T_star = std::numeric_limits<Scalar>::infinity();
      return plan;
    }
  }
  while (hi - lo > Scalar(1e-12) * hi) {
    const Scalar mid = Scalar(0.5) * (lo + hi);
    (feasible(mid) ? lo : hi) = mid;
  }
  plan.T_star = lo;
  plan.J1 = plan.j1(lo);
  plan.J2 = plan.j2(lo);
  plan.contraction_factor = lo * plan.J2;
  return plan;
}

template <typename Scalar>
ContractionPlan<Scalar> plan_contraction(const Vector<Scalar>& phi, const Vector<Scalar>& psi,
                                         const Kernel<Scalar>& kernel, const Nonlinearity<Scalar>& nl) {
  return plan_contraction(phi, psi, ForceEvaluator<Scalar>::direct(kernel, nl));
}

/// u(x_i, t_m) on the lattice t_m = m T / M_t.
template <typename Scalar = double>
struct SpaceTimeField {
  Vector<Scalar> times;
  Matrix<Scalar> values;      // N x (M_t + 1), column m is the slice at times[m]
  Matrix<Scalar> velocities;  // psi + int_0^t K u, same layout

  Index time_nodes() const { return times.size(); }
  Vector<Scalar> slice(Index m) const { return values.col(m); }
  Vector<Scalar> final_slice() const { return values.col(values.cols() - 1); }
};

struct PicardOptions {
  Index time_intervals = 256;  // M_t
  double tol = 1e-10;
  int max_iter = 200;
  std::optional<double> T{};    // defaults to the plan's T_star
  bool enforce_ball = true;
};

template <typename Scalar = double>
struct PicardResult {
  SpaceTimeField<Scalar> field;
  std::vector<Scalar> history;  // sup-lattice distance between consecutive iterates
  int iterations = 0;

  std::vector<Scalar> ratios() const {
    std::vector<Scalar> r;
    for (std::size_t n = 1; n < history.size(); ++n)
      if (history[n - 1] > Scalar(0)) r.push_back(history[n] / history[n - 1]);
    return r;
  }
};

/// Successive substitution u <- phi + t psi + int_0^t (t - tau) (K u)(tau) dtau, starting
/// from phi + t psi. The time integral is the composite trapezoid rule over the stored
/// slices, accumulated as t_m * int K - int tau K.
template <typename Scalar>
PicardResult<Scalar> picard_solve(const Vector<Scalar>& phi, const Vector<Scalar>& psi,
                                  const ContractionPlan<Scalar>& plan, const ForceEvaluator<Scalar>& ev,
                                  const PicardOptions& opt = {}) {
  const Index n = ev.grid().size();
  if (phi.size() != n || psi.size() != n) throw Error(Errc::LengthMismatch, "initial data length");
  if (opt.time_intervals < 16) throw Error(Errc::InvalidParameter, "need at least 16 time intervals");
  const Scalar T = opt.T ? Scalar(*opt.T) : (plan.trivial ? Scalar(1) : plan.T_star);
  if (!(T > Scalar(0)) || !std::isfinite(static_cast<double>(T)))
    throw Error(Errc::InvalidParameter, "Picard interval must be positive and finite");

  const Index mt = opt.time_intervals;
  const Scalar h = T / Scalar(mt);
  PicardResult<Scalar> res;
  auto& field = res.field;
  field.times.resize(mt + 1);
  for (Index m = 0; m <= mt; ++m) field.times[m] = Scalar(m) * h;
  field.values.resize(n, mt + 1);
  for (Index m = 0; m <= mt; ++m) field.values.col(m) = phi + field.times[m] * psi;

  const Scalar ball = plan.R * (Scalar(1) + Scalar(1e-12));
  field.velocities.resize(n, mt + 1);
  Matrix<Scalar> next(n, mt + 1);
  Vector<Scalar> Kprev(n), Kcur(n), P(n), Q(n);
  for (int it = 1; it <= opt.max_iter; ++it) {
    next.col(0) = phi;
    field.velocities.col(0) = psi;
    Kprev = ev(field.values.col(0));
    P.setZero();
    Q.setZero();
    for (Index m = 1; m <= mt; ++m) {
      Kcur = ev(field.values.col(m));
      P += Scalar(0.5) * h * (Kprev + Kcur);
      Q += Scalar(0.5) * h * (field.times[m - 1] * Kprev + field.times[m] * Kcur);
      next.col(m) = phi + field.times[m] * psi + field.times[m] * P - Q;
      field.velocities.col(m) = psi + P;
      std::swap(Kprev, Kcur);
    }
    if (!next.allFinite()) throw Error(Errc::NoConvergence, "Picard iterate became non-finite");
    if (opt.enforce_ball && !plan.trivial && next.cwiseAbs().maxCoeff() > ball)
      throw Error(Errc::BallEscape, "Picard iterate left the ball of radius R");
    const Scalar diff = (next - field.values).cwiseAbs().maxCoeff();
    field.values.swap(next);
    res.history.push_back(diff);
    res.iterations = it;
    if (diff < Scalar(opt.tol)) return res;
  }
  throw Error(Errc::NoConvergence, "Picard iteration did not reach the tolerance");
}

/// One Stormer-Verlet step:
///   u+ = u + dt v + dt^2/2 K(u),  v+ = v + dt/2 (K(u) + K(u+)).
template <typename Scalar>
State<Scalar> step_verlet(const State<Scalar>& s, Scalar dt, const ForceEvaluator<Scalar>& ev) {
  if (!(dt > Scalar(0))) throw Error(Errc::InvalidParameter, "dt must be positive");
  const Vector<Scalar> a0 = ev(s.u);
  State<Scalar> out;
  out.u = s.u + dt * s.v + (Scalar(0.5) * dt * dt) * a0;
  const Vector<Scalar> a1 = ev(out.u);
  out.v = s.v + (Scalar(0.5) * dt) * (a0 + a1);
  out.t = s.t + dt;
  if (!out.finite()) throw Error(Errc::BlowupDetected, "non-finite values after Verlet step");
  return out;
}

/// 0.5 * sqrt(2 / (2 M(R) ||alpha||_1)); 2 M(R)||alpha||_1 bounds the spectral radius of
/// the linearized force on the R-ball.
template <typename Scalar>
Scalar recommend_dt(const ForceEvaluator<Scalar>& ev, Scalar R) {
  if (!(R > Scalar(0))) throw Error(Errc::InvalidParameter, "R must be positive");
  const Scalar L = ev.lipschitz_constant(R);
  if (!(L > Scalar(0))) return std::numeric_limits<Scalar>::infinity();
  return Scalar(0.5) * std::sqrt(Scalar(2) / (Scalar(2) * L));
}

enum class RunStatus { bounded, blowup };

inline const char* to_string(RunStatus s) { return s == RunStatus::bounded ? "bounded" : "blowup"; }

template <typename Scalar = double>
struct Trajectory {
  std::vector<State<Scalar>> snapshots;
  RunStatus status = RunStatus::bounded;
  bool non_finite = false;
  std::optional<Scalar> t_exit;
  Scalar dt = Scalar(0);
  Index steps = 0;
};

template <typename Scalar = double>
struct IntegrateOptions {
  Index stride = 1;
  Scalar sup_threshold = std::numeric_limits<Scalar>::infinity();
  bool keep_snapshots = true;
  // Called on the initial state, every stride steps, and on the last state.
  // The second argument is K(u) for that state.
  std::function<void(const State<Scalar>&, const Vector<Scalar>&)> observer;
};

/// Verlet steps of uniform size (T_end - t0)/n with n = ceil((T_end - t0)/dt).
/// Non-finite values or sup|u| above the threshold end the run with status blowup.
template <typename Scalar>
Trajectory<Scalar> integrate(const State<Scalar>& start, Scalar dt, Scalar T_end,
                             const ForceEvaluator<Scalar>& ev, const IntegrateOptions<Scalar>& opt = {}) {
  if (!(dt > Scalar(0))) throw Error(Errc::InvalidParameter, "dt must be positive");
  if (!(T_end > start.t)) throw Error(Errc::InvalidParameter, "T_end must exceed the start time");
  if (opt.stride < 1) throw Error(Errc::InvalidParameter, "stride must be >= 1");

  const Scalar span = T_end - start.t;
  const Index steps = std::max<Index>(1, static_cast<Index>(std::ceil(span / dt * (Scalar(1) - Scalar(1e-12)))));
  const Scalar h = span / Scalar(steps);

  Trajectory<Scalar> traj;
  traj.dt = h;
  State<Scalar> s = start;
  Vector<Scalar> a = ev(s.u);
  auto emit = [&](const State<Scalar>& st, const Vector<Scalar>& acc) {
    if (opt.keep_snapshots) traj.snapshots.push_back(st);
    if (opt.observer) opt.observer(st, acc);
  };
  emit(s, a);

  for (Index k = 1; k <= steps; ++k) {
    State<Scalar> next;
    next.u = s.u + h * s.v + (Scalar(0.5) * h * h) * a;
    Vector<Scalar> a1 = ev(next.u);
    next.v = s.v + (Scalar(0.5) * h) * (a + a1);
    next.t = start.t + Scalar(k) * h;
    traj.steps = k;
    if (!next.finite() || !a1.allFinite()) {
      traj.status = RunStatus::blowup;
      traj.non_finite = true;
      traj.t_exit = next.t;
      if ((k - 1) % opt.stride != 0) emit(s, a);  // last finite state
      return traj;
    }
    s = std::move(next);
    a = std::move(a1);
    if (sup(s.u) > opt.sup_threshold) {
      traj.status = RunStatus::blowup;
      traj.t_exit = s.t;
      emit(s, a);
      return traj;
    }
    if (k % opt.stride == 0 || k == steps) emit(s, a);
  }
  return traj;
}

}  // namespace peri
