#include <doctest.h>

#include "oracles.hpp"
#include "peri/solver.hpp"

#include <random>

using namespace peri;
using NL = Nonlinearity<double>;
using Ev = ForceEvaluator<double>;

namespace {

struct Setup {
  Grid<double> grid{8.0, 256};
  Kernel<double> box = make_kernel(KernelSpec<double>::boxcar(1.0, 0.5), grid);  // ||alpha||_1 = 1
  Vector<double> bump = gaussian_bump(grid, 1.0, 1.0, 0.0);
};

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected peri::Error");
  return Errc::Config;
}

}  // namespace

TEST_CASE("contraction plan: cubic worked example") {
  Setup s;
  REQUIRE(s.box.l1_norm() == 1.0);
  REQUIRE(sup(s.bump) == 1.0);
  const auto plan = plan_contraction(s.bump, s.bump, s.box, NL::cubic());
  // Oracle: R = 2, M(2) = 48, so T(1 + 96T) <= 1 binds before 48T^2 <= 1/2.
  const double root = oracle::bisect([](double T) { return 96 * T * T + T - 1; }, 0.0, 1.0);
  CHECK(root == doctest::Approx((-1 + std::sqrt(385.0)) / 192).epsilon(1e-14));
  CHECK(plan.R == 2.0);
  CHECK(plan.lipschitz == 48.0);
  CHECK(plan.T_star == doctest::Approx(root).epsilon(1e-8));
  CHECK(std::abs(plan.T_star - 0.09697) <= 1e-4);
  CHECK(plan.contraction_factor <= 0.5 + 1e-12);
  CHECK(plan.T_star * plan.J1 <= plan.R / 2 + 1e-12);
  CHECK(plan.contraction_factor == doctest::Approx(48 * root * root).epsilon(1e-7));
}

TEST_CASE("contraction plan: linear and degenerate data") {
  Setup s;
  const auto zero = Vector<double>::Zero(s.grid.size()).eval();
  const auto plan = plan_contraction(s.bump, zero, s.box, NL::linear());
  CHECK(plan.T_star == doctest::Approx(std::sqrt(0.5)).epsilon(1e-8));
  CHECK(plan.contraction_factor <= 0.5 + 1e-12);

  const auto triv = plan_contraction(zero, zero, s.box, NL::cubic());
  CHECK(triv.trivial);
  CHECK(std::isinf(triv.T_star));

  // phi = 0 with nonzero psi sizes the ball from psi.
  const auto vel = plan_contraction(zero, s.bump, s.box, NL::cubic());
  CHECK(vel.R == 2.0);
  CHECK(vel.T_star > 0);
}

TEST_CASE("Picard: zero data converges at once") {
  Setup s;
  const auto zero = Vector<double>::Zero(s.grid.size()).eval();
  const auto ev = Ev::direct(s.box, NL::cubic());
  const auto plan = plan_contraction(zero, zero, ev);
  const auto res = picard_solve(zero, zero, plan, ev, {.time_intervals = 16});
  CHECK(res.iterations == 1);
  CHECK(res.field.values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Picard: geometric decay under the plan") {
  Setup s;
  const auto ev = Ev::direct(s.box, NL::linear());
  const Vector<double> phi = 0.1 * s.bump;
  const auto psi = Vector<double>::Zero(s.grid.size()).eval();
  const auto plan = plan_contraction(phi, psi, ev);
  PicardOptions opt;
  opt.time_intervals = 64;
  opt.T = plan.T_star / 2;
  const auto res = picard_solve(phi, psi, plan, ev, opt);
  CHECK(res.field.slice(0) == phi);
  const auto ratios = res.ratios();
  REQUIRE(!ratios.empty());
  for (double r : ratios) CHECK(r <= plan.contraction_factor + 0.05);
  CHECK(res.history.back() < 1e-10);
}

TEST_CASE("Picard: continuous dependence on data") {
  Setup s;
  const auto ev = Ev::direct(s.box, NL::cubic());
  const Vector<double> phi1 = 0.5 * s.bump, psi1 = 0.3 * s.bump;
  const Vector<double> phi2 = 0.45 * s.bump + 0.02 * sine_mode(s.grid, 3, 1.0);
  const Vector<double> psi2 = 0.32 * s.bump;
  const auto plan = plan_contraction(phi1, psi1, ev);
  PicardOptions opt;
  opt.time_intervals = 32;
  opt.tol = 1e-12;
  const auto a = picard_solve(phi1, psi1, plan, ev, opt);
  const auto b = picard_solve(phi2, psi2, plan, ev, opt);
  const double lhs = (a.field.values - b.field.values).cwiseAbs().maxCoeff();
  const double rhs = 2 * sup(Vector<double>(phi1 - phi2)) + 2 * plan.T_star * sup(Vector<double>(psi1 - psi2)) + 4 * opt.tol;
  CHECK(lhs <= rhs);
}

TEST_CASE("Picard: failure modes") {
  Setup s;
  const auto ev = Ev::direct(s.box, NL::cubic());
  const auto plan = plan_contraction(s.bump, s.bump, ev);
  PicardOptions opt;
  opt.T = 20 * plan.T_star;
  CHECK(code_of([&] { picard_solve(s.bump, s.bump, plan, ev, opt); }) == Errc::BallEscape);
  opt.enforce_ball = false;
  opt.max_iter = 4;
  CHECK(code_of([&] { picard_solve(s.bump, s.bump, plan, ev, opt); }) == Errc::NoConvergence);
  opt = {};
  opt.time_intervals = 8;
  CHECK(code_of([&] { picard_solve(s.bump, s.bump, plan, ev, opt); }) == Errc::InvalidParameter);
}

TEST_CASE("Verlet step basics") {
  Setup s;
  const auto ev = Ev::direct(s.box, NL::cubic());
  State<double> zero{Vector<double>::Zero(s.grid.size()), Vector<double>::Zero(s.grid.size()), 0.0};
  const auto z1 = step_verlet(zero, 0.1, ev);
  CHECK(z1.u.cwiseAbs().maxCoeff() == 0.0);
  CHECK(z1.v.cwiseAbs().maxCoeff() == 0.0);
  CHECK(z1.t == 0.1);

  State<double> st{s.bump, Vector<double>::Zero(s.grid.size()), 0.0};
  const double dt = 0.05;
  const auto next = step_verlet(st, dt, ev);
  const Vector<double> expect = 0.5 * dt * dt * ev(s.bump);
  CHECK((next.u - s.bump - expect).cwiseAbs().maxCoeff() <= 1e-16);
  CHECK_THROWS_AS(step_verlet(st, -0.1, ev), Error);
}

TEST_CASE("Verlet is time reversible") {
  Setup s;
  const auto ev = Ev::cubic_fast(s.box, NL::cubic());
  State<double> st{s.bump, 0.3 * sine_mode(s.grid, 2, 1.0), 0.0};
  State<double> cur = st;
  for (int i = 0; i < 100; ++i) cur = step_verlet(cur, 0.01, ev);
  cur.v = -cur.v;
  for (int i = 0; i < 100; ++i) cur = step_verlet(cur, 0.01, ev);
  cur.v = -cur.v;
  CHECK((cur.u - st.u).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((cur.v - st.v).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("Verlet is second order") {
  Grid<double> g(10.0, 128);
  auto k = make_kernel(KernelSpec<double>::gaussian(1.0, 1.0), g);
  const auto ev = Ev::cubic_fast(k, NL::cubic());
  State<double> st{gaussian_bump(g, 1.0, 1.5, 0.0), Vector<double>::Zero(g.size()), 0.0};
  const double T = 2.0, dt = 0.1;
  auto final_u = [&](double h) {
    IntegrateOptions<double> opt;
    opt.keep_snapshots = false;
    Vector<double> out;
    opt.observer = [&](const State<double>& x, const Vector<double>&) { out = x.u; };
    integrate(st, h, T, ev, opt);
    return out;
  };
  const auto ref = final_u(dt / 2 / 16);
  const double e1 = sup(Vector<double>(final_u(dt) - ref));
  const double e2 = sup(Vector<double>(final_u(dt / 2) - ref));
  const double ratio = e1 / e2;
  CAPTURE(ratio);
  CHECK(ratio >= 3.5);
  CHECK(ratio <= 4.5);
}

TEST_CASE("recommended step") {
  Setup s;
  CHECK(recommend_dt(Ev::direct(s.box, NL::cubic()), 1.0) == doctest::Approx(0.5 * std::sqrt(2.0 / 24.0)));
  CHECK(recommend_dt(Ev::direct(s.box, NL::cubic()), 1.0) == doctest::Approx(0.1443).epsilon(1e-3));
  CHECK(recommend_dt(Ev::direct(s.box, NL::linear()), 7.0) == doctest::Approx(0.5));
}

TEST_CASE("stability probe at the recommended step") {
  Setup s;
  const auto ev = Ev::direct(s.box, NL::linear());
  std::mt19937_64 rng(1);
  State<double> st{oracle::random_field(s.grid.size(), 1.0, rng), Vector<double>::Zero(s.grid.size()), 0.0};
  const double dt = recommend_dt(ev, 1.0);
  IntegrateOptions<double> opt;
  opt.keep_snapshots = false;
  opt.sup_threshold = 1e6;
  const auto ok = integrate(st, dt, 1000 * dt, ev, opt);
  CHECK(ok.status == RunStatus::bounded);
  CHECK(ok.steps == 1000);
  const auto bad = integrate(st, 4 * dt, 1000 * 4 * dt, ev, opt);
  CHECK(bad.status == RunStatus::blowup);
  REQUIRE(bad.t_exit);
  CHECK(*bad.t_exit < 1000 * 4 * dt);
}

TEST_CASE("integrate bookkeeping") {
  Setup s;
  const auto ev = Ev::direct(s.box, NL::linear());
  State<double> st{s.bump, Vector<double>::Zero(s.grid.size()), 0.0};
  IntegrateOptions<double> opt;
  opt.stride = 3;
  int calls = 0;
  opt.observer = [&](const State<double>&, const Vector<double>&) { ++calls; };
  const auto tr = integrate(st, 0.1, 1.0, ev, opt);
  CHECK(tr.steps == 10);
  CHECK(tr.dt == doctest::Approx(0.1));
  CHECK(calls == 5);  // steps 0, 3, 6, 9 and the final one
  CHECK(tr.snapshots.size() == 5);
  CHECK(tr.snapshots.back().t == 1.0);

  // Steps are shrunk so the run lands on T_end.
  const auto tr2 = integrate(st, 0.3, 1.0, ev);
  CHECK(tr2.steps == 4);
  CHECK(tr2.snapshots.back().t == 1.0);
  CHECK_THROWS_AS(integrate(st, 0.1, 0.0, ev), Error);
}

TEST_CASE("Picard and Verlet agree on the contraction interval") {
  Grid<double> g(8.0, 128);
  auto box = make_kernel(KernelSpec<double>::boxcar(1.0, 0.5), g);
  const auto ev = Ev::cubic_fast(box, NL::cubic());
  const auto phi = gaussian_bump(g, 1.0, 1.0, 0.0);
  const auto psi = gaussian_bump(g, 1.0, 1.0, 0.0);
  const auto plan = plan_contraction(phi, psi, ev);
  PicardOptions opt;
  opt.time_intervals = 128;
  const auto pic = picard_solve(phi, psi, plan, ev, opt);
  IntegrateOptions<double> io;
  io.keep_snapshots = false;
  Vector<double> last;
  io.observer = [&](const State<double>& x, const Vector<double>&) { last = x.u; };
  integrate(State<double>{phi, psi, 0.0}, 1e-4, plan.T_star, ev, io);
  CHECK(sup(Vector<double>(pic.field.final_slice() - last)) <= 1e-3);
}
