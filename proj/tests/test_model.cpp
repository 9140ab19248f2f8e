#include <doctest.h>

#include "oracles.hpp"
#include "peri/model.hpp"

#include <random>

using namespace peri;
using NL = Nonlinearity<double>;

namespace {

std::vector<NL> presets() {
  return {NL::cubic(),           NL::linear(),       NL::power(2.5, 1), NL::power(3.0, -1),
          NL::power(5.0, 1),     NL::sublinear_atan(1.0), NL::sublinear_atan(2.5),
          NL::polynomial({1.0, 0.0, 1.0}), NL::polynomial({0.5, -0.2})};
}

}  // namespace

TEST_CASE("nonlinearity structural invariants") {
  for (const auto& nl : presets()) {
    CAPTURE(to_string(nl.family()));
    CHECK(nl.w(0.0) == 0.0);
    CHECK(nl.W(0.0) == 0.0);
    for (int i = 0; i < 1000; ++i) {
      const double e = -5.0 + 10.0 * (i + 0.5) / 1000.0;
      CHECK(nl.w(-e) == -nl.w(e));
      // W' = w by central difference.
      const double h = 1e-5;
      const double fd = (nl.W(e + h) - nl.W(e - h)) / (2 * h);
      CHECK(std::abs(fd - nl.w(e)) <= 1e-6 * std::max(1.0, std::abs(nl.w(e))));
      const double dfd = (nl.w(e + h) - nl.w(e - h)) / (2 * h);
      CHECK(std::abs(dfd - nl.dw(e)) <= 1e-6 * std::max(1.0, std::abs(nl.dw(e))));
    }
  }
}

TEST_CASE("power potential equals the integral of w") {
  for (double nu : {1.0, 1.5, 2.0, 3.0, 4.5}) {
    const auto nl = NL::power(nu, 1);
    for (double e : {-2.0, -0.3, 0.7, 1.9}) {
      const double integral = oracle::simpson([&](double r) { return nl.w(r); }, 0.0, e, 2000);
      CHECK(nl.W(e) == doctest::Approx(integral).epsilon(1e-6));
      CHECK(nl.W(e) == doctest::Approx(std::pow(std::abs(e), nu + 1) / (nu + 1)).epsilon(1e-14));
    }
  }
}

TEST_CASE("stiffness bound M(R)") {
  CHECK(stiffness_bound(NL::cubic(), 1.0) == 12.0);
  CHECK(stiffness_bound(NL::cubic(), 2.0) == 48.0);
  CHECK(stiffness_bound(NL::linear(), 0.1) == 1.0);
  CHECK(stiffness_bound(NL::linear(), 100.0) == 1.0);
  CHECK_THROWS_AS(stiffness_bound(NL::cubic(), 0.0), Error);
  for (const auto& nl : presets()) {
    for (double R : {0.1, 0.5, 1.0, 2.0}) {
      const double oracle_val = oracle::dense_abs_max([&](double e) { return nl.dw(e); }, 2 * R);
      CHECK(stiffness_bound(nl, R) == doctest::Approx(oracle_val).epsilon(1e-8));
    }
  }
}

TEST_CASE("curvature bound N(R)") {
  CHECK(curvature_bound(NL::cubic(), 1.0) == 12.0);
  CHECK(curvature_bound(NL::linear(), 3.0) == 0.0);
  const auto p = NL::polynomial({1.0, 0.0, 1.0});  // eta + eta^5
  const double oracle_val = oracle::dense_abs_max([](double e) { return 20 * e * e * e; }, 2.0);
  CHECK(oracle_val == doctest::Approx(160.0));
  CHECK(curvature_bound(p, 1.0) == doctest::Approx(oracle_val).epsilon(1e-12));
  try {
    curvature_bound(NL::power(1.5, 1), 1.0);
    FAIL("expected CurvatureUnavailable");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::CurvatureUnavailable);
  }
  const auto a = NL::sublinear_atan(1.0);
  for (double R : {0.1, 0.2, 1.0, 5.0}) {
    const double o = oracle::dense_abs_max([&](double e) { return a.d2w(e); }, 2 * R);
    CHECK(curvature_bound(a, R) == doctest::Approx(o).epsilon(1e-8));
  }
}

TEST_CASE("bounds are nondecreasing in R and satisfy the mean value estimate") {
  std::mt19937_64 rng(17);
  for (const auto& nl : presets()) {
    double prevM = 0, prevN = 0;
    for (double R = 0.05; R < 4.0; R *= 1.3) {
      const double M = stiffness_bound(nl, R);
      CHECK(M >= prevM);
      prevM = M;
      if (nl.has_curvature()) {
        const double N = curvature_bound(nl, R);
        CHECK(N >= prevN * (1 - 1e-12));
        prevN = N;
      }
      std::uniform_real_distribution<double> d(-2 * R, 2 * R);
      for (int i = 0; i < 50; ++i) {
        const double a = d(rng), b = d(rng);
        CHECK(std::abs(nl.w(a) - nl.w(b)) <= M * std::abs(a - b) * (1 + 1e-12) + 1e-300);
      }
    }
  }
}

TEST_CASE("check_sublinear") {
  const auto atan = check_sublinear(NL::sublinear_atan(1.0));
  CHECK(atan.holds);
  CHECK(atan.certified);
  CHECK(atan.a == 0.0);
  CHECK(atan.b == doctest::Approx(M_PI / 2));
  CHECK_FALSE(check_sublinear(NL::cubic()).holds);
  const auto lin = check_sublinear(NL::linear());
  CHECK(lin.holds);
  CHECK(lin.a == 1.0);
  CHECK(lin.b == 0.0);

  const auto poly_lin = check_sublinear(NL::polynomial({2.0}));
  CHECK(poly_lin.holds);
  CHECK_FALSE(poly_lin.certified);
  CHECK(poly_lin.probe_range == 1e6);
  CHECK(poly_lin.a == doctest::Approx(2.0));
  CHECK_FALSE(check_sublinear(NL::polynomial({1.0, 0.1})).holds);

  // The returned bound holds on a probe set.
  for (double e = -50; e <= 50; e += 0.37)
    CHECK(std::abs(NL::sublinear_atan(1.0).w(e)) <= atan.a * std::abs(e) + atan.b);
}

TEST_CASE("check_power_global") {
  const auto v3 = check_power_global(NL::power(3.0, 1));
  CHECK(v3.holds);
  CHECK(v3.q == doctest::Approx(4.0 / 3.0));
  const auto v5 = check_power_global(NL::power(5.0, 1));
  CHECK_FALSE(v5.holds);
  CHECK(v5.q == doctest::Approx(6.0 / 5.0));
  const auto v1 = check_power_global(NL::linear());
  CHECK(v1.holds);
  CHECK(v1.q == 2.0);
  CHECK(check_power_global(NL::cubic()).holds);
  CHECK(check_power_global(NL::sublinear_atan(1.0)).holds);
  CHECK_FALSE(check_power_global(NL::polynomial({1.0, 1.0})).holds);
  try {
    check_power_global(NL::power(3.0, -1));
    FAIL("expected NegativePotential");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NegativePotential);
  }
}

TEST_CASE("check_blowup_hypothesis") {
  // Probe-set oracle for eta w <= 2(1 + 2 nu) W.
  auto probe = [](const NL& nl, double nu) {
    for (int i = -2000; i <= 2000; ++i) {
      const double e = i / 100.0;
      const double lhs = e * nl.w(e), rhs = 2 * (1 + 2 * nu) * nl.W(e);
      if (lhs > rhs + 1e-12 * std::max(std::abs(lhs), std::abs(rhs))) return false;
    }
    return true;
  };
  const auto neg = NL::power(3.0, -1);
  CHECK(probe(neg, 0.5));
  CHECK(check_blowup_hypothesis(neg, 0.5).holds);
  CHECK(check_blowup_hypothesis(neg, 0.5).certified);
  CHECK_FALSE(probe(neg, 1.0));
  CHECK_FALSE(check_blowup_hypothesis(neg, 1.0).holds);
  for (double nu : {0.01, 0.5, 3.0}) {
    CHECK(probe(NL::linear(), nu));
    CHECK(check_blowup_hypothesis(NL::linear(), nu).holds);
  }
  CHECK(check_blowup_hypothesis(NL::cubic(), 0.5).holds);
  CHECK_FALSE(check_blowup_hypothesis(NL::cubic(), 0.4).holds);
  const auto atan = NL::sublinear_atan(1.0);
  CHECK(check_blowup_hypothesis(atan, 0.5).holds == probe(atan, 0.5));
  CHECK_FALSE(check_blowup_hypothesis(atan, 0.5).certified);
  CHECK_THROWS_AS(check_blowup_hypothesis(neg, 0.0), Error);
}

TEST_CASE("general force envelopes") {
  Grid<double> g(8.0, 128);
  const auto alpha = KernelSpec<double>::boxcar(1.0, 0.5);
  const auto sep = separable_force(alpha, NL::cubic());
  CHECK(verify_general_force(sep, g, 1.0).ok());

  GeneralForce<double> f;
  f.f = [alpha](double z, double e) { return alpha(z) * (e + e * e * e) / (1 + e * e); };
  f.envelope_1 = [alpha](double R, double z) { return (2 * R + 8 * R * R * R) * alpha(z); };
  f.envelope_2 = [alpha](double, double z) { return alpha(z) * 1.0; };
  f.support_radius = 1.0;
  for (double R : {0.5, 1.0, 3.0}) CHECK(verify_general_force(f, g, R).ok());

  GeneralForce<double> bad = f;
  bad.envelope_1 = [alpha](double, double z) { return 0.1 * alpha(z); };
  CHECK_FALSE(verify_general_force(bad, g, 1.0).envelope_1);
  bad.f = [alpha](double z, double e) { return alpha(z) * (e + 1.0); };
  CHECK_FALSE(verify_general_force(bad, g, 1.0).zero_at_rest);
}
