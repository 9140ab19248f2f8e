#include <doctest.h>

#include "oracles.hpp"
#include "peri/kernel.hpp"

#include <cstdio>
#include <fstream>
#include <random>

using namespace peri;

namespace {

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

TEST_CASE("kernel construction examples") {
  Grid<double> g8(8.0, 256);
  auto box = make_kernel(KernelSpec<double>::boxcar(1.0, 0.5), g8);
  CHECK(std::abs(box.l1_norm() - 1.0) <= g8.dx());
  CHECK(box.nonnegative());
  CHECK(box.mass() == box.l1_norm());
  // dx = 1/16: offsets +-16 sit on the edge and get half weight.
  CHECK(box.samples()[16] == 0.25);
  CHECK(box.samples()[15] == 0.5);
  CHECK(box.samples()[17] == 0.0);
  CHECK(box.window() == 16);

  Grid<double> g10(10.0, 256);
  auto gauss = make_kernel(KernelSpec<double>::gaussian(1.0, 1.0), g10);
  CHECK(std::abs(gauss.mass() - std::sqrt(M_PI)) <= 1e-6);
  CHECK(gauss.full());
}

TEST_CASE("wrapped samples are exactly even") {
  Grid<double> g(12.0, 200);
  std::vector<KernelSpec<double>> specs = {
      KernelSpec<double>::gaussian(1.3, 0.7), KernelSpec<double>::exponential(0.4, 2.0),
      KernelSpec<double>::boxcar(2.5, 1.0), KernelSpec<double>::triangle(3.1, 0.2),
      KernelSpec<double>::from_table({{-1.0, 0.0}, {-0.5, 1.0}, {0.0, 2.0}, {0.5, 1.0}, {1.0, 0.0}})};
  for (const auto& spec : specs) {
    const auto k = make_kernel(spec, g);
    const Index n = g.size();
    for (Index j = 1; j < n; ++j) CHECK(k.samples()[j] == k.samples()[n - j]);
    CHECK(k.l1_norm() > 0);
    if (k.nonnegative()) CHECK(k.mass() == k.l1_norm());
  }
}

TEST_CASE("kernel errors") {
  Grid<double> g(3.0, 64);
  CHECK(code_of([&] { make_kernel(KernelSpec<double>::gaussian(1.0, 1.0), g); }) == Errc::TailTooHeavy);
  CHECK(code_of([&] { make_kernel(KernelSpec<double>::boxcar(4.0, 1.0), g); }) == Errc::TailTooHeavy);
  CHECK(code_of([&] { make_kernel(KernelSpec<double>::boxcar(-1.0, 1.0), g); }) == Errc::NonPositiveScale);
  CHECK(code_of([&] { make_kernel(KernelSpec<double>::gaussian(0.0, 1.0), g); }) == Errc::NonPositiveScale);
  CHECK(code_of([&] {
          make_kernel(KernelSpec<double>::from_table({{-1.0, 1.0}, {0.0, 2.0}, {1.0, 1.5}}), g);
        }) == Errc::NotEven);
  CHECK(code_of([&] {
          make_kernel(KernelSpec<double>::from_table({{-1.0, 1.0}, {0.0, 2.0}, {0.7, 1.0}}), g);
        }) == Errc::NotEven);

  // A truncated gaussian is compact and passes the tail guard.
  auto spec = KernelSpec<double>::gaussian(1.0, 1.0);
  spec.support_radius = 2.5;
  CHECK_NOTHROW(make_kernel(spec, g));
}

TEST_CASE("kernel table from CSV") {
  const std::string path = "kernel_table_test.csv";
  {
    std::ofstream out(path);
    out << "offset,value\n-1,0\n-0.5,0.5\n0,1\n0.5,0.5\n1,0\n";
  }
  auto rows = load_kernel_table<double>(path);
  REQUIRE(rows.size() == 5);
  Grid<double> g(4.0, 64);
  auto k = make_kernel(KernelSpec<double>::from_table(rows), g);
  // Hat function of height 1 and half-width 1.
  CHECK(k.mass() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(k.at_offset(4) == doctest::Approx(0.5));
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_kernel_table<double>("does/not/exist.csv"), Error);
}

TEST_CASE("convolve examples") {
  Grid<double> g(8.0, 256);
  auto box = make_kernel(KernelSpec<double>::boxcar(1.0, 0.5), g);
  Vector<double> zero = Vector<double>::Zero(g.size());
  for (auto be : {ConvolutionBackend::direct, ConvolutionBackend::transform}) {
    CHECK(convolve(box, zero, be).cwiseAbs().maxCoeff() == 0.0);
    Vector<double> one = Vector<double>::Ones(g.size());
    const auto c = convolve(box, one, be);
    CHECK((c.array() - box.mass()).abs().maxCoeff() <= 1e-14);
  }
  CHECK_THROWS_AS(convolve(box, Vector<double>::Zero(10)), Error);
}

TEST_CASE("gaussian convolution acts as the continuum Fourier multiplier") {
  Grid<double> g(10.0, 256);
  const auto spec = KernelSpec<double>::gaussian(1.0, 1.0);
  auto k = make_kernel(spec, g);
  for (Index mode : {1, 7, 20}) {
    const double xi = M_PI * double(mode) / g.half_length();
    const double mult = oracle::multiplier_quadrature([&](double y) { return spec(y); }, xi, 12.0);
    for (auto be : {ConvolutionBackend::direct, ConvolutionBackend::transform}) {
      const auto c = cosine_mode(g, mode, 1.0);
      const auto s = sine_mode(g, mode, 1.0);
      CHECK((convolve(k, c, be) - mult * c).cwiseAbs().maxCoeff() <= 1e-8);
      CHECK((convolve(k, s, be) - mult * s).cwiseAbs().maxCoeff() <= 1e-8);
    }
    CHECK(std::abs(k.multiplier(xi) - mult) <= 1e-8);
  }
}

TEST_CASE("direct convolution equals the brute-force sum") {
  std::mt19937_64 rng(5);
  Grid<double> g(6.0, 96);
  const auto spec = KernelSpec<double>::triangle(1.7, 0.8);
  auto k = make_kernel(spec, g);
  const auto f = oracle::random_field(g.size(), 1.0, rng);
  const auto ref = oracle::brute_convolve([&](double y) { return spec(y); }, f, 6.0);
  CHECK((convolve(k, f, ConvolutionBackend::direct) - ref).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("convolution inequalities") {
  std::mt19937_64 rng(9);
  Grid<double> g(10.0, 128);
  std::vector<Kernel<double>> ks = {make_kernel(KernelSpec<double>::gaussian(1.0, 1.0), g),
                                    make_kernel(KernelSpec<double>::boxcar(1.5, 0.3), g),
                                    make_kernel(KernelSpec<double>::exponential(0.3, 2.0), g)};
  for (const auto& k : ks) {
    for (int trial = 0; trial < 20; ++trial) {
      const auto f = oracle::random_field(g.size(), 2.0, rng);
      const auto c = convolve(k, f);
      for (auto kind : {l1_norm(), l2_norm(), sup_norm()})
        CHECK(norm(g, c, kind) <= k.l1_norm() * norm(g, f, kind) * (1 + 1e-12));
      for (double s : {0.0, 0.5, 1.0, 2.0})
        CHECK(norm(g, c, hs_norm(s)) <= k.l1_norm() * norm(g, f, hs_norm(s)) * (1 + 1e-12));
    }
  }
}

TEST_CASE("convolution commutes with shifts") {
  std::mt19937_64 rng(21);
  Grid<double> g(10.0, 128);
  for (const auto& spec : {KernelSpec<double>::gaussian(1.0, 1.0), KernelSpec<double>::boxcar(1.0, 0.5)}) {
    auto k = make_kernel(spec, g);
    const auto f = oracle::random_field(g.size(), 1.0, rng);
    for (Index s : {1, 17, -40}) {
      CHECK(convolve(k, shift(f, s), ConvolutionBackend::direct) ==
            shift(convolve(k, f, ConvolutionBackend::direct), s));
      const auto a = convolve(k, shift(f, s));
      const auto b = shift(convolve(k, f), s);
      CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12 * b.cwiseAbs().maxCoeff());
    }
  }
}

TEST_CASE("direct and transform backends agree") {
  std::mt19937_64 rng(13);
  for (Index n : {16, 64, 256, 1024}) {
    Grid<double> g(10.0, n);
    for (const auto& spec : {KernelSpec<double>::gaussian(1.0, 1.0), KernelSpec<double>::boxcar(2.0, 0.5),
                             KernelSpec<double>::exponential(0.3, 1.0)}) {
      auto k = make_kernel(spec, g);
      for (int trial = 0; trial < 5; ++trial) {
        const auto f = oracle::random_field(n, 1.0, rng);
        const auto a = convolve(k, f, ConvolutionBackend::direct);
        const auto b = convolve(k, f, ConvolutionBackend::transform);
        CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12 * a.cwiseAbs().maxCoeff());
      }
    }
  }
}
