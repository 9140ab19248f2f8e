#pragma once

#include "peri/core.hpp"
#include "peri/fft.hpp"
#include "peri/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace peri {

enum class KernelFamily { gaussian, exponential, boxcar, triangle, table };

inline const char* to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::gaussian: return "gaussian";
    case KernelFamily::exponential: return "exponential";
    case KernelFamily::boxcar: return "boxcar";
    case KernelFamily::triangle: return "triangle";
    case KernelFamily::table: return "table";
  }
  return "unknown";
}

/// Even micromodulus alpha(y). Every family is evaluated through |y| only.
///
///   gaussian     c exp(-y^2 / delta^2)
///   exponential  c exp(-|y| / delta)
///   boxcar       c on |y| < delta
///   triangle     c (1 - |y|/delta) on |y| < delta
///   table        piecewise linear through (offset, value) pairs, zero outside
///
/// `support_radius` truncates a family to |y| <= radius. Without it gaussian and
/// exponential are infinite-support, boxcar and triangle stop at delta, and a table stops
/// at its largest offset.
template <typename Scalar = double>
struct KernelSpec {
  KernelFamily family = KernelFamily::gaussian;
  Scalar scale = Scalar(1);
  Scalar amplitude = Scalar(1);
  std::optional<Scalar> support_radius;
  std::vector<std::pair<Scalar, Scalar>> table;

  static KernelSpec gaussian(Scalar delta, Scalar c) { return {KernelFamily::gaussian, delta, c, {}, {}}; }
  static KernelSpec exponential(Scalar delta, Scalar c) { return {KernelFamily::exponential, delta, c, {}, {}}; }
  static KernelSpec boxcar(Scalar delta, Scalar c) { return {KernelFamily::boxcar, delta, c, {}, {}}; }
  static KernelSpec triangle(Scalar delta, Scalar c) { return {KernelFamily::triangle, delta, c, {}, {}}; }
  static KernelSpec from_table(std::vector<std::pair<Scalar, Scalar>> rows) {
    KernelSpec s;
    s.family = KernelFamily::table;
    s.table = std::move(rows);
    return s;
  }

  Scalar support() const {
    Scalar natural = std::numeric_limits<Scalar>::infinity();
    switch (family) {
      case KernelFamily::boxcar:
      case KernelFamily::triangle: natural = scale; break;
      case KernelFamily::table: natural = table.empty() ? Scalar(0) : std::abs(table.back().first); break;
      default: break;
    }
    return support_radius ? std::min(*support_radius, natural) : natural;
  }

  // Continuum value; no half weighting at the support edge.
  Scalar operator()(Scalar y) const {
    const Scalar r = std::abs(y);
    if (r > support()) return Scalar(0);
    switch (family) {
      case KernelFamily::gaussian: return amplitude * std::exp(-(r * r) / (scale * scale));
      case KernelFamily::exponential: return amplitude * std::exp(-r / scale);
      case KernelFamily::boxcar: return amplitude;
      case KernelFamily::triangle: return amplitude * (Scalar(1) - r / scale);
      case KernelFamily::table: return interpolate_table(r);
    }
    return Scalar(0);
  }

 private:
  // Table rows are sorted by offset and symmetric; interpolate on the nonnegative half.
  Scalar interpolate_table(Scalar r) const {
    auto it = std::lower_bound(table.begin(), table.end(), r,
                               [](const auto& row, Scalar v) { return row.first < v; });
    if (it == table.end()) return Scalar(0);
    if (it->first == r || it == table.begin()) return it->second;
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    const Scalar w = (r - lo.first) / (hi.first - lo.first);
    return lo.second + w * (hi.second - lo.second);
  }
};

/// Two-column CSV (offset, value). Lines starting with '#' and a non-numeric header are skipped.
template <typename Scalar = double>
std::vector<std::pair<Scalar, Scalar>> load_kernel_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::InvalidParameter, "cannot open kernel table " + path);
  std::vector<std::pair<Scalar, Scalar>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double a = 0, b = 0;
    if (!(ss >> a >> b)) {
      if (rows.empty()) continue;
      throw Error(Errc::InvalidParameter, "malformed kernel table row: " + line);
    }
    rows.emplace_back(Scalar(a), Scalar(b));
  }
  return rows;
}

enum class ConvolutionBackend { direct, transform };

/// Micromodulus sampled on a periodic grid, wrapped so that samples[j] holds alpha at
/// signed offset j*dx (j <= N/2) or (j - N)*dx.
template <typename Scalar = double>
class Kernel {
 public:
  Kernel(KernelSpec<Scalar> spec, Grid<Scalar> grid, Vector<Scalar> samples, Index window)
      : spec_(std::move(spec)), grid_(grid), samples_(std::move(samples)), window_(window) {
    const Scalar dx = grid_.dx();
    l1_ = samples_.cwiseAbs().sum() * dx;
    mass_ = samples_.sum() * dx;
    nonnegative_ = (samples_.array() >= Scalar(0)).all();
    if (!(l1_ > Scalar(0)) || !std::isfinite(static_cast<double>(l1_)))
      throw Error(Errc::InvalidParameter, "kernel has zero or non-finite l1 norm on this grid");
    const auto S = fft::forward<Scalar>(samples_);
    spectrum_ = S.real() * dx;
  }

  const KernelSpec<Scalar>& spec() const { return spec_; }
  const Grid<Scalar>& grid() const { return grid_; }
  const Vector<Scalar>& samples() const { return samples_; }
  Scalar l1_norm() const { return l1_; }
  Scalar mass() const { return mass_; }
  bool nonnegative() const { return nonnegative_; }

  // dx * DFT(samples); real because the samples are even.
  const Vector<Scalar>& spectrum() const { return spectrum_; }

  // Half-width in grid points of the nonzero stencil; full() means every offset.
  Index window() const { return window_; }
  bool full() const { return 2 * window_ + 1 > grid_.size(); }

  Scalar at_offset(Index m) const {
    const Index n = grid_.size();
    return samples_[((m % n) + n) % n];
  }

  /// Calls f(m, alpha_m) for every signed offset m of the stencil in increasing order.
  /// The order is relative to the output point, which keeps direct sums exactly
  /// shift-equivariant.
  template <typename F>
  void for_each_offset(F&& f) const {
    const Index n = grid_.size();
    Index lo = -window_, hi = window_;
    if (full()) {
      lo = -(n / 2 - 1);
      hi = n / 2;
    }
    for (Index m = lo; m <= hi; ++m) f(m, at_offset(m));
  }

  /// Discrete Fourier multiplier dx * sum_j alpha(y_j) cos(xi y_j).
  Scalar multiplier(Scalar xi) const {
    Scalar acc(0);
    for (Index j = 0; j < samples_.size(); ++j)
      acc += samples_[j] * std::cos(xi * Scalar(grid_.wrapped_offset(j)) * grid_.dx());
    return acc * grid_.dx();
  }

 private:
  KernelSpec<Scalar> spec_;
  Grid<Scalar> grid_;
  Vector<Scalar> samples_;
  Vector<Scalar> spectrum_;
  Index window_;
  Scalar l1_ = 0;
  Scalar mass_ = 0;
  bool nonnegative_ = true;
};

namespace detail {

template <typename Scalar>
void validate_table(std::vector<std::pair<Scalar, Scalar>>& rows) {
  if (rows.size() < 2) throw Error(Errc::InvalidParameter, "kernel table needs at least two rows");
  std::sort(rows.begin(), rows.end());
  const std::size_t n = rows.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = rows[i];
    const auto& b = rows[n - 1 - i];
    const Scalar tol = Scalar(1e-12) * std::max(Scalar(1), std::abs(a.first));
    if (std::abs(a.first + b.first) > tol)
      throw Error(Errc::NotEven, "kernel table offsets are not symmetric about 0");
    const Scalar vtol = Scalar(1e-12) * std::max(std::abs(a.second), std::abs(b.second));
    if (std::abs(a.second - b.second) > vtol)
      throw Error(Errc::NotEven, "kernel table values are not even");
  }
  // Keep only the nonnegative half for interpolation.
  std::vector<std::pair<Scalar, Scalar>> half;
  for (const auto& r : rows)
    if (r.first >= Scalar(0)) half.push_back(r);
  if (half.front().first != Scalar(0)) half.insert(half.begin(), {Scalar(0), rows[n / 2].second});
  rows = std::move(half);
}

// Fraction of |alpha| mass beyond |y| > L for the infinite-support families.
template <typename Scalar>
Scalar tail_fraction(const KernelSpec<Scalar>& spec, Scalar L) {
  switch (spec.family) {
    case KernelFamily::gaussian: return std::erfc(L / spec.scale);
    case KernelFamily::exponential: return std::exp(-L / spec.scale);
    default: return Scalar(0);
  }
}

}  // namespace detail

inline constexpr double kTailTolerance = 1e-12;

/// Samples alpha on the grid. A grid point exactly on the edge of a compact support
/// receives half weight.
template <typename Scalar>
Kernel<Scalar> make_kernel(KernelSpec<Scalar> spec, const Grid<Scalar>& grid) {
  if (spec.family == KernelFamily::table) {
    detail::validate_table(spec.table);
  } else {
    if (!(spec.scale > Scalar(0))) throw Error(Errc::NonPositiveScale, "kernel scale must be positive");
    if (!(spec.amplitude > Scalar(0)))
      throw Error(Errc::InvalidParameter, "kernel amplitude must be positive");
  }
  if (spec.support_radius && !(*spec.support_radius > Scalar(0)))
    throw Error(Errc::NonPositiveScale, "support radius must be positive");

  const Scalar L = grid.half_length();
  const Scalar dx = grid.dx();
  const Scalar radius = spec.support();
  const bool compact = std::isfinite(static_cast<double>(radius));

  if (compact) {
    if (radius > L * (Scalar(1) + Scalar(1e-12)))
      throw Error(Errc::TailTooHeavy, "kernel support exceeds the half-domain");
  } else if (detail::tail_fraction(spec, L) >= Scalar(kTailTolerance)) {
    throw Error(Errc::TailTooHeavy, "kernel tail beyond the half-domain is not negligible");
  }

  const Index n = grid.size();
  Vector<Scalar> samples(n);
  const bool half_edge = spec.family != KernelFamily::table;
  for (Index j = 0; j < n; ++j) {
    const Scalar y = std::abs(Scalar(std::min(j, n - j)) * dx);
    Scalar a = spec(y);
    if (compact && half_edge && std::abs(y - radius) <= Scalar(1e-12) * radius) a *= Scalar(0.5);
    samples[j] = a;
  }

  Index window = n / 2;
  if (compact) window = std::min<Index>(n / 2, static_cast<Index>(std::floor(radius / dx + 1e-9)));
  return Kernel<Scalar>(std::move(spec), grid, std::move(samples), window);
}

/// Circular convolution dx * sum_j alpha(x_j - x_i) field[j].
template <typename Scalar, typename Derived>
Vector<Scalar> convolve(const Kernel<Scalar>& kernel, const Eigen::MatrixBase<Derived>& field,
                        ConvolutionBackend backend = ConvolutionBackend::transform) {
  const Index n = kernel.grid().size();
  if (field.size() != n) throw Error(Errc::LengthMismatch, "field length differs from kernel grid");
  const Scalar dx = kernel.grid().dx();
  if (backend == ConvolutionBackend::direct) {
    Vector<Scalar> out(n);
    for (Index i = 0; i < n; ++i) {
      Scalar acc(0);
      kernel.for_each_offset([&](Index m, Scalar a) { acc += a * field[((i + m) % n + n) % n]; });
      out[i] = acc * dx;
    }
    return out;
  }
  Vector<Scalar> f = field;
  auto F = fft::forward<Scalar>(f);
  for (Index k = 0; k < n; ++k) F[k] *= kernel.spectrum()[k];
  return fft::inverse_real<Scalar>(F);
}

}  // namespace peri
