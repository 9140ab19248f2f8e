#pragma once

#include "peri/core.hpp"
#include "peri/fft.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <variant>

namespace peri {

/// Uniform periodic grid on [-L, L) with x_i = -L + i*dx.
template <typename Scalar = double>
class Grid {
 public:
  Grid(Scalar half_length, Index n) : half_length_(half_length), n_(n) {
    if (!(half_length > Scalar(0)) || !std::isfinite(static_cast<double>(half_length)))
      throw Error(Errc::InvalidGrid, "half length must be positive and finite");
    if (n < 8) throw Error(Errc::InvalidGrid, "need at least 8 points");
    if (n % 2 != 0) throw Error(Errc::InvalidGrid, "point count must be even");
    dx_ = Scalar(2) * half_length_ / Scalar(n_);
  }

  Scalar half_length() const { return half_length_; }
  Scalar length() const { return Scalar(2) * half_length_; }
  Index size() const { return n_; }
  Scalar dx() const { return dx_; }
  Scalar x(Index i) const { return -half_length_ + Scalar(i) * dx_; }

  Vector<Scalar> points() const {
    Vector<Scalar> xs(n_);
    for (Index i = 0; i < n_; ++i) xs[i] = x(i);
    return xs;
  }

  // Angular wavenumber of DFT bin k.
  Scalar wavenumber(Index k) const {
    return Scalar(M_PI) * Scalar(fft::signed_mode(k, n_)) / half_length_;
  }

  // Signed offset (in grid steps) represented by a wrapped kernel index.
  Index wrapped_offset(Index j) const { return j <= n_ / 2 ? j : j - n_; }

  bool operator==(const Grid& other) const {
    return half_length_ == other.half_length_ && n_ == other.n_;
  }

 private:
  Scalar half_length_;
  Index n_;
  Scalar dx_;
};

/// Displacement u and velocity u_t at time t.
template <typename Scalar = double>
struct State {
  Vector<Scalar> u;
  Vector<Scalar> v;
  Scalar t = Scalar(0);

  bool finite() const { return u.allFinite() && v.allFinite(); }
};

namespace norm_kind {
struct Sup {};
struct Lp {
  double p;
};
struct Hs {
  double s;
};
}  // namespace norm_kind

using NormKind = std::variant<norm_kind::Sup, norm_kind::Lp, norm_kind::Hs>;

inline NormKind sup_norm() { return norm_kind::Sup{}; }
inline NormKind l1_norm() { return norm_kind::Lp{1.0}; }
inline NormKind l2_norm() { return norm_kind::Lp{2.0}; }
inline NormKind lp_norm(double p) { return norm_kind::Lp{p}; }
inline NormKind hs_norm(double s) { return norm_kind::Hs{s}; }

template <typename Scalar>
Scalar sup(const Vector<Scalar>& f) {
  return f.size() == 0 ? Scalar(0) : f.cwiseAbs().maxCoeff();
}

template <typename Scalar>
Scalar lp(const Grid<Scalar>& grid, const Vector<Scalar>& f, Scalar p) {
  if (p == Scalar(1)) return f.cwiseAbs().sum() * grid.dx();
  if (p == Scalar(2)) return std::sqrt(f.squaredNorm() * grid.dx());
  return std::pow(f.cwiseAbs().array().pow(p).sum() * grid.dx(), Scalar(1) / p);
}

template <typename Scalar>
Scalar l2(const Grid<Scalar>& grid, const Vector<Scalar>& f) {
  return lp(grid, f, Scalar(2));
}

// <f, g> with the dx measure.
template <typename Scalar>
Scalar inner(const Grid<Scalar>& grid, const Vector<Scalar>& f, const Vector<Scalar>& g) {
  return f.dot(g) * grid.dx();
}

/// Discrete H^s norm through the Fourier multiplier (1 + xi^2)^s on the grid modes.
/// Scaled by Parseval so that s = 0 reproduces the l2 norm.
template <typename Scalar>
Scalar hs(const Grid<Scalar>& grid, const Vector<Scalar>& f, Scalar s) {
  const auto F = fft::forward<Scalar>(f);
  Scalar acc(0);
  for (Index k = 0; k < F.size(); ++k) {
    const Scalar xi = grid.wavenumber(k);
    acc += std::pow(Scalar(1) + xi * xi, s) * std::norm(F[k]);
  }
  return std::sqrt(acc * grid.dx() / Scalar(grid.size()));
}

template <typename Scalar>
Scalar norm(const Grid<Scalar>& grid, const Vector<Scalar>& f, const NormKind& kind) {
  if (f.size() != grid.size()) throw Error(Errc::LengthMismatch, "field length differs from grid");
  return std::visit(
      [&](const auto& k) -> Scalar {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, norm_kind::Sup>) {
          return sup(f);
        } else if constexpr (std::is_same_v<K, norm_kind::Lp>) {
          return lp(grid, f, Scalar(k.p));
        } else {
          return hs(grid, f, Scalar(k.s));
        }
      },
      kind);
}

/// Circular shift: result[(i + k) mod N] = f[i].
template <typename Derived>
Vector<typename Derived::Scalar> shift(const Eigen::MatrixBase<Derived>& f, Index k) {
  const Index n = f.size();
  Vector<typename Derived::Scalar> out(n);
  if (n == 0) return out;
  const Index s = ((k % n) + n) % n;
  for (Index i = 0; i < n; ++i) out[(i + s) % n] = f[i];
  return out;
}

// Initial-data presets.

template <typename Scalar>
Vector<Scalar> gaussian_bump(const Grid<Scalar>& grid, Scalar amp, Scalar width, Scalar center) {
  Vector<Scalar> f(grid.size());
  for (Index i = 0; i < grid.size(); ++i) {
    const Scalar z = (grid.x(i) - center) / width;
    f[i] = amp * std::exp(-z * z);
  }
  return f;
}

template <typename Scalar>
Vector<Scalar> sine_mode(const Grid<Scalar>& grid, Index mode, Scalar amp) {
  Vector<Scalar> f(grid.size());
  const Scalar xi = Scalar(M_PI) * Scalar(mode) / grid.half_length();
  for (Index i = 0; i < grid.size(); ++i) f[i] = amp * std::sin(xi * grid.x(i));
  return f;
}

template <typename Scalar>
Vector<Scalar> cosine_mode(const Grid<Scalar>& grid, Index mode, Scalar amp) {
  Vector<Scalar> f(grid.size());
  const Scalar xi = Scalar(M_PI) * Scalar(mode) / grid.half_length();
  for (Index i = 0; i < grid.size(); ++i) f[i] = amp * std::cos(xi * grid.x(i));
  return f;
}

/// Random trigonometric polynomial with modes 1..max_mode, amplitude decaying as 1/k,
/// rescaled to sup = amp.
template <typename Scalar>
Vector<Scalar> random_smooth(const Grid<Scalar>& grid, Scalar amp, Index max_mode,
                             std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Vector<Scalar> f = Vector<Scalar>::Zero(grid.size());
  for (Index k = 1; k <= max_mode; ++k) {
    const Scalar a = Scalar(unit(rng)) / Scalar(k);
    const Scalar b = Scalar(unit(rng)) / Scalar(k);
    const Scalar xi = Scalar(M_PI) * Scalar(k) / grid.half_length();
    for (Index i = 0; i < grid.size(); ++i)
      f[i] += a * std::cos(xi * grid.x(i)) + b * std::sin(xi * grid.x(i));
  }
  const Scalar m = sup(f);
  if (m > Scalar(0)) f *= amp / m;
  return f;
}

}  // namespace peri
