#pragma once

#include "peri/core.hpp"
#include "peri/fft.hpp"
#include "peri/kernel.hpp"
#include "peri/model.hpp"

#include <cmath>
#include <optional>

namespace peri {

enum class RhsMode { direct, cubic_fast, general };

inline const char* to_string(RhsMode m) {
  switch (m) {
    case RhsMode::direct: return "direct";
    case RhsMode::cubic_fast: return "cubic_fast";
    case RhsMode::general: return "general";
  }
  return "unknown";
}

/// The nonlocal force (Ku)(x) = integral of alpha(y - x) w(u(y) - u(x)) dy on the grid.
template <typename Scalar = double>
class ForceEvaluator {
 public:
  static ForceEvaluator direct(Kernel<Scalar> kernel, Nonlinearity<Scalar> nl) {
    return ForceEvaluator(RhsMode::direct, std::move(kernel), std::move(nl));
  }

  /// Convolution form of the cubic law:
  ///   K u = alpha*u^3 - 3u (alpha*u^2) + 3u^2 (alpha*u) - A u^3.
  /// Also accepts power(3, -1), which is the same expression negated.
  static ForceEvaluator cubic_fast(Kernel<Scalar> kernel, Nonlinearity<Scalar> nl, bool dealias = false) {
    const bool cubic = nl.family() == NonlinearityFamily::cubic ||
                       (nl.family() == NonlinearityFamily::power && nl.nu() == Scalar(3));
    if (!cubic) throw Error(Errc::WrongNonlinearity, "cubic_fast needs w = +-eta^3");
    ForceEvaluator ev(RhsMode::cubic_fast, std::move(kernel), std::move(nl));
    if (dealias) {
      Grid<Scalar> fine(ev.grid_.half_length(), 2 * ev.grid_.size());
      ev.fine_kernel_ = make_kernel(ev.kernel_->spec(), fine);
    }
    return ev;
  }

  /// cubic_fast for the cubic law, direct otherwise.
  static ForceEvaluator automatic(Kernel<Scalar> kernel, Nonlinearity<Scalar> nl) {
    if (nl.family() == NonlinearityFamily::cubic) return cubic_fast(std::move(kernel), std::move(nl));
    return direct(std::move(kernel), std::move(nl));
  }

  static ForceEvaluator general(const Grid<Scalar>& grid, GeneralForce<Scalar> force) {
    if (!force.f || !force.envelope_1 || !force.envelope_2)
      throw Error(Errc::InvalidParameter, "general force needs f and both envelopes");
    ForceEvaluator ev(grid);
    ev.mode_ = RhsMode::general;
    const Scalar r = force.support_radius;
    ev.window_ = grid.size() / 2;
    if (std::isfinite(static_cast<double>(r)))
      ev.window_ = std::min<Index>(grid.size() / 2, static_cast<Index>(std::floor(r / grid.dx() + 1e-9)));
    ev.force_ = std::move(force);
    return ev;
  }

  RhsMode mode() const { return mode_; }
  const Grid<Scalar>& grid() const { return grid_; }
  bool has_kernel() const { return kernel_.has_value(); }
  const Kernel<Scalar>& kernel() const { return *kernel_; }
  const Nonlinearity<Scalar>& nonlinearity() const { return *nl_; }
  const GeneralForce<Scalar>& general_force() const { return *force_; }
  bool dealiased() const { return fine_kernel_.has_value(); }

  Vector<Scalar> operator()(const Vector<Scalar>& u) const {
    switch (mode_) {
      case RhsMode::direct: return apply_direct(u);
      case RhsMode::cubic_fast: return apply_cubic_fast(u);
      case RhsMode::general: return apply_general(u);
    }
    return {};
  }

  /// dx * sum_j alpha(x_j - x_i) w(u_j - u_i), windowed to the kernel support.
  Vector<Scalar> apply_direct(const Vector<Scalar>& u) const {
    check(u);
    const Index n = grid_.size();
    const auto& k = *kernel_;
    const auto& nl = *nl_;
    Vector<Scalar> out(n);
    for (Index i = 0; i < n; ++i) {
      Scalar acc(0);
      const Scalar ui = u[i];
      k.for_each_offset([&](Index m, Scalar a) { acc += a * nl.w(u[((i + m) % n + n) % n] - ui); });
      out[i] = acc * grid_.dx();
    }
    return out;
  }

  Vector<Scalar> apply_cubic_fast(const Vector<Scalar>& u) const {
    check(u);
    if (mode_ != RhsMode::cubic_fast)
      throw Error(Errc::WrongNonlinearity, "evaluator was not built for the cubic fast path");
    const Scalar sign = Scalar(nl_->sign());
    if (fine_kernel_) return sign * dealiased_cubic(u);
    const auto& k = *kernel_;
    const Vector<Scalar> u2 = u.cwiseProduct(u);
    const Vector<Scalar> u3 = u2.cwiseProduct(u);
    const Vector<Scalar> c1 = convolve(k, u);
    const Vector<Scalar> c2 = convolve(k, u2);
    const Vector<Scalar> c3 = convolve(k, u3);
    Vector<Scalar> out = c3 - Scalar(3) * u.cwiseProduct(c2) + Scalar(3) * u2.cwiseProduct(c1) - k.mass() * u3;
    return sign * out;
  }

  /// dx * sum_j f(x_j - x_i, u_j - u_i), windowed to the first envelope's support.
  Vector<Scalar> apply_general(const Vector<Scalar>& u) const {
    check(u);
    if (mode_ != RhsMode::general) throw Error(Errc::InvalidParameter, "no general force configured");
    const Index n = grid_.size();
    Index lo = -window_, hi = window_;
    if (2 * window_ + 1 > n) {
      lo = -(n / 2 - 1);
      hi = n / 2;
    }
    // Offsets landing exactly on a finite support edge get half weight, as for kernels.
    const Scalar r = force_->support_radius;
    auto weight = [&](Index m) {
      const Scalar y = std::abs(Scalar(m) * grid_.dx());
      return std::isfinite(static_cast<double>(r)) && std::abs(y - r) <= Scalar(1e-12) * r ? Scalar(0.5) : Scalar(1);
    };
    Vector<Scalar> out(n);
    for (Index i = 0; i < n; ++i) {
      Scalar acc(0);
      for (Index m = lo; m <= hi; ++m)
        acc += weight(m) * (*force_)(Scalar(m) * grid_.dx(), u[((i + m) % n + n) % n] - u[i]);
      out[i] = acc * grid_.dx();
    }
    return out;
  }

  /// Factor entering J1: M(R)||alpha||_1, replaced by ||Lambda_1^R||_1 for a general force.
  Scalar growth_constant(Scalar R) const {
    if (mode_ == RhsMode::general) return envelope_l1(grid_, force_->envelope_1, R);
    return stiffness_bound(*nl_, R) * kernel_->l1_norm();
  }

  /// Factor entering J2: M(R)||alpha||_1, replaced by ||Lambda_2^R||_1 for a general force.
  Scalar lipschitz_constant(Scalar R) const {
    if (mode_ == RhsMode::general) return envelope_l1(grid_, force_->envelope_2, R);
    return stiffness_bound(*nl_, R) * kernel_->l1_norm();
  }

 private:
  ForceEvaluator(RhsMode mode, Kernel<Scalar> kernel, Nonlinearity<Scalar> nl)
      : mode_(mode), grid_(kernel.grid()), kernel_(std::move(kernel)), nl_(std::move(nl)) {}
  explicit ForceEvaluator(const Grid<Scalar>& grid) : mode_(RhsMode::general), grid_(grid) {}

  void check(const Vector<Scalar>& u) const {
    if (u.size() != grid_.size()) throw Error(Errc::LengthMismatch, "field length differs from grid");
  }

  // Powers and products on a 2x zero-padded grid, truncated back to the coarse band.
  Vector<Scalar> dealiased_cubic(const Vector<Scalar>& u) const {
    const Index n = grid_.size();
    const Index nf = 2 * n;
    const auto U = fft::forward<Scalar>(u);
    fft::Spectrum<Scalar> Uf = fft::Spectrum<Scalar>::Zero(nf);
    for (Index k = 0; k < n; ++k) {
      const Index s = fft::signed_mode(k, n);
      if (s == n / 2) {
        Uf[n / 2] += U[k];
        Uf[nf - n / 2] += U[k];
      } else {
        Uf[(s + nf) % nf] = Scalar(2) * U[k];
      }
    }
    const Vector<Scalar> uf = fft::inverse_real<Scalar>(Uf);
    const auto& kf = *fine_kernel_;
    const Vector<Scalar> u2 = uf.cwiseProduct(uf);
    const Vector<Scalar> u3 = u2.cwiseProduct(uf);
    const Vector<Scalar> c1 = convolve(kf, uf);
    const Vector<Scalar> c2 = convolve(kf, u2);
    const Vector<Scalar> c3 = convolve(kf, u3);
    const Vector<Scalar> kfine =
        c3 - Scalar(3) * uf.cwiseProduct(c2) + Scalar(3) * u2.cwiseProduct(c1) - kf.mass() * u3;
    const auto F = fft::forward<Scalar>(kfine);
    fft::Spectrum<Scalar> C(n);
    for (Index k = 0; k < n; ++k) {
      const Index s = fft::signed_mode(k, n);
      if (s == n / 2) {
        C[k] = Scalar(0.5) * (F[n / 2] + F[nf - n / 2]);
      } else {
        C[k] = Scalar(0.5) * F[(s + nf) % nf];
      }
    }
    return fft::inverse_real<Scalar>(C);
  }

  RhsMode mode_;
  Grid<Scalar> grid_;
  std::optional<Kernel<Scalar>> kernel_;
  std::optional<Kernel<Scalar>> fine_kernel_;
  std::optional<Nonlinearity<Scalar>> nl_;
  std::optional<GeneralForce<Scalar>> force_;
  Index window_ = 0;
};

/// A-priori sup bound of K over the R-ball: 2 M(R) ||alpha||_1 R, or ||Lambda_1^R||_1
/// for a general force.
template <typename Scalar>
Scalar force_bound(const ForceEvaluator<Scalar>& ev, Scalar R) {
  if (!(R > Scalar(0))) throw Error(Errc::InvalidParameter, "R must be positive");
  if (ev.mode() == RhsMode::general) return envelope_l1(ev.grid(), ev.general_force().envelope_1, R);
  return Scalar(2) * stiffness_bound(ev.nonlinearity(), R) * ev.kernel().l1_norm() * R;
}

}  // namespace peri
