#pragma once

#include "peri/core.hpp"
#include "peri/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace peri {

enum class NonlinearityFamily { cubic, power, polynomial, sublinear_atan };

inline const char* to_string(NonlinearityFamily f) {
  switch (f) {
    case NonlinearityFamily::cubic: return "cubic";
    case NonlinearityFamily::power: return "power";
    case NonlinearityFamily::polynomial: return "polynomial";
    case NonlinearityFamily::sublinear_atan: return "sublinear_atan";
  }
  return "unknown";
}

/// Odd constitutive law w with w(0) = 0, its derivatives and its potential
/// W(eta) = integral of w from 0 to eta.
///
///   cubic            w = eta^3
///   power(nu, sign)  w = sign |eta|^(nu-1) eta, nu >= 1
///   polynomial       w = sum_k c_k eta^(2k+1)
///   sublinear_atan   w = a atan(eta)
template <typename Scalar = double>
class Nonlinearity {
 public:
  static Nonlinearity cubic() { return Nonlinearity(NonlinearityFamily::cubic); }

  static Nonlinearity power(Scalar nu, int sign = 1) {
    if (!(nu >= Scalar(1))) throw Error(Errc::InvalidParameter, "power exponent must be >= 1");
    if (sign != 1 && sign != -1) throw Error(Errc::InvalidParameter, "power sign must be +1 or -1");
    Nonlinearity nl(NonlinearityFamily::power);
    nl.nu_ = nu;
    nl.sign_ = sign;
    return nl;
  }

  static Nonlinearity linear() { return power(Scalar(1), 1); }

  // coefficients[k] multiplies eta^(2k+1).
  static Nonlinearity polynomial(std::vector<Scalar> odd_coefficients) {
    if (odd_coefficients.empty())
      throw Error(Errc::InvalidParameter, "polynomial needs at least one coefficient");
    Nonlinearity nl(NonlinearityFamily::polynomial);
    nl.coeffs_ = std::move(odd_coefficients);
    return nl;
  }

  static Nonlinearity sublinear_atan(Scalar a = Scalar(1)) {
    if (!(a > Scalar(0))) throw Error(Errc::InvalidParameter, "atan amplitude must be positive");
    Nonlinearity nl(NonlinearityFamily::sublinear_atan);
    nl.a_ = a;
    return nl;
  }

  NonlinearityFamily family() const { return family_; }
  Scalar nu() const { return family_ == NonlinearityFamily::cubic ? Scalar(3) : nu_; }
  int sign() const { return sign_; }
  Scalar atan_amplitude() const { return a_; }
  const std::vector<Scalar>& coefficients() const { return coeffs_; }

  bool is_linear() const {
    if (family_ == NonlinearityFamily::power) return nu_ == Scalar(1);
    if (family_ == NonlinearityFamily::polynomial)
      return std::all_of(coeffs_.begin() + 1, coeffs_.end(), [](Scalar c) { return c == Scalar(0); });
    return false;
  }

  Scalar w(Scalar eta) const {
    switch (family_) {
      case NonlinearityFamily::cubic: return eta * eta * eta;
      case NonlinearityFamily::power:
        if (nu_ == Scalar(1)) return Scalar(sign_) * eta;
        if (nu_ == Scalar(3)) return Scalar(sign_) * eta * eta * eta;
        return Scalar(sign_) * std::pow(std::abs(eta), nu_ - Scalar(1)) * eta;
      case NonlinearityFamily::polynomial: {
        const Scalar e2 = eta * eta;
        Scalar acc(0);
        for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * e2 + *it;
        return acc * eta;
      }
      case NonlinearityFamily::sublinear_atan: return a_ * std::atan(eta);
    }
    return Scalar(0);
  }

  Scalar dw(Scalar eta) const {
    switch (family_) {
      case NonlinearityFamily::cubic: return Scalar(3) * eta * eta;
      case NonlinearityFamily::power:
        if (nu_ == Scalar(1)) return Scalar(sign_);
        return Scalar(sign_) * nu_ * std::pow(std::abs(eta), nu_ - Scalar(1));
      case NonlinearityFamily::polynomial: {
        const Scalar e2 = eta * eta;
        Scalar acc(0);
        for (std::size_t k = coeffs_.size(); k-- > 0;) acc = acc * e2 + Scalar(2 * k + 1) * coeffs_[k];
        return acc;
      }
      case NonlinearityFamily::sublinear_atan: return a_ / (Scalar(1) + eta * eta);
    }
    return Scalar(0);
  }

  bool has_curvature() const {
    return !(family_ == NonlinearityFamily::power && nu_ > Scalar(1) && nu_ < Scalar(2));
  }

  Scalar d2w(Scalar eta) const {
    switch (family_) {
      case NonlinearityFamily::cubic: return Scalar(6) * eta;
      case NonlinearityFamily::power:
        if (nu_ == Scalar(1)) return Scalar(0);
        if (!has_curvature())
          throw Error(Errc::CurvatureUnavailable, "w'' is singular at 0 for 1 < nu < 2");
        if (eta == Scalar(0)) return Scalar(0);
        return Scalar(sign_) * nu_ * (nu_ - Scalar(1)) * std::pow(std::abs(eta), nu_ - Scalar(3)) * eta;
      case NonlinearityFamily::polynomial: {
        if (coeffs_.size() < 2) return Scalar(0);
        const Scalar e2 = eta * eta;
        Scalar acc(0);
        for (std::size_t k = coeffs_.size(); k-- > 1;)
          acc = acc * e2 + Scalar((2 * k + 1) * (2 * k)) * coeffs_[k];
        return acc * eta;
      }
      case NonlinearityFamily::sublinear_atan: {
        const Scalar d = Scalar(1) + eta * eta;
        return -Scalar(2) * a_ * eta / (d * d);
      }
    }
    return Scalar(0);
  }

  Scalar W(Scalar eta) const {
    switch (family_) {
      case NonlinearityFamily::cubic: {
        const Scalar e2 = eta * eta;
        return e2 * e2 / Scalar(4);
      }
      case NonlinearityFamily::power:
        return Scalar(sign_) * std::pow(std::abs(eta), nu_ + Scalar(1)) / (nu_ + Scalar(1));
      case NonlinearityFamily::polynomial: {
        const Scalar e2 = eta * eta;
        Scalar acc(0);
        for (std::size_t k = coeffs_.size(); k-- > 0;) acc = acc * e2 + coeffs_[k] / Scalar(2 * k + 2);
        return acc * e2;
      }
      case NonlinearityFamily::sublinear_atan:
        return a_ * (eta * std::atan(eta) - Scalar(0.5) * std::log1p(eta * eta));
    }
    return Scalar(0);
  }

 private:
  explicit Nonlinearity(NonlinearityFamily f) : family_(f) {}

  NonlinearityFamily family_;
  Scalar nu_ = Scalar(3);
  int sign_ = 1;
  Scalar a_ = Scalar(1);
  std::vector<Scalar> coeffs_;
};

namespace detail {

/// max |g| over [-h, h]: 10^4 uniform probes, then golden-section refinement around the
/// best probe.
template <typename Scalar, typename G>
Scalar sampled_abs_max(G&& g, Scalar h) {
  constexpr Index probes = 10000;
  const Scalar step = Scalar(2) * h / Scalar(probes);
  Index best = 0;
  Scalar best_val(-1);
  for (Index i = 0; i <= probes; ++i) {
    const Scalar v = std::abs(g(-h + Scalar(i) * step));
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  Scalar a = -h + Scalar(std::max<Index>(best - 1, 0)) * step;
  Scalar b = -h + Scalar(std::min<Index>(best + 1, probes)) * step;
  const Scalar ratio = Scalar(0.5) * (std::sqrt(Scalar(5)) - Scalar(1));
  Scalar c = b - ratio * (b - a), d = a + ratio * (b - a);
  for (int it = 0; it < 100 && (b - a) > Scalar(1e-15) * std::max(Scalar(1), h); ++it) {
    if (std::abs(g(c)) > std::abs(g(d))) {
      b = d;
    } else {
      a = c;
    }
    c = b - ratio * (b - a);
    d = a + ratio * (b - a);
  }
  return std::max(best_val, std::abs(g(Scalar(0.5) * (a + b))));
}

}  // namespace detail

/// M(R) = max over |eta| <= 2R of |w'(eta)|.
template <typename Scalar>
Scalar stiffness_bound(const Nonlinearity<Scalar>& nl, Scalar R) {
  if (!(R > Scalar(0))) throw Error(Errc::InvalidParameter, "R must be positive");
  const Scalar h = Scalar(2) * R;
  switch (nl.family()) {
    case NonlinearityFamily::cubic: return Scalar(3) * h * h;
    case NonlinearityFamily::power:
      return nl.nu() == Scalar(1) ? Scalar(1) : nl.nu() * std::pow(h, nl.nu() - Scalar(1));
    case NonlinearityFamily::sublinear_atan: return nl.atan_amplitude();
    case NonlinearityFamily::polynomial:
      return detail::sampled_abs_max([&](Scalar e) { return nl.dw(e); }, h);
  }
  return Scalar(0);
}

/// N(R) = max over |eta| <= 2R of |w''(eta)|.
template <typename Scalar>
Scalar curvature_bound(const Nonlinearity<Scalar>& nl, Scalar R) {
  if (!(R > Scalar(0))) throw Error(Errc::InvalidParameter, "R must be positive");
  if (!nl.has_curvature())
    throw Error(Errc::CurvatureUnavailable, "w'' is singular at 0 for 1 < nu < 2");
  const Scalar h = Scalar(2) * R;
  switch (nl.family()) {
    case NonlinearityFamily::cubic: return Scalar(6) * h;
    case NonlinearityFamily::power: {
      const Scalar nu = nl.nu();
      if (nu == Scalar(1)) return Scalar(0);
      return nu * (nu - Scalar(1)) * std::pow(h, nu - Scalar(2));
    }
    case NonlinearityFamily::sublinear_atan: {
      // |w''| = 2a|eta|/(1+eta^2)^2 peaks at |eta| = 1/sqrt(3).
      const Scalar peak = Scalar(1) / std::sqrt(Scalar(3));
      const Scalar e = std::min(h, peak);
      const Scalar d = Scalar(1) + e * e;
      return Scalar(2) * nl.atan_amplitude() * e / (d * d);
    }
    case NonlinearityFamily::polynomial:
      return detail::sampled_abs_max([&](Scalar e) { return nl.d2w(e); }, h);
  }
  return Scalar(0);
}

template <typename Scalar>
struct SublinearVerdict {
  bool holds = false;
  Scalar a = Scalar(0);
  Scalar b = Scalar(0);
  bool certified = false;          // closed form, valid for all eta
  Scalar probe_range = Scalar(0);  // when not certified: checked only on |eta| <= probe_range
};

/// Looks for |w(eta)| <= a|eta| + b.
template <typename Scalar>
SublinearVerdict<Scalar> check_sublinear(const Nonlinearity<Scalar>& nl) {
  SublinearVerdict<Scalar> v;
  switch (nl.family()) {
    case NonlinearityFamily::cubic: v.certified = true; return v;
    case NonlinearityFamily::power:
      v.certified = true;
      if (nl.nu() == Scalar(1)) {
        v.holds = true;
        v.a = Scalar(1);
      }
      return v;
    case NonlinearityFamily::sublinear_atan:
      v.certified = true;
      v.holds = true;
      v.a = Scalar(0);
      v.b = nl.atan_amplitude() * Scalar(M_PI) / Scalar(2);
      return v;
    case NonlinearityFamily::polynomial: break;
  }
  // Probe: b from |eta| <= 1, a from the ratio |w|/|eta| on 1 <= |eta| <= 1e6.
  // Growth of the ratio across the decades means no linear bound.
  const Scalar range(1e6);
  v.probe_range = range;
  for (int i = 0; i <= 1000; ++i) v.b = std::max(v.b, std::abs(nl.w(Scalar(i) / Scalar(1000))));
  Scalar ratio_small(0), ratio_large(0);
  for (int i = 0; i <= 600; ++i) {
    const Scalar e = std::pow(Scalar(10), Scalar(i) / Scalar(100));
    const Scalar r = std::max(std::abs(nl.w(e)), std::abs(nl.w(-e))) / e;
    v.a = std::max(v.a, r);
    if (i <= 300) ratio_small = std::max(ratio_small, r);
    ratio_large = r;
  }
  v.holds = std::isfinite(static_cast<double>(v.a)) && ratio_large <= Scalar(2) * ratio_small;
  if (!v.holds) v.a = v.b = Scalar(0);
  return v;
}

template <typename Scalar>
struct PowerGlobalVerdict {
  bool holds = false;
  Scalar q = std::numeric_limits<Scalar>::quiet_NaN();
};

/// Searches for q >= 4/3 with |w|^q <= C W. Throws NegativePotential when W < 0 on the
/// probe set.
template <typename Scalar>
PowerGlobalVerdict<Scalar> check_power_global(const Nonlinearity<Scalar>& nl) {
  for (int i = -1000; i <= 1000; ++i) {
    const Scalar e = Scalar(i) / Scalar(100);
    if (nl.W(e) < Scalar(0)) throw Error(Errc::NegativePotential, "W < 0 on the probe set");
  }
  PowerGlobalVerdict<Scalar> v;
  const Scalar threshold = Scalar(4) / Scalar(3);
  switch (nl.family()) {
    case NonlinearityFamily::cubic:
    case NonlinearityFamily::power:
      v.q = (nl.nu() + Scalar(1)) / nl.nu();
      break;
    case NonlinearityFamily::sublinear_atan:
      // |w| ~ a|eta| near 0 forces q >= 2; |w| is bounded at infinity.
      v.q = Scalar(2);
      break;
    case NonlinearityFamily::polynomial: {
      // Lowest degree m forces q >= (m+1)/m, highest degree d forces q <= (d+1)/d.
      const auto& c = nl.coefficients();
      std::size_t lo = c.size(), hi = 0;
      for (std::size_t k = 0; k < c.size(); ++k) {
        if (c[k] == Scalar(0)) continue;
        lo = std::min(lo, k);
        hi = k;
      }
      if (lo == c.size() || lo != hi) return v;
      const Scalar d = Scalar(2 * hi + 1);
      v.q = (d + Scalar(1)) / d;
      break;
    }
  }
  v.holds = v.q >= threshold - Scalar(1e-12);
  return v;
}

template <typename Scalar>
struct BlowupHypothesisVerdict {
  bool holds = false;
  bool certified = false;  // false: verified on a probe set only
};

/// eta w(eta) <= 2(1 + 2 nu) W(eta) for all eta.
template <typename Scalar>
BlowupHypothesisVerdict<Scalar> check_blowup_hypothesis(const Nonlinearity<Scalar>& nl, Scalar nu) {
  if (!(nu > Scalar(0))) throw Error(Errc::BadNu, "nu must be positive");
  const Scalar k = Scalar(2) * (Scalar(1) + Scalar(2) * nu);
  BlowupHypothesisVerdict<Scalar> v;
  if (nl.family() == NonlinearityFamily::cubic || nl.family() == NonlinearityFamily::power) {
    // eta w = s|eta|^(p+1), W = s|eta|^(p+1)/(p+1): s(p+1) <= s k.
    const Scalar p1 = nl.nu() + Scalar(1);
    const Scalar tol = Scalar(1e-12) * k;
    v.certified = true;
    v.holds = nl.sign() > 0 ? p1 <= k + tol : p1 >= k - tol;
    return v;
  }
  v.holds = true;
  for (int i = -4000; i <= 4000; ++i) {
    const Scalar e = std::copysign(std::pow(Scalar(10), std::abs(Scalar(i)) / Scalar(1000) - Scalar(2)),
                                   Scalar(i));
    const Scalar lhs = e * nl.w(e);
    const Scalar rhs = k * nl.W(e);
    if (lhs > rhs + Scalar(1e-12) * std::max(std::abs(lhs), std::abs(rhs))) {
      v.holds = false;
      break;
    }
  }
  return v;
}

/// Pairwise force f(zeta, eta) with caller-supplied integrable envelopes
/// |f| <= envelope_1(R, zeta) and |df/deta| <= envelope_2(R, zeta) for |eta| <= 2R.
template <typename Scalar = double>
struct GeneralForce {
  std::function<Scalar(Scalar zeta, Scalar eta)> f;
  std::function<Scalar(Scalar R, Scalar zeta)> envelope_1;
  std::function<Scalar(Scalar R, Scalar zeta)> envelope_2;
  Scalar support_radius = std::numeric_limits<Scalar>::infinity();

  Scalar operator()(Scalar zeta, Scalar eta) const { return f(zeta, eta); }
};

/// f = alpha(zeta) w(eta) with envelopes 2R M(R)|alpha| and M(R)|alpha|.
template <typename Scalar>
GeneralForce<Scalar> separable_force(const KernelSpec<Scalar>& alpha, const Nonlinearity<Scalar>& nl) {
  GeneralForce<Scalar> g;
  g.f = [alpha, nl](Scalar zeta, Scalar eta) { return alpha(zeta) * nl.w(eta); };
  g.envelope_1 = [alpha, nl](Scalar R, Scalar zeta) {
    return Scalar(2) * R * stiffness_bound(nl, R) * std::abs(alpha(zeta));
  };
  g.envelope_2 = [alpha, nl](Scalar R, Scalar zeta) {
    return stiffness_bound(nl, R) * std::abs(alpha(zeta));
  };
  g.support_radius = alpha.support();
  return g;
}

/// dx * sum_j envelope(R, y_j) over the wrapped grid offsets.
template <typename Scalar, typename Env>
Scalar envelope_l1(const Grid<Scalar>& grid, const Env& envelope, Scalar R) {
  Scalar acc(0);
  for (Index j = 0; j < grid.size(); ++j)
    acc += std::abs(envelope(R, Scalar(grid.wrapped_offset(j)) * grid.dx()));
  return acc * grid.dx();
}

struct ForceCheck {
  bool zero_at_rest = true;
  bool envelope_1 = true;
  bool envelope_2 = true;
  bool ok() const { return zero_at_rest && envelope_1 && envelope_2; }
};

/// Probes f(zeta, 0) = 0 and both envelope inequalities on |eta| <= 2R, using a central
/// difference for df/deta.
template <typename Scalar>
ForceCheck verify_general_force(const GeneralForce<Scalar>& g, const Grid<Scalar>& grid, Scalar R,
                                int eta_probes = 101) {
  ForceCheck c;
  const Scalar h = Scalar(2) * R;
  const Scalar fd = Scalar(1e-6) * std::max(Scalar(1), h);
  for (Index j = 0; j < grid.size(); ++j) {
    const Scalar zeta = Scalar(grid.wrapped_offset(j)) * grid.dx();
    if (g(zeta, Scalar(0)) != Scalar(0)) c.zero_at_rest = false;
    const Scalar e1 = g.envelope_1(R, zeta);
    const Scalar e2 = g.envelope_2(R, zeta);
    for (int i = 0; i < eta_probes; ++i) {
      const Scalar eta = -h + Scalar(2) * h * Scalar(i) / Scalar(eta_probes - 1);
      const Scalar val = g(zeta, eta);
      if (std::abs(val) > e1 * (Scalar(1) + Scalar(1e-12)) + Scalar(1e-300)) c.envelope_1 = false;
      const Scalar a = std::clamp(eta - fd, -h, h), b = std::clamp(eta + fd, -h, h);
      const Scalar slope = (g(zeta, b) - g(zeta, a)) / (b - a);
      if (std::abs(slope) > e2 * (Scalar(1) + Scalar(1e-6)) + Scalar(1e-12)) c.envelope_2 = false;
    }
  }
  return c;
}

}  // namespace peri
