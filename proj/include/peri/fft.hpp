#pragma once

#include "peri/core.hpp"

#include <unsupported/Eigen/FFT>

#include <complex>

namespace peri::fft {

template <typename Scalar>
using Spectrum = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

// Eigen::FFT caches plans per length and is not safe to share across threads.
template <typename Scalar>
Eigen::FFT<Scalar>& engine() {
  thread_local Eigen::FFT<Scalar> e;
  return e;
}

// Unnormalized DFT: X_k = sum_j x_j exp(-2 pi i jk / N).
template <typename Scalar>
Spectrum<Scalar> forward(const Vector<Scalar>& x) {
  Spectrum<Scalar> out(x.size());
  engine<Scalar>().fwd(out.data(), x.data(), x.size());
  return out;
}

// Inverse including the 1/N factor; returns the real part.
template <typename Scalar>
Vector<Scalar> inverse_real(const Spectrum<Scalar>& X) {
  Spectrum<Scalar> tmp(X.size());
  engine<Scalar>().inv(tmp.data(), X.data(), X.size());
  return tmp.real();
}

// Signed integer frequency of bin k on an N-point grid; the Nyquist bin maps to +N/2.
inline Index signed_mode(Index k, Index n) { return k <= n / 2 ? k : k - n; }

}  // namespace peri::fft
