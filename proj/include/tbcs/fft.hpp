#pragma once

// Unitary 2D DFT on row-major grids (F^H F = I), unshifted index order.

#include "tbcs/core.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <vector>

namespace tbcs {

namespace detail {

inline void fft2_inplace(CVector& data, Index height, Index width, bool inverse) {
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::Unscaled);
  std::vector<Complex> in, out;

  in.resize(static_cast<std::size_t>(width));
  for (Index r = 0; r < height; ++r) {
    for (Index c = 0; c < width; ++c) in[c] = data[r * width + c];
    inverse ? fft.inv(out, in) : fft.fwd(out, in);
    for (Index c = 0; c < width; ++c) data[r * width + c] = out[c];
  }
  in.resize(static_cast<std::size_t>(height));
  for (Index c = 0; c < width; ++c) {
    for (Index r = 0; r < height; ++r) in[r] = data[r * width + c];
    inverse ? fft.inv(out, in) : fft.fwd(out, in);
    for (Index r = 0; r < height; ++r) data[r * width + c] = out[r];
  }
  data *= 1.0 / std::sqrt(static_cast<double>(height * width));
}

}  // namespace detail

/// Forward transform, X[k] = p^{-1/2} sum_n x[n] exp(-2 pi i k.n / dims).
inline CVector dft2(const CVector& x, Index height, Index width) {
  if (x.size() != height * width) throw ConfigError("dft2: data length does not match grid");
  CVector out = x;
  detail::fft2_inplace(out, height, width, false);
  return out;
}

inline CVector idft2(const CVector& k, Index height, Index width) {
  if (k.size() != height * width) throw ConfigError("idft2: data length does not match grid");
  CVector out = k;
  detail::fft2_inplace(out, height, width, true);
  return out;
}

/// Circular shift so that out(r, c) = in((r - dr) mod h, (c - dc) mod w).
inline CVector circshift(const CVector& in, Index height, Index width, Index dr, Index dc) {
  CVector out(in.size());
  for (Index r = 0; r < height; ++r) {
    const Index rr = (((r - dr) % height) + height) % height;
    for (Index c = 0; c < width; ++c) {
      const Index cc = (((c - dc) % width) + width) % width;
      out[r * width + c] = in[rr * width + cc];
    }
  }
  return out;
}

/// Moves the zero-frequency sample to (floor(h/2), floor(w/2)).
inline CVector fftshift(const CVector& in, Index height, Index width) {
  return circshift(in, height, width, height / 2, width / 2);
}

inline CVector ifftshift(const CVector& in, Index height, Index width) {
  return circshift(in, height, width, -(height / 2), -(width / 2));
}

}  // namespace tbcs
