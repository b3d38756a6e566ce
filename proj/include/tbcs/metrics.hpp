#pragma once

// Reconstruction quality: PSNR and HFEN, both on magnitude images.

#include "tbcs/core.hpp"
#include "tbcs/grid.hpp"

#include <cmath>
#include <limits>

namespace tbcs {

struct MetricReport {
  double psnr_db = 0.0;
  double hfen = 0.0;
  double reference_peak = 0.0;
};

/// 20 log10(peak |ref| * sqrt(p) / || |recon| - |ref| ||_2). Identical
/// magnitudes give +inf.
inline double psnr(const ImageGrid& recon, const ImageGrid& reference) {
  if (!recon.same_shape(reference)) throw ConfigError("psnr: dimension mismatch");
  const RVector ref = reference.data().cwiseAbs();
  const double peak = ref.maxCoeff();
  if (!(peak > 0.0)) throw ArgumentError("psnr: reference image is zero");
  const double err = (recon.data().cwiseAbs() - ref).norm();
  if (err == 0.0) return std::numeric_limits<double>::infinity();
  return 20.0 * std::log10(peak * std::sqrt(static_cast<double>(ref.size())) / err);
}

/// Rotationally symmetric 15x15 LoG kernel, sigma 1.5. The Gaussian is
/// normalized to unit sum on the grid, multiplied by (r^2 - 2 sigma^2) / sigma^4,
/// then shifted to exact zero sum.
inline Eigen::MatrixXd log_kernel(int size = 15, double sigma = 1.5) {
  const int half = size / 2;
  Eigen::MatrixXd g(size, size);
  for (int i = 0; i < size; ++i)
    for (int j = 0; j < size; ++j) {
      const double r2 = double((i - half) * (i - half) + (j - half) * (j - half));
      g(i, j) = std::exp(-r2 / (2.0 * sigma * sigma));
    }
  g /= g.sum();
  Eigen::MatrixXd k(size, size);
  const double s4 = sigma * sigma * sigma * sigma;
  for (int i = 0; i < size; ++i)
    for (int j = 0; j < size; ++j) {
      const double r2 = double((i - half) * (i - half) + (j - half) * (j - half));
      k(i, j) = g(i, j) * (r2 - 2.0 * sigma * sigma) / s4;
    }
  k.array() -= k.mean();
  return k;
}

namespace detail {

// Symmetric (half-sample) reflection: -1 -> 0, len -> len - 1.
inline Index reflect(Index i, Index len) {
  const Index period = 2 * len;
  i %= period;
  if (i < 0) i += period;
  return i < len ? i : period - 1 - i;
}

}  // namespace detail

/// Correlates a real row-major image with `k` using symmetric padding.
inline RVector filter_symmetric(const RVector& img, Index height, Index width, const Eigen::MatrixXd& k) {
  const Index half_r = k.rows() / 2;
  const Index half_c = k.cols() / 2;
  RVector out = RVector::Zero(img.size());
  for (Index r = 0; r < height; ++r)
    for (Index c = 0; c < width; ++c) {
      double acc = 0.0;
      for (Index a = 0; a < k.rows(); ++a) {
        const Index rr = detail::reflect(r + a - half_r, height);
        for (Index b = 0; b < k.cols(); ++b) acc += k(a, b) * img[rr * width + detail::reflect(c + b - half_c, width)];
      }
      out[r * width + c] = acc;
    }
  return out;
}

/// || LoG(|recon|) - LoG(|ref|) ||_2.
inline double hfen(const ImageGrid& recon, const ImageGrid& reference) {
  if (!recon.same_shape(reference)) throw ConfigError("hfen: dimension mismatch");
  const RVector diff = recon.data().cwiseAbs() - reference.data().cwiseAbs();
  static const Eigen::MatrixXd kernel = log_kernel();
  return filter_symmetric(diff, recon.height(), recon.width(), kernel).norm();
}

inline MetricReport evaluate_metrics(const ImageGrid& recon, const ImageGrid& reference) {
  return {psnr(recon, reference), hfen(recon, reference), reference.data().cwiseAbs().maxCoeff()};
}

}  // namespace tbcs
