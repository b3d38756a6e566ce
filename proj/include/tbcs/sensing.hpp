#pragma once

// Fourier encoding, sampling masks, k-space simulation and zero filling.
//
// Masks and k-space on disk and at this module's boundary are "centered"
// (DC at (floor(h/2), floor(w/2))), matching fftshift(fft2(ifftshift(x)))
// with a unitary fft2. Everything downstream works in unshifted DFT order;
// FourierSampling does the conversion.

#include "tbcs/core.hpp"
#include "tbcs/fft.hpp"
#include "tbcs/grid.hpp"
#include "tbcs/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <utility>
#include <variant>
#include <vector>

namespace tbcs {

class SamplingMask {
 public:
  SamplingMask() = default;
  SamplingMask(Index height, Index width, std::vector<std::uint8_t> flags)
      : height_(height), width_(width), flags_(std::move(flags)) {
    if (height < 1 || width < 1) throw ConfigError("mask dimensions must be positive");
    if (static_cast<Index>(flags_.size()) != height * width) throw ConfigError("mask flag count mismatch");
    for (auto& f : flags_) f = f ? 1 : 0;
    if (sampled_count() == 0) throw ArgumentError("mask samples no k-space locations");
  }

  static SamplingMask full(Shape s) {
    return SamplingMask(s.height, s.width, std::vector<std::uint8_t>(static_cast<std::size_t>(s.size()), 1));
  }

  Index height() const { return height_; }
  Index width() const { return width_; }
  Shape shape() const { return {height_, width_}; }
  const std::vector<std::uint8_t>& flags() const { return flags_; }
  bool operator()(Index r, Index c) const { return flags_[static_cast<std::size_t>(r * width_ + c)] != 0; }
  bool at(Index flat) const { return flags_[static_cast<std::size_t>(flat)] != 0; }

  Index sampled_count() const { return std::accumulate(flags_.begin(), flags_.end(), Index{0}); }
  double acceleration() const { return static_cast<double>(height_ * width_) / sampled_count(); }

  SamplingMask transposed() const {
    std::vector<std::uint8_t> t(flags_.size());
    for (Index r = 0; r < height_; ++r)
      for (Index c = 0; c < width_; ++c) t[static_cast<std::size_t>(c * height_ + r)] = (*this)(r, c);
    return SamplingMask(width_, height_, std::move(t));
  }

  /// Mask in unshifted DFT order.
  RVector dft_order() const {
    CVector v(height_ * width_);
    for (Index i = 0; i < v.size(); ++i) v[i] = at(i) ? 1.0 : 0.0;
    return ifftshift(v, height_, width_).real();
  }

  bool operator==(const SamplingMask&) const = default;

 private:
  Index height_ = 0;
  Index width_ = 0;
  std::vector<std::uint8_t> flags_;
};

/// Centered, zero-filled k-space grid.
struct KSpaceData {
  Index height = 0;
  Index width = 0;
  CVector data;
};

inline void require_same_shape(Shape a, Shape b, const char* what) {
  if (!(a == b)) throw ConfigError(std::string(what) + ": dimension mismatch");
}

/// fftshift(F(ifftshift(x))) with unitary F.
inline CVector centered_dft(const CVector& x, Index h, Index w) { return fftshift(dft2(ifftshift(x, h, w), h, w), h, w); }

/// Inverse of centered_dft.
inline CVector centered_idft(const CVector& k, Index h, Index w) { return fftshift(idft2(ifftshift(k, h, w), h, w), h, w); }

/// Masked centered k-space; complex white noise (std noise_std/sqrt(2) per
/// component) is added on sampled locations only.
inline KSpaceData simulate_kspace(const ImageGrid& image, const SamplingMask& mask, double noise_std = 0.0,
                                  std::uint64_t seed = 0) {
  require_same_shape(shape_of(image), mask.shape(), "simulate_kspace");
  if (!(noise_std >= 0.0)) throw ArgumentError("noise_std must be >= 0");
  const Index h = image.height();
  const Index w = image.width();
  KSpaceData k{h, w, centered_dft(image.data(), h, w)};
  CounterRng rng(seed, 0x6b73);
  const double comp = noise_std / std::sqrt(2.0);
  for (Index i = 0; i < k.data.size(); ++i) {
    if (!mask.at(i)) {
      k.data[i] = 0.0;
    } else if (noise_std > 0.0) {
      const double re = rng.normal();
      const double im = rng.normal();
      k.data[i] += Complex(comp * re, comp * im);
    }
  }
  return k;
}

inline ImageGrid zero_fill_recon(const KSpaceData& kspace, const SamplingMask& mask) {
  require_same_shape({kspace.height, kspace.width}, mask.shape(), "zero_fill_recon");
  CVector k = kspace.data;
  for (Index i = 0; i < k.size(); ++i)
    if (!mask.at(i)) k[i] = 0.0;
  return ImageGrid(kspace.height, kspace.width, centered_idft(k, kspace.height, kspace.width));
}

namespace detail {

// Weighted sampling without replacement (Efraimidis-Spirakis keys). Picks
// `count` of `candidates`, each with weight weights[i] > 0.
inline std::vector<Index> weighted_pick(const std::vector<Index>& candidates, const std::vector<double>& weights,
                                        Index count, CounterRng& rng) {
  std::vector<std::pair<double, Index>> keys;
  keys.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i)
    keys.emplace_back(std::log(rng.uniform()) / weights[i], candidates[i]);
  auto larger = [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); };
  std::partial_sort(keys.begin(), keys.begin() + count, keys.end(), larger);
  std::vector<Index> out;
  for (Index i = 0; i < count; ++i) out.push_back(keys[static_cast<std::size_t>(i)].second);
  return out;
}

}  // namespace detail

/// Variable-density 2D random mask: a fully sampled disk of radius
/// center_radius around DC (empty when 0), the remainder drawn without
/// replacement with probability proportional to (1 + dist)^(-density_power).
/// Exactly round(p / accel) locations are sampled.
inline SamplingMask gen_mask_random2d(Shape shape, double accel, double density_power, double center_radius,
                                      std::uint64_t seed) {
  if (shape.height < 1 || shape.width < 1) throw ArgumentError("mask shape must be positive");
  if (!(accel > 1.0)) throw ArgumentError("acceleration must be > 1");
  if (center_radius < 0.0) throw ArgumentError("center radius must be >= 0");
  const Index p = shape.size();
  const Index m = std::max<Index>(1, std::llround(static_cast<double>(p) / accel));
  const double cr = static_cast<double>(shape.height / 2);
  const double cc = static_cast<double>(shape.width / 2);

  std::vector<std::uint8_t> flags(static_cast<std::size_t>(p), 0);
  std::vector<Index> rest;
  std::vector<double> weights;
  Index fixed = 0;
  for (Index r = 0; r < shape.height; ++r) {
    for (Index c = 0; c < shape.width; ++c) {
      const double d = std::hypot(r - cr, c - cc);
      const Index flat = r * shape.width + c;
      if (center_radius > 0.0 && d <= center_radius) {
        flags[static_cast<std::size_t>(flat)] = 1;
        ++fixed;
      } else {
        rest.push_back(flat);
        weights.push_back(std::pow(1.0 + d, -density_power));
      }
    }
  }
  if (fixed > m) throw ArgumentError("center disk alone exceeds the sample budget round(p/accel)");
  CounterRng rng(seed, 0x6d61736b);
  for (Index flat : detail::weighted_pick(rest, weights, m - fixed, rng)) flags[static_cast<std::size_t>(flat)] = 1;
  return SamplingMask(shape.height, shape.width, std::move(flags));
}

/// Cartesian mask of full k-space rows (phase encodes): center_lines rows
/// around DC always, the remaining round(h / accel) - center_lines rows drawn
/// with probability proportional to (1 + |row - DC|)^(-density_power).
inline SamplingMask gen_mask_cartesian(Shape shape, double accel, double density_power, Index center_lines,
                                       std::uint64_t seed) {
  if (shape.height < 1 || shape.width < 1) throw ArgumentError("mask shape must be positive");
  if (!(accel > 1.0)) throw ArgumentError("acceleration must be > 1");
  if (center_lines < 0) throw ArgumentError("center line count must be >= 0");
  const Index rows = std::max<Index>(1, std::llround(static_cast<double>(shape.height) / accel));
  if (center_lines > rows) throw ArgumentError("center lines alone exceed the row budget round(h/accel)");
  const Index dc = shape.height / 2;
  const Index first = dc - center_lines / 2;

  std::vector<bool> take(static_cast<std::size_t>(shape.height), false);
  std::vector<Index> rest;
  std::vector<double> weights;
  for (Index r = 0; r < shape.height; ++r) {
    if (r >= first && r < first + center_lines) {
      take[static_cast<std::size_t>(r)] = true;
    } else {
      rest.push_back(r);
      weights.push_back(std::pow(1.0 + std::abs(static_cast<double>(r - dc)), -density_power));
    }
  }
  CounterRng rng(seed, 0x63617274);
  for (Index r : detail::weighted_pick(rest, weights, rows - center_lines, rng)) take[static_cast<std::size_t>(r)] = true;

  std::vector<std::uint8_t> flags(static_cast<std::size_t>(shape.size()), 0);
  for (Index r = 0; r < shape.height; ++r)
    if (take[static_cast<std::size_t>(r)])
      std::fill_n(flags.begin() + r * shape.width, shape.width, std::uint8_t{1});
  return SamplingMask(shape.height, shape.width, std::move(flags));
}

/// Undersampled Fourier data in the form used by the image update: the
/// mask in DFT order and S0 = F F_u^H y, also in DFT order.
struct FourierSampling {
  Shape shape;
  RVector mask_dft;
  CVector s0;
  SamplingMask mask;

  static FourierSampling make(const KSpaceData& kspace, const SamplingMask& mask) {
    const ImageGrid zf = zero_fill_recon(kspace, mask);
    FourierSampling fs{mask.shape(), mask.dft_order(), dft2(zf.data(), kspace.height, kspace.width), mask};
    for (Index i = 0; i < fs.s0.size(); ++i)
      if (fs.mask_dft[i] == 0.0) fs.s0[i] = 0.0;
    return fs;
  }

  /// ||F_u x - y||^2 evaluated in DFT order (the shifts are unitary).
  double residual_sq(const ImageGrid& x) const {
    const CVector fx = dft2(x.data(), shape.height, shape.width);
    double acc = 0.0;
    for (Index i = 0; i < fx.size(); ++i)
      if (mask_dft[i] != 0.0) acc += std::norm(fx[i] - s0[i]);
    return acc;
  }
};

/// A linear sensing operator A: C^p -> C^m, either undersampled Fourier
/// (measurements are the sampled centered k-space values in row-major
/// order) or an explicit dense matrix.
class SensingOperator {
 public:
  static SensingOperator fourier(SamplingMask mask) {
    SensingOperator op;
    op.shape_ = mask.shape();
    for (Index i = 0; i < op.shape_.size(); ++i)
      if (mask.at(i)) op.sampled_.push_back(i);
    op.impl_ = std::move(mask);
    return op;
  }

  static SensingOperator dense(CMatrix a, Shape shape) {
    if (a.cols() != shape.size()) throw ConfigError("dense sensing matrix column count must equal p");
    SensingOperator op;
    op.shape_ = shape;
    op.impl_ = std::move(a);
    return op;
  }

  bool is_fourier() const { return std::holds_alternative<SamplingMask>(impl_); }
  const SamplingMask& mask() const { return std::get<SamplingMask>(impl_); }
  Shape shape() const { return shape_; }
  Index rows() const { return is_fourier() ? static_cast<Index>(sampled_.size()) : std::get<CMatrix>(impl_).rows(); }

  CVector apply(const CVector& x) const {
    if (x.size() != shape_.size()) throw ConfigError("sensing apply: wrong input length");
    if (!is_fourier()) return std::get<CMatrix>(impl_) * x;
    const CVector k = centered_dft(x, shape_.height, shape_.width);
    CVector y(static_cast<Index>(sampled_.size()));
    for (std::size_t i = 0; i < sampled_.size(); ++i) y[static_cast<Index>(i)] = k[sampled_[i]];
    return y;
  }

  CVector adjoint(const CVector& y) const {
    if (y.size() != rows()) throw ConfigError("sensing adjoint: wrong input length");
    if (!is_fourier()) return std::get<CMatrix>(impl_).adjoint() * y;
    CVector k = CVector::Zero(shape_.size());
    for (std::size_t i = 0; i < sampled_.size(); ++i) k[sampled_[i]] = y[static_cast<Index>(i)];
    return centered_idft(k, shape_.height, shape_.width);
  }

  /// Explicit m x p matrix (column-by-column application for Fourier).
  CMatrix materialize() const {
    if (!is_fourier()) return std::get<CMatrix>(impl_);
    CMatrix a(rows(), shape_.size());
    CVector e = CVector::Zero(shape_.size());
    for (Index j = 0; j < shape_.size(); ++j) {
      e[j] = 1.0;
      a.col(j) = apply(e);
      e[j] = 0.0;
    }
    return a;
  }

  /// Measurement vector from a centered zero-filled k-space grid.
  CVector measurements(const KSpaceData& k) const {
    if (!is_fourier()) throw ConfigError("measurements from k-space require a Fourier operator");
    CVector y(static_cast<Index>(sampled_.size()));
    for (std::size_t i = 0; i < sampled_.size(); ++i) y[static_cast<Index>(i)] = k.data[sampled_[i]];
    return y;
  }

 private:
  Shape shape_;
  std::vector<Index> sampled_;
  std::variant<SamplingMask, CMatrix> impl_;
};

}  // namespace tbcs
