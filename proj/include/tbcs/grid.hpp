#pragma once

// Image/patch geometry: the patch extraction operators P_j, their adjoint
// and the diagonal of sum_j P_j^T P_j.
//
// Conventions shared by every module:
//  * images are stored row-major, pixel (r, c) at index r * width + c;
//  * patches are enumerated in raster order of their top-left corner;
//  * inside a patch, pixels are vectorized column-major, i.e. entry
//    a + side * b holds pixel (r0 + a, c0 + b).

#include "tbcs/core.hpp"

#include <utility>
#include <vector>

namespace tbcs {

class ImageGrid {
 public:
  ImageGrid() = default;
  ImageGrid(Index height, Index width) : height_(height), width_(width), data_(CVector::Zero(height * width)) {
    if (height < 1 || width < 1) throw ConfigError("image dimensions must be positive");
  }
  ImageGrid(Index height, Index width, CVector data) : height_(height), width_(width), data_(std::move(data)) {
    if (height < 1 || width < 1) throw ConfigError("image dimensions must be positive");
    if (data_.size() != height * width) throw ConfigError("image data length does not match height*width");
    if (!data_.allFinite()) throw ArgumentError("image contains non-finite samples");
  }

  Index height() const { return height_; }
  Index width() const { return width_; }
  Index size() const { return height_ * width_; }

  const CVector& data() const { return data_; }
  CVector& data() { return data_; }

  Complex operator()(Index r, Index c) const { return data_[r * width_ + c]; }
  Complex& operator()(Index r, Index c) { return data_[r * width_ + c]; }

  bool same_shape(const ImageGrid& o) const { return height_ == o.height_ && width_ == o.width_; }

 private:
  Index height_ = 0;
  Index width_ = 0;
  CVector data_;
};

struct Shape {
  Index height = 0;
  Index width = 0;
  Index size() const { return height * width; }
  bool operator==(const Shape&) const = default;
};

inline Shape shape_of(const ImageGrid& x) { return {x.height(), x.width()}; }

struct PatchConfig {
  Index side = 1;
  Index stride = 1;
  bool wrap = true;

  Index n() const { return side * side; }

  void validate(Shape shape) const {
    if (side < 1 || stride < 1) throw ConfigError("patch side and stride must be >= 1");
    if (side > std::min(shape.height, shape.width)) throw ConfigError("patch side exceeds image dimensions");
  }

  /// Top-left corner coordinates along one axis of length len.
  std::vector<Index> corners(Index len) const {
    std::vector<Index> out;
    const Index last = wrap ? len - 1 : len - side;
    for (Index c = 0; c <= last; c += stride) out.push_back(c);
    return out;
  }

  Index patch_count(Shape shape) const {
    return static_cast<Index>(corners(shape.height).size() * corners(shape.width).size());
  }

  /// True when sum_j P_j^T P_j is circulant (one patch per pixel, wrapped).
  bool is_circulant() const { return stride == 1 && wrap; }
};

/// Calls visit(j, k, pixel) for every patch j and in-patch entry k.
template <typename Visit>
void for_each_patch_pixel(const PatchConfig& cfg, Shape shape, Visit&& visit) {
  const auto rows = cfg.corners(shape.height);
  const auto cols = cfg.corners(shape.width);
  Index j = 0;
  for (Index r0 : rows) {
    for (Index c0 : cols) {
      for (Index b = 0; b < cfg.side; ++b) {
        const Index c = (c0 + b) % shape.width;
        for (Index a = 0; a < cfg.side; ++a) {
          const Index r = (r0 + a) % shape.height;
          visit(j, a + cfg.side * b, r * shape.width + c);
        }
      }
      ++j;
    }
  }
}

/// X with column j equal to P_j x.
inline CMatrix extract_patches(const ImageGrid& image, const PatchConfig& cfg) {
  const Shape shape = shape_of(image);
  cfg.validate(shape);
  CMatrix out(cfg.n(), cfg.patch_count(shape));
  const CVector& x = image.data();
  for_each_patch_pixel(cfg, shape, [&](Index j, Index k, Index pix) { out(k, j) = x[pix]; });
  return out;
}

/// sum_j P_j^T z_j. The loop order is fixed so results are bitwise reproducible.
inline ImageGrid adjoint_accumulate(const CMatrix& patches, const PatchConfig& cfg, Shape shape) {
  cfg.validate(shape);
  if (patches.rows() != cfg.n() || patches.cols() != cfg.patch_count(shape))
    throw ConfigError("patch matrix dimensions do not match patch configuration");
  ImageGrid out(shape.height, shape.width);
  CVector& x = out.data();
  for_each_patch_pixel(cfg, shape, [&](Index j, Index k, Index pix) { x[pix] += patches(k, j); });
  return out;
}

/// Number of patches covering each pixel (diagonal of sum_j P_j^T P_j).
inline RVector overlap_diag(const PatchConfig& cfg, Shape shape) {
  cfg.validate(shape);
  RVector d = RVector::Zero(shape.size());
  for_each_patch_pixel(cfg, shape, [&](Index, Index, Index pix) { d[pix] += 1.0; });
  return d;
}

}  // namespace tbcs
