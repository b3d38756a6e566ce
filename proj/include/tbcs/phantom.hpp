#pragma once

// Synthetic test images with values in [0, 1].

#include "tbcs/core.hpp"
#include "tbcs/grid.hpp"
#include "tbcs/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>

namespace tbcs {

/// Modified (Toft) Shepp-Logan head phantom.
inline ImageGrid shepp_logan(Shape shape) {
  struct Ellipse {
    double value, a, b, x0, y0, phi_deg;
  };
  static constexpr std::array<Ellipse, 10> kEllipses = {{
      {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},
      {-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0},
      {-0.2, 0.1100, 0.3100, 0.22, 0.0, -18.0},
      {-0.2, 0.1600, 0.4100, -0.22, 0.0, 18.0},
      {0.1, 0.2100, 0.2500, 0.0, 0.35, 0.0},
      {0.1, 0.0460, 0.0460, 0.0, 0.1, 0.0},
      {0.1, 0.0460, 0.0460, 0.0, -0.1, 0.0},
      {0.1, 0.0460, 0.0230, -0.08, -0.605, 0.0},
      {0.1, 0.0230, 0.0230, 0.0, -0.606, 0.0},
      {0.1, 0.0230, 0.0460, 0.06, -0.605, 0.0},
  }};
  const double pi = std::acos(-1.0);
  ImageGrid img(shape.height, shape.width);
  for (Index r = 0; r < shape.height; ++r) {
    const double y = 1.0 - (2.0 * r + 1.0) / static_cast<double>(shape.height);
    for (Index c = 0; c < shape.width; ++c) {
      const double x = (2.0 * c + 1.0) / static_cast<double>(shape.width) - 1.0;
      double v = 0.0;
      for (const auto& e : kEllipses) {
        const double phi = e.phi_deg * pi / 180.0;
        const double xr = (x - e.x0) * std::cos(phi) + (y - e.y0) * std::sin(phi);
        const double yr = -(x - e.x0) * std::sin(phi) + (y - e.y0) * std::cos(phi);
        if ((xr * xr) / (e.a * e.a) + (yr * yr) / (e.b * e.b) <= 1.0) v += e.value;
      }
      img(r, c) = std::clamp(v, 0.0, 1.0);
    }
  }
  return img;
}

/// Sum of random isotropic Gaussian bumps, peak-normalized to 1.
inline ImageGrid smooth_blobs(Shape shape, std::uint64_t seed, int count = 8) {
  CounterRng rng(seed, 0x626c6f62);
  ImageGrid img(shape.height, shape.width);
  const double scale = static_cast<double>(std::min(shape.height, shape.width));
  for (int k = 0; k < count; ++k) {
    const double cr = rng.uniform() * shape.height;
    const double cc = rng.uniform() * shape.width;
    const double sigma = scale * (0.04 + 0.12 * rng.uniform());
    const double amp = 0.3 + 0.7 * rng.uniform();
    for (Index r = 0; r < shape.height; ++r)
      for (Index c = 0; c < shape.width; ++c) {
        const double d2 = (r - cr) * (r - cr) + (c - cc) * (c - cc);
        img(r, c) += amp * std::exp(-d2 / (2.0 * sigma * sigma));
      }
  }
  const double peak = img.data().cwiseAbs().maxCoeff();
  if (peak > 0.0) img.data() /= peak;
  return img;
}

inline ImageGrid make_phantom(const std::string& kind, Shape shape, std::uint64_t seed) {
  if (shape.height < 1 || shape.width < 1) throw ArgumentError("phantom shape must be positive");
  if (kind == "shepp-logan") return shepp_logan(shape);
  if (kind == "smooth-blobs") return smooth_blobs(shape, seed);
  throw ArgumentError("unknown phantom kind '" + kind + "'");
}

}  // namespace tbcs
