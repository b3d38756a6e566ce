#pragma once

// Exact sparse coding: projection onto the s-l0 ball and elementwise hard
// thresholding.

#include "tbcs/core.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <vector>

namespace tbcs {

struct SparseCodes {
  CMatrix data;
  std::optional<Index> budget;

  Index nonzeros() const { return (data.array() != Complex(0.0)).count(); }
};

/// Keeps the s entries of largest magnitude. Ties at the s-th magnitude are
/// resolved towards the lexicographically lowest (row, column) index.
inline SparseCodes project_s_l0(const CMatrix& z, Index s) {
  const Index total = z.size();
  if (s < 0 || s > total) throw ArgumentError("sparsity budget out of range [0, n*N]");
  SparseCodes out{CMatrix::Zero(z.rows(), z.cols()), s};
  if (s == 0) return out;
  if (s == total) {
    out.data = z;
    return out;
  }

  const Index rows = z.rows();
  const Index cols = z.cols();
  Eigen::ArrayXd mag(total);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) mag[i * cols + j] = std::abs(z(i, j));

  // Lexicographic order over (row, column) is row * cols + column.
  std::vector<Index> order(static_cast<std::size_t>(total));
  std::iota(order.begin(), order.end(), Index{0});
  auto before = [&](Index a, Index b) { return mag[a] > mag[b] || (mag[a] == mag[b] && a < b); };
  std::nth_element(order.begin(), order.begin() + (s - 1), order.end(), before);
  for (Index q = 0; q < s; ++q) {
    const Index flat = order[static_cast<std::size_t>(q)];
    const Index i = flat / cols;
    const Index j = flat % cols;
    out.data(i, j) = z(i, j);
  }
  return out;
}

/// Zeroes every entry with |Z_ij| < eta; magnitudes equal to eta are kept.
inline SparseCodes hard_threshold(const CMatrix& z, double eta) {
  if (!(eta > 0.0)) throw ArgumentError("hard threshold eta must be > 0");
  SparseCodes out{z, std::nullopt};
  out.data = z.unaryExpr([eta](const Complex& v) { return std::abs(v) >= eta ? v : Complex(0.0); });
  return out;
}

}  // namespace tbcs
