#pragma once

// Closed-form transform updates and the transform regularizer
//   Q(W) = -log|det W| + 0.5 ||W||_F^2.

#include "tbcs/core.hpp"

#include <cmath>
#include <limits>

namespace tbcs {

enum class TransformMode { WellConditioned, Unitary };

struct Transform {
  CMatrix matrix;
  TransformMode mode = TransformMode::WellConditioned;

  Index n() const { return matrix.rows(); }

  double unitarity_error() const {
    return (matrix.adjoint() * matrix - CMatrix::Identity(n(), n())).norm();
  }
};

/// Evaluates Q from the singular values alpha_i as
///   n/2 + sum_i [ 0.5 (alpha_i - 1)^2 + (alpha_i - 1) - log1p(alpha_i - 1) ],
/// an algebraic rewrite of sum_i 0.5 alpha_i^2 - log alpha_i in which every
/// bracket is non-negative in floating point, so Q >= n/2 holds exactly.
/// Returns +inf for singular W.
inline double eval_Q(const CMatrix& w) {
  if (w.rows() != w.cols()) throw ConfigError("transform must be square");
  const RVector alpha = Eigen::JacobiSVD<CMatrix>(w).singularValues();
  double excess = 0.0;
  for (Index i = 0; i < alpha.size(); ++i) {
    if (!(alpha[i] > 0.0)) return std::numeric_limits<double>::infinity();
    const double d = alpha[i] - 1.0;
    excess += 0.5 * d * d + (d - std::log1p(d));
  }
  return 0.5 * static_cast<double>(w.rows()) + excess;
}

inline double eval_Q(const Transform& w) { return eval_Q(w.matrix); }

/// ||W X - B||_F^2 + 0.5 lambda ||W||_F^2 - lambda log|det W|, i.e. the
/// sparsification error plus lambda Q(W).
inline double transform_objective(const CMatrix& w, const CMatrix& x, const CMatrix& b, double lambda) {
  return (w * x - b).squaredNorm() + lambda * eval_Q(w);
}

enum class LFactor { EvdSqrt, Cholesky };

namespace detail {

// Hermitian EVD based inverse square root, eigenvalues clamped at 1e-14 * max.
inline CMatrix inverse_sqrt_hpd(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> evd(m);
  RVector ev = evd.eigenvalues();
  const double floor = 1e-14 * ev.cwiseAbs().maxCoeff();
  for (Index i = 0; i < ev.size(); ++i) ev[i] = 1.0 / std::sqrt(std::max(ev[i], floor));
  return evd.eigenvectors() * ev.asDiagonal() * evd.eigenvectors().adjoint();
}

}  // namespace detail

/// Precomputed L^{-1} for XX^H + 0.5 lambda I. The solver keeps this fixed
/// across inner alternations, since X does not change there.
struct TransformFactor {
  CMatrix l_inv;

  static TransformFactor make(const CMatrix& x, double lambda, LFactor kind = LFactor::EvdSqrt) {
    if (!(lambda > 0.0)) throw ArgumentError("transform weight lambda must be > 0");
    if (!x.allFinite()) throw ArgumentError("non-finite patch matrix");
    const Index n = x.rows();
    CMatrix gram = x * x.adjoint();
    gram.diagonal().array() += 0.5 * lambda;
    if (kind == LFactor::EvdSqrt) return {detail::inverse_sqrt_hpd(gram)};
    Eigen::LLT<CMatrix> llt(gram);
    if (llt.info() != Eigen::Success) throw NumericalError("Cholesky factorization failed");
    CMatrix l_inv = llt.matrixL().solve(CMatrix::Identity(n, n));
    return {l_inv};
  }
};

/// Global minimizer of ||W X - B||_F^2 + 0.5 lambda ||W||_F^2 - lambda log|det W|:
/// with L^{-1} X B^H = V S R^H, W = 0.5 R (S + (S^2 + 2 lambda I)^{1/2}) V^H L^{-1}.
inline Transform update_transform_wellcond(const CMatrix& x, const CMatrix& b, double lambda,
                                           const TransformFactor& factor) {
  if (x.rows() != b.rows() || x.cols() != b.cols()) throw ConfigError("X and B shapes differ");
  if (!b.allFinite()) throw ArgumentError("non-finite sparse codes");
  const CMatrix m = factor.l_inv * (x * b.adjoint());
  Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RVector& sigma = svd.singularValues();
  RVector scale(sigma.size());
  for (Index i = 0; i < sigma.size(); ++i)
    scale[i] = 0.5 * (sigma[i] + std::sqrt(sigma[i] * sigma[i] + 2.0 * lambda));
  // svd.matrixU() is V and svd.matrixV() is R in the V S R^H naming above.
  CMatrix w = svd.matrixV() * scale.asDiagonal() * svd.matrixU().adjoint() * factor.l_inv;
  return {std::move(w), TransformMode::WellConditioned};
}

inline Transform update_transform_wellcond(const CMatrix& x, const CMatrix& b, double lambda,
                                           LFactor kind = LFactor::EvdSqrt) {
  return update_transform_wellcond(x, b, lambda, TransformFactor::make(x, lambda, kind));
}

/// Unitary minimizer of ||W X - B||_F^2: with X B^H = U S V^H, W = V U^H.
inline Transform update_transform_unitary(const CMatrix& x, const CMatrix& b) {
  if (x.rows() != b.rows() || x.cols() != b.cols()) throw ConfigError("X and B shapes differ");
  Eigen::JacobiSVD<CMatrix> svd(x * b.adjoint(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  CMatrix w = svd.matrixV() * svd.matrixU().adjoint();
  return {std::move(w), TransformMode::Unitary};
}

/// Orthonormal DCT-II matrix of size m (rows are basis functions).
inline Eigen::MatrixXd dct_matrix(Index m) {
  Eigen::MatrixXd d(m, m);
  const double pi = std::acos(-1.0);
  for (Index k = 0; k < m; ++k) {
    const double a = k == 0 ? std::sqrt(1.0 / m) : std::sqrt(2.0 / m);
    for (Index i = 0; i < m; ++i) d(k, i) = a * std::cos(pi * (2.0 * i + 1.0) * k / (2.0 * m));
  }
  return d;
}

/// Patch-based 2D DCT, kron(D, D), matching the column-major in-patch layout.
inline Transform dct2_transform(Index side) {
  const Eigen::MatrixXd d = dct_matrix(side);
  const Index n = side * side;
  CMatrix w(n, n);
  for (Index p = 0; p < side; ++p)
    for (Index q = 0; q < side; ++q)
      for (Index r = 0; r < side; ++r)
        for (Index s = 0; s < side; ++s) w(p * side + r, q * side + s) = d(p, q) * d(r, s);
  return {std::move(w), TransformMode::Unitary};
}

}  // namespace tbcs
