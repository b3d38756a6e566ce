#include "oracles.hpp"
#include "tbcs/transform.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace tbcs;

namespace {

// Golden-section minimization on [a, b].
template <typename F>
double golden_min(F f, double a, double b) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  while (b - a > 1e-12) {
    if (f(c) < f(d)) b = d;
    else a = c;
    c = b - g * (b - a);
    d = a + g * (b - a);
  }
  return 0.5 * (a + b);
}

}  // namespace

TEST(EvalQ, Examples) {
  EXPECT_DOUBLE_EQ(eval_Q(CMatrix::Identity(5, 5)), 2.5);
  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 0) = 2.0;
  d(1, 1) = 1.0;
  EXPECT_NEAR(eval_Q(d), 2.5 - std::log(2.0), 1e-15);
  std::mt19937_64 gen(1);
  EXPECT_NEAR(eval_Q(oracle::random_unitary(6, gen)), 3.0, 1e-12);
  EXPECT_TRUE(std::isinf(eval_Q(CMatrix::Zero(3, 3))));
}

TEST(EvalQ, MatchesDefinitionAndLowerBound) {
  std::mt19937_64 gen(2);
  for (int t = 0; t < 20; ++t) {
    const CMatrix w = oracle::random_complex(4, 4, gen);
    const double direct = -std::log(std::abs(w.determinant())) + 0.5 * w.squaredNorm();
    EXPECT_NEAR(eval_Q(w), direct, 1e-11 * std::abs(direct));
    EXPECT_GE(eval_Q(w), 2.0);
  }
}

TEST(WellCond, ScalarClosedFormAndGoldenSection) {
  for (double x : {0.3, 1.0, 2.5})
    for (double b : {0.1, 1.7})
      for (double lambda : {0.05, 1.0, 4.0}) {
        CMatrix xm(1, 1), bm(1, 1);
        xm(0, 0) = x;
        bm(0, 0) = b;
        const double w = update_transform_wellcond(xm, bm, lambda).matrix(0, 0).real();
        const double a = x * x + 0.5 * lambda;
        const double formula = (x * b + std::sqrt(x * x * b * b + 2.0 * lambda * a)) / (2.0 * a);
        EXPECT_NEAR(w, formula, 1e-12);
        auto obj = [&](double v) { return std::pow(v * x - b, 2) + 0.5 * lambda * v * v - lambda * std::log(v); };
        EXPECT_NEAR(w, golden_min(obj, 1e-6, 10.0), 1e-6);
      }
}

TEST(WellCond, IdentityDataGivesScaledIdentity) {
  const double lambda = 0.3;
  const CMatrix eye = CMatrix::Identity(4, 4);
  const CMatrix w = update_transform_wellcond(eye, eye, lambda).matrix;
  const double a = 1.0 + 0.5 * lambda;
  const double s = (1.0 + std::sqrt(1.0 + 2.0 * lambda * a)) / (2.0 * a);
  EXPECT_LE((w - s * eye).norm(), 1e-12);
  EXPECT_LE((update_transform_wellcond(eye, eye, 1e-12).matrix - eye).norm(), 1e-6);
}

TEST(WellCond, FirstOrderConditionAndDescent) {
  std::mt19937_64 gen(3);
  for (Index n : {2, 4, 8}) {
    for (int t = 0; t < 5; ++t) {
      const CMatrix x = oracle::random_complex(n, 3 * n, gen);
      const CMatrix b = oracle::random_complex(n, 3 * n, gen);
      const double lambda = 0.5 + t;
      const CMatrix w = update_transform_wellcond(x, b, lambda).matrix;
      EXPECT_LE(oracle::transform_first_order_residual(w, x, b, lambda), 1e-8);
      EXPECT_GE(eval_Q(w), 0.5 * n);
      const double best = transform_objective(w, x, b, lambda);
      for (int k = 0; k < 20; ++k)
        EXPECT_LE(best, transform_objective(oracle::random_complex(n, n, gen), x, b, lambda));
      // Perturbations cannot improve either.
      for (int k = 0; k < 20; ++k)
        EXPECT_LE(best, transform_objective(w + 1e-3 * oracle::random_complex(n, n, gen), x, b, lambda));
    }
  }
}

TEST(WellCond, RandomPointIsNotStationary) {
  std::mt19937_64 gen(4);
  const CMatrix x = oracle::random_complex(4, 10, gen);
  const CMatrix b = oracle::random_complex(4, 10, gen);
  EXPECT_GT(oracle::transform_first_order_residual(oracle::random_complex(4, 4, gen), x, b, 1.0), 1e-2);
}

TEST(WellCond, LFactorInvariance) {
  std::mt19937_64 gen(5);
  for (Index n : {2, 4, 8}) {
    const CMatrix x = oracle::random_complex(n, 5 * n, gen);
    const CMatrix b = oracle::random_complex(n, 5 * n, gen);
    const CMatrix w1 = update_transform_wellcond(x, b, 0.7, LFactor::EvdSqrt).matrix;
    const CMatrix w2 = update_transform_wellcond(x, b, 0.7, LFactor::Cholesky).matrix;
    EXPECT_LE((w1 - w2).norm(), 1e-10 * w1.norm());
  }
}

TEST(WellCond, RejectsBadInput) {
  const CMatrix x = CMatrix::Ones(2, 3);
  EXPECT_THROW(update_transform_wellcond(x, x, 0.0), ArgumentError);
  EXPECT_THROW(update_transform_wellcond(x, CMatrix::Ones(2, 4), 1.0), ConfigError);
  CMatrix bad = x;
  bad(0, 0) = Complex(std::nan(""), 0);
  EXPECT_THROW(update_transform_wellcond(bad, x, 1.0), ArgumentError);
}

TEST(Unitary, IdentityAndPermutation) {
  std::mt19937_64 gen(6);
  const CMatrix x = oracle::random_complex(4, 12, gen);
  EXPECT_LE((update_transform_unitary(x, x).matrix - CMatrix::Identity(4, 4)).norm(), 1e-12);

  CMatrix perm = CMatrix::Zero(4, 4);
  perm(0, 2) = perm(1, 0) = perm(2, 3) = perm(3, 1) = 1.0;
  const Transform w = update_transform_unitary(x, perm * x);
  EXPECT_LE((w.matrix - perm).norm(), 1e-12);
  EXPECT_LE((w.matrix * x - perm * x).norm(), 1e-11);
}

TEST(Unitary, BeatsRandomUnitaries) {
  std::mt19937_64 gen(7);
  const CMatrix x = oracle::random_complex(2, 5, gen);
  const CMatrix b = oracle::random_complex(2, 5, gen);
  const Transform w = update_transform_unitary(x, b);
  EXPECT_LE(w.unitarity_error(), 1e-10 * 2);
  const double best = (w.matrix * x - b).squaredNorm();
  for (int k = 0; k < 10000; ++k) {
    const CMatrix u = oracle::random_unitary(2, gen);
    ASSERT_LE(best, (u * x - b).squaredNorm() + 1e-12);
  }
}

TEST(Dct, OrthonormalKronecker) {
  for (Index side : {1, 2, 3, 6}) {
    const Transform w = dct2_transform(side);
    EXPECT_LE(w.unitarity_error(), 1e-12);
    const Eigen::MatrixXd d = dct_matrix(side);
    // Independent Kronecker product with column-major vectorization.
    Eigen::MatrixXd kron(side * side, side * side);
    for (Index i = 0; i < side; ++i)
      for (Index j = 0; j < side; ++j) kron.block(i * side, j * side, side, side) = d(i, j) * d;
    EXPECT_LE((w.matrix.real() - kron).norm(), 1e-14);
  }
  // First DCT atom is constant.
  EXPECT_NEAR(dct_matrix(4)(0, 3), 0.5, 1e-15);
}
