// Sanity checks on the oracles themselves.

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace tbcs;

TEST(Oracle, DenseGUnitaryIsNTimesIdentity) {
  std::mt19937_64 gen(1);
  const CMatrix u = oracle::random_unitary(4, gen);
  const CMatrix g = oracle::dense_G(u, {2, 1, true}, {5, 4});
  EXPECT_LE((g - 4.0 * CMatrix::Identity(20, 20)).norm(), 1e-12);
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<CMatrix>(oracle::dense_G(CMatrix::Identity(4, 4) + 0.3 * oracle::random_complex(4, 4, gen),
                                                                    {2, 1, true}, {5, 4}))
                .eigenvalues()
                .minCoeff(),
            0.0);
  EXPECT_THROW(oracle::dense_G(u, {2, 1, true}, {65, 64}), std::length_error);
}

TEST(Oracle, ConstrainedSolveInactiveAndActive) {
  std::mt19937_64 gen(2);
  const CMatrix w = CMatrix::Identity(4, 4) + 0.3 * oracle::random_complex(4, 4, gen);
  const CMatrix b = oracle::random_complex(4, 16, gen);
  const CMatrix a = oracle::random_complex(6, 16, gen);
  const CVector y = oracle::random_complex(6, 1, gen);
  const oracle::DenseProblem prob = oracle::dense_problem(w, b, a, {2, 1, true}, {4, 4});
  const CVector x = oracle::dense_constrained_solve(prob, 2.0, y, 1e9);
  const CMatrix m = prob.g + 2.0 * a.adjoint() * a;
  EXPECT_LE((m * x - (prob.rhs + 2.0 * a.adjoint() * y)).norm(), 1e-10 * x.norm());
  const double c = 0.3 * x.norm();
  double mu = 0.0;
  const CVector xc = oracle::dense_constrained_solve(prob, 2.0, y, c, &mu);
  EXPECT_NEAR(xc.norm(), c, 1e-10 * c);
  EXPECT_GT(mu, 0.0);
}

TEST(Oracle, ExhaustiveProjectEdgeCases) {
  std::mt19937_64 gen(3);
  const CMatrix z = oracle::random_complex(2, 3, gen);
  EXPECT_EQ(oracle::exhaustive_sparse_project(z, 6), z);
  EXPECT_EQ(oracle::exhaustive_sparse_project(z, 0), CMatrix::Zero(2, 3));
  EXPECT_THROW(oracle::exhaustive_sparse_project(CMatrix::Zero(4, 4), 2), std::length_error);
}

TEST(Oracle, FirstOrderResidualScalesWithLambda) {
  // Stationary at lambda is not stationary at 2 lambda.
  const CMatrix x = 1.5 * CMatrix::Identity(2, 2);
  const CMatrix b = CMatrix::Identity(2, 2);
  const double lambda = 0.4;
  const double a = 2.25 + 0.5 * lambda;
  const double s = (1.5 + std::sqrt(2.25 + 2.0 * lambda * a)) / (2.0 * a);
  const CMatrix w = s * CMatrix::Identity(2, 2);
  EXPECT_LE(oracle::transform_first_order_residual(w, x, b, lambda), 1e-15);
  EXPECT_GT(oracle::transform_first_order_residual(w, x, b, 2.0 * lambda), 1e-3);
  EXPECT_THROW(oracle::transform_first_order_residual(CMatrix::Zero(2, 2), x, b, 1.0), std::domain_error);
}

TEST(Oracle, NaiveDftInverts) {
  std::mt19937_64 gen(4);
  const CVector x = oracle::random_complex(15, 1, gen);
  EXPECT_LE((oracle::naive_dft2(oracle::naive_dft2(x, 3, 5), 3, 5, true) - x).norm(), 1e-13);
}

TEST(Oracle, RandomUnitary) {
  std::mt19937_64 gen(5);
  const CMatrix u = oracle::random_unitary(6, gen);
  EXPECT_LE((u.adjoint() * u - CMatrix::Identity(6, 6)).norm(), 1e-13);
}
