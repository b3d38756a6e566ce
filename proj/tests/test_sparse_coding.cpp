#include "oracles.hpp"
#include "tbcs/sparse_coding.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace tbcs;

TEST(ProjectSL0, AlreadyFeasibleIsUnchanged) {
  CMatrix z = CMatrix::Zero(3, 4);
  z(0, 1) = 2.0;
  z(2, 3) = Complex(0, -1);
  EXPECT_EQ(project_s_l0(z, 2).data, z);
  EXPECT_EQ(project_s_l0(z, 5).data, z);
}

TEST(ProjectSL0, ZeroBudget) {
  std::mt19937_64 gen(1);
  EXPECT_EQ(project_s_l0(oracle::random_complex(3, 3, gen), 0).data, CMatrix::Zero(3, 3));
}

TEST(ProjectSL0, SmallExample) {
  CMatrix z(2, 2);
  z << 3.0, -1.0, 0.5, Complex(0, 2);
  CMatrix expect = CMatrix::Zero(2, 2);
  expect(0, 0) = 3.0;
  expect(1, 1) = Complex(0, 2);
  const SparseCodes b = project_s_l0(z, 2);
  EXPECT_EQ(b.data, expect);
  EXPECT_EQ(oracle::exhaustive_sparse_project(z, 2), expect);
  EXPECT_EQ(b.budget, 2);
}

TEST(ProjectSL0, TiesKeepLowestIndex) {
  CMatrix z(2, 3);
  z << 1.0, Complex(0, 1), -1.0, 1.0, 2.0, Complex(0, -1);
  // |z| = [1 1 1; 1 2 1]; s = 3 keeps (1,1) then (0,0), (0,1).
  CMatrix expect = CMatrix::Zero(2, 3);
  expect(1, 1) = 2.0;
  expect(0, 0) = 1.0;
  expect(0, 1) = Complex(0, 1);
  EXPECT_EQ(project_s_l0(z, 3).data, expect);
  EXPECT_EQ(oracle::exhaustive_sparse_project(z, 3), expect);
}

TEST(ProjectSL0, OutOfRangeBudget) {
  const CMatrix z = CMatrix::Ones(2, 2);
  EXPECT_THROW(project_s_l0(z, -1), ArgumentError);
  EXPECT_THROW(project_s_l0(z, 5), ArgumentError);
}

TEST(ProjectSL0, MatchesExhaustiveOnLatticeInstances) {
  // Entries from {0, +-1, +-2}; heavy ties.
  std::mt19937_64 gen(11);
  std::uniform_int_distribution<int> pick(-2, 2);
  for (int trial = 0; trial < 300; ++trial) {
    CMatrix z(2, 3);
    for (Index i = 0; i < 6; ++i) z(i) = double(pick(gen));
    for (Index s = 0; s <= 6; ++s) EXPECT_EQ(project_s_l0(z, s).data, oracle::exhaustive_sparse_project(z, s));
  }
}

TEST(ProjectSL0, PropertiesOnRandomInstances) {
  std::mt19937_64 gen(12);
  for (int trial = 0; trial < 50; ++trial) {
    const CMatrix z = oracle::random_complex(4, 7, gen);
    for (Index s : {0, 1, 5, 13, 28}) {
      const SparseCodes b = project_s_l0(z, s);
      EXPECT_LE(b.nonzeros(), s);
      EXPECT_EQ(project_s_l0(b.data, s).data, b.data);
      EXPECT_LE(b.data.norm(), z.norm());
      for (Index i = 0; i < z.size(); ++i)
        if (b.data(i) != Complex(0.0)) EXPECT_EQ(b.data(i), z(i));
    }
  }
}

TEST(HardThreshold, Example) {
  CMatrix z(1, 3);
  z << 0.5, 1.0, -2.0;
  CMatrix expect(1, 3);
  expect << 0.0, 1.0, -2.0;
  EXPECT_EQ(hard_threshold(z, 1.0).data, expect);
  EXPECT_FALSE(hard_threshold(z, 1.0).budget.has_value());
}

TEST(HardThreshold, ZeroInput) { EXPECT_EQ(hard_threshold(CMatrix::Zero(3, 2), 0.1).data, CMatrix::Zero(3, 2)); }

TEST(HardThreshold, NonPositiveEta) {
  EXPECT_THROW(hard_threshold(CMatrix::Ones(2, 2), 0.0), ArgumentError);
  EXPECT_THROW(hard_threshold(CMatrix::Ones(2, 2), -1.0), ArgumentError);
}

TEST(HardThreshold, MatchesEntrywiseEnumeration) {
  std::mt19937_64 gen(13);
  for (int trial = 0; trial < 100; ++trial) {
    const CMatrix z = oracle::random_complex(3, 3, gen);
    const CMatrix b = hard_threshold(z, 0.7).data;
    EXPECT_EQ(b, oracle::entrywise_threshold(z, 0.7));
    EXPECT_EQ(hard_threshold(b, 0.7).data, b);
  }
}
