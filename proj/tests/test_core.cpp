// Copyright 2026 The mppca Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <mppca/core.hpp>
#include <mppca/random.hpp>

#include <gtest/gtest.h>

#include "oracles.hpp"

#include <algorithm>
#include <set>

using namespace mppca;

TEST(SortedEigen, DescendingWithReconstruction) {
  oracle::Gen gen(1);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = gen.matrix(6, 6);
    const Matrix s = a * a.transpose();
    const SymmetricEigen e = sorted_eigen(s);
    for (Index j = 1; j < 6; ++j) EXPECT_GE(e.values(j - 1), e.values(j));
    const Matrix rebuilt = e.vectors * e.values.asDiagonal() * e.vectors.transpose();
    EXPECT_LT((rebuilt - s).norm(), 1e-9 * s.norm());
  }
}

TEST(SortedEigen, LargestComponentIsPositive) {
  oracle::Gen gen(2);
  const Matrix a = gen.matrix(5, 5);
  const SymmetricEigen e = sorted_eigen(a * a.transpose());
  for (Index j = 0; j < 5; ++j) {
    Index arg = 0;
    e.vectors.col(j).cwiseAbs().maxCoeff(&arg);
    EXPECT_GT(e.vectors(arg, j), 0.0);
  }
}

TEST(SortedEigen, ExactTiesOrderedByFirstNonzeroIndex) {
  // diag(1, 3, 3): the two eigenvalue-3 vectors are e2 and e3 (in some order
  // from the solver); the tie rule puts e2 first.
  Matrix s = Matrix::Zero(3, 3);
  s(0, 0) = 1.0;
  s(1, 1) = 3.0;
  s(2, 2) = 3.0;
  const SymmetricEigen e = sorted_eigen(s);
  EXPECT_DOUBLE_EQ(e.values(0), 3.0);
  EXPECT_DOUBLE_EQ(e.values(1), 3.0);
  EXPECT_NEAR(std::abs(e.vectors(1, 0)), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(e.vectors(2, 1)), 1.0, 1e-12);
}

TEST(LogSumExp, MatchesDirectSumAndSurvivesUnderflow) {
  Vector v(3);
  v << 0.1, -2.0, 1.5;
  const double direct = std::log(std::exp(0.1) + std::exp(-2.0) + std::exp(1.5));
  EXPECT_NEAR(detail::log_sum_exp(v), direct, 1e-14);
  v << -1000.0, -1001.0, -1002.0;
  EXPECT_NEAR(detail::log_sum_exp(v), -1000.0 + std::log(1.0 + std::exp(-1.0) + std::exp(-2.0)), 1e-12);
  v.setConstant(-std::numeric_limits<double>::infinity());
  EXPECT_EQ(detail::log_sum_exp(v), -std::numeric_limits<double>::infinity());
}

TEST(Moments, MeanAndCovarianceMatchLoops) {
  oracle::Gen gen(3);
  const Matrix x = gen.matrix(50, 4);
  const Vector mean = column_mean(x);
  const Matrix cov = sample_covariance(x, mean);
  for (Index a = 0; a < 4; ++a) {
    double m = 0.0;
    for (Index n = 0; n < 50; ++n) m += x(n, a);
    EXPECT_NEAR(mean(a), m / 50.0, 1e-14);
  }
  for (Index a = 0; a < 4; ++a) {
    for (Index b = 0; b < 4; ++b) {
      double c = 0.0;
      for (Index n = 0; n < 50; ++n) c += (x(n, a) - mean(a)) * (x(n, b) - mean(b));
      EXPECT_NEAR(cov(a, b), c / 50.0, 1e-12);
    }
  }
  EXPECT_THROW(column_mean(Matrix(0, 3)), DataError);
}

TEST(Rng, DeterministicPerSeedAndStream) {
  Rng a(42, 1);
  Rng b(42, 1);
  Rng c(42, 2);
  Rng d(43, 1);
  bool differs_stream = false;
  bool differs_seed = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    differs_stream = differs_stream || x != c.next_u64();
    differs_seed = differs_seed || x != d.next_u64();
  }
  EXPECT_TRUE(differs_stream);
  EXPECT_TRUE(differs_seed);
}

TEST(Rng, DistributionsHaveExpectedMoments) {
  Rng rng(7);
  const int n = 200000;
  double su = 0.0;
  double sn = 0.0;
  double sn2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
    const double z = rng.normal();
    sn += z;
    sn2 += z * z;
  }
  EXPECT_NEAR(su / n, 0.5, 0.005);
  EXPECT_NEAR(sn / n, 0.0, 0.01);
  EXPECT_NEAR(sn2 / n, 1.0, 0.02);
}

TEST(Rng, BelowCategoricalAndShuffle) {
  Rng rng(9);
  std::vector<int> counts(3, 0);
  for (int i = 0; i < 30000; ++i) {
    const auto k = rng.below(3);
    ASSERT_LT(k, 3u);
    counts[k]++;
  }
  for (int c : counts) EXPECT_NEAR(c, 10000, 400);

  std::vector<int> cat(3, 0);
  for (int i = 0; i < 40000; ++i) cat[rng.categorical({1.0, 0.0, 3.0})]++;
  EXPECT_EQ(cat[1], 0);
  EXPECT_NEAR(cat[0] / 40000.0, 0.25, 0.01);

  std::vector<int> items{0, 1, 2, 3, 4, 5, 6, 7};
  rng.shuffle(items);
  EXPECT_EQ(std::set<int>(items.begin(), items.end()).size(), 8u);
}
