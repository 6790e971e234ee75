#include <algorithm>
#include <set>

#include <gtest/gtest.h>

#include "alfs/baselines.hpp"
#include "oracles.hpp"

namespace {

using namespace alfs;

MatrixXd diag3() {
  MatrixXd x = MatrixXd::Zero(3, 3);
  x.diagonal() << 3, 2, 1;
  return x;
}

TEST(RandomSampling, Examples) {
  EXPECT_EQ(random_sampling(5, 5, 1), (IndexList{0, 1, 2, 3, 4}));
  EXPECT_EQ(random_sampling(100, 7, 42), random_sampling(100, 7, 42));
  EXPECT_NE(random_sampling(100, 7, 42), random_sampling(100, 7, 43));
  EXPECT_THROW(random_sampling(3, 4, 0), ValidationError);
  EXPECT_TRUE(random_sampling(3, 0, 0).empty());
}

TEST(RandomSampling, SortedDistinctInRange) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const IndexList s = random_sampling(20, 8, seed);
    ASSERT_EQ(s.size(), 8u);
    EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
    EXPECT_EQ(std::set<Index>(s.begin(), s.end()).size(), 8u);
    EXPECT_GE(s.front(), 0);
    EXPECT_LT(s.back(), 20);
  }
}

TEST(RandomSampling, UniformFrequencies) {
  const int draws = 10000;
  std::vector<int> counts(4, 0);
  for (int t = 0; t < draws; ++t) ++counts[static_cast<std::size_t>(random_sampling(4, 1, static_cast<std::uint64_t>(t))[0])];
  const double sigma = std::sqrt(draws * 0.25 * 0.75);
  for (int c : counts) EXPECT_LE(std::abs(c - draws / 4.0), 3.0 * sigma) << c;
}

TEST(VarianceFeatures, Examples) {
  MatrixXd x(3, 4);
  x << 1, 1, 1, 1,  //
      0, std::sqrt(20.0), 0, -std::sqrt(20.0),  //
      1, 3, 1, 3;
  const VectorXd v = feature_variances(x);
  EXPECT_NEAR(v(0), 0.0, 1e-15);
  EXPECT_GT(v(1), v(2));
  EXPECT_EQ(variance_feature_select(x, 2), (IndexList{1, 2}));
  EXPECT_EQ(variance_feature_select(x, 3), (IndexList{0, 1, 2}));
  EXPECT_THROW(variance_feature_select(x, 4), ValidationError);
}

TEST(VarianceFeatures, ConstantNeverSelectedWhileAlternativesRemain) {
  Rng rng(1);
  for (int k = 0; k < 20; ++k) {
    MatrixXd x = gaussian_matrix(rng, 6, 10);
    const Index c = static_cast<Index>(uniform_below(rng, 6));
    x.row(c).setConstant(7.0);
    const IndexList picked = variance_feature_select(x, 5);
    EXPECT_EQ(std::count(picked.begin(), picked.end(), c), 0);
  }
}

TEST(VarianceFeatures, TiesByAscendingIndex) {
  MatrixXd x(3, 2);
  x << 1, -1, 2, -2, 1, -1;
  EXPECT_EQ(variance_feature_select(x, 2), (IndexList{0, 1}));
  EXPECT_EQ(variance_feature_select(x, 1), (IndexList{1}));
}

TEST(LeverageScores, Examples) {
  const LeverageScores s = leverage_scores(diag3(), 2);
  EXPECT_NEAR((s.column - Eigen::Vector3d(1, 1, 0)).norm(), 0.0, 1e-12);
  EXPECT_NEAR((s.row - Eigen::Vector3d(1, 1, 0)).norm(), 0.0, 1e-12);
  EXPECT_FALSE(s.degenerate);

  Rng rng(2);
  const MatrixXd low = gaussian_matrix(rng, 5, 2) * gaussian_matrix(rng, 2, 7);
  const LeverageScores r = leverage_scores(low, 2);
  EXPECT_NEAR(r.column.sum(), 2.0, 1e-12);
  EXPECT_NEAR(r.row.sum(), 2.0, 1e-12);
}

TEST(LeverageScores, RandomSumsAndDirectSvd) {
  Rng rng(3);
  const MatrixXd x = gaussian_matrix(rng, 6, 8);
  const LeverageScores s = leverage_scores(x, 3);
  EXPECT_NEAR(s.column.sum(), 3.0, 1e-8);
  EXPECT_NEAR(s.row.sum(), 3.0, 1e-8);
  Eigen::BDCSVD<MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  EXPECT_NEAR((s.column - svd.matrixV().leftCols(3).rowwise().squaredNorm()).norm(), 0.0, 1e-10);
  EXPECT_NEAR((s.row - svd.matrixU().leftCols(3).rowwise().squaredNorm()).norm(), 0.0, 1e-10);
}

TEST(LeverageScores, DegeneracyFlagAndBounds) {
  EXPECT_TRUE(leverage_scores(MatrixXd::Identity(3, 3), 2).degenerate);
  EXPECT_THROW(leverage_scores(diag3(), 4), ValidationError);
  EXPECT_THROW(leverage_scores(diag3(), 0), ValidationError);
}

TEST(Rcur, FullSelectionIsExact) {
  Rng rng(4);
  const MatrixXd x = gaussian_matrix(rng, 5, 7);
  for (Index k = 1; k <= 5; ++k) {
    RcurConfig cfg;
    cfg.k = k;
    cfg.m = 7;
    cfg.r = 5;
    cfg.exact_count = true;
    cfg.seed = static_cast<std::uint64_t>(k);
    const RcurResult res = rcur(x, cfg);
    EXPECT_EQ(res.column_indices.size(), 7u);
    EXPECT_NEAR(res.err, 0.0, 1e-10);
  }
}

TEST(Rcur, DiagonalClosedForm) {
  RcurConfig cfg;
  cfg.k = 1;
  const RcurResult res = rcur(diag3(), cfg);
  EXPECT_EQ(res.column_indices, (IndexList{0}));
  EXPECT_EQ(res.row_indices, (IndexList{0}));
  EXPECT_NEAR(res.err, 5.0, 1e-12);
  EXPECT_NEAR(res.svd_err_k, 5.0, 1e-12);
}

MatrixXd rank3_plus_noise(std::uint64_t seed) {
  Rng rng(seed);
  return gaussian_matrix(rng, 30, 3) * gaussian_matrix(rng, 3, 40) + 0.05 * gaussian_matrix(rng, 30, 40);
}

TEST(Rcur, RelativeErrorOnLowRankPlusNoise) {
  int good = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const MatrixXd x = rank3_plus_noise(seed);
    RcurConfig cfg;
    cfg.k = 3;
    cfg.m = 20;
    cfg.r = 20;
    cfg.seed = seed;
    const RcurResult res = rcur(x, cfg);
    good += res.err <= 2.0 * res.svd_err_k;
    EXPECT_GE(res.err, res.lower_bound);
  }
  EXPECT_GE(good, 8);
}

TEST(Rcur, StructuralInvariants) {
  Rng rng(5);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const MatrixXd x = gaussian_matrix(rng, 6, 9);
    RcurConfig cfg;
    cfg.k = 2;
    cfg.m = 5;
    cfg.r = 4;
    cfg.seed = seed;
    cfg.exact_count = seed % 2 == 0;
    const RcurResult res = rcur(x, cfg);
    for (const IndexList* idx : {&res.column_indices, &res.row_indices}) {
      EXPECT_TRUE(std::is_sorted(idx->begin(), idx->end()));
      EXPECT_EQ(std::set<Index>(idx->begin(), idx->end()).size(), idx->size());
    }
    if (cfg.exact_count) {
      EXPECT_EQ(res.column_indices.size(), 5u);
      EXPECT_EQ(res.row_indices.size(), 4u);
    }
    for (std::size_t k = 0; k < res.column_indices.size(); ++k)
      EXPECT_EQ(res.c.col(static_cast<Index>(k)), x.col(res.column_indices[k]));
    for (std::size_t k = 0; k < res.row_indices.size(); ++k)
      EXPECT_EQ(res.r.row(static_cast<Index>(k)), x.row(res.row_indices[k]));
    const auto q = static_cast<Index>(std::min(res.column_indices.size(), res.row_indices.size()));
    EXPECT_NEAR(res.lower_bound, oracle::rank_q_tail(x, q), 1e-9);
    EXPECT_GE(res.err, res.lower_bound);
    EXPECT_NEAR(res.err, (x - res.c * res.u * res.r).squaredNorm(), 1e-12);
  }
}

TEST(Rcur, DeterministicPerSeed) {
  Rng rng(6);
  const MatrixXd x = gaussian_matrix(rng, 8, 10);
  RcurConfig cfg;
  cfg.k = 2;
  cfg.m = 4;
  cfg.r = 3;
  cfg.seed = 77;
  const RcurResult a = rcur(x, cfg), b = rcur(x, cfg);
  EXPECT_EQ(a.column_indices, b.column_indices);
  EXPECT_EQ(a.row_indices, b.row_indices);
  EXPECT_EQ(a.err, b.err);
}

TEST(Rcur, ConfigErrors) {
  RcurConfig cfg;
  cfg.eps = 1.0;
  EXPECT_THROW(rcur(diag3(), cfg), ValidationError);
  cfg = RcurConfig{};
  cfg.m = 4;
  EXPECT_THROW(rcur(diag3(), cfg), ValidationError);
  EXPECT_THROW(rcur(MatrixXd::Zero(3, 3), RcurConfig{}), NumericalError);
}

}  // namespace
