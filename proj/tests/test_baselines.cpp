#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"

using namespace kpcaig;

namespace {

// Two tight blobs in three dimensions, plus a cluster-indicator column and a noise column.
Eigen::MatrixXd blobs_with_indicator(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd x(40, 5);
  for (Eigen::Index i = 0; i < 40; ++i) {
    const double group = i < 20 ? 0.0 : 1.0;
    for (Eigen::Index k = 0; k < 3; ++k) x(i, k) = 6.0 * group + 0.3 * normal(rng);
    x(i, 3) = group;
    x(i, 4) = normal(rng);
  }
  return x;
}

double variance(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size());
}

}  // namespace

TEST(LaplacianScore, HandExpandedFourPointGraph) {
  // Nearest neighbours with k = 1: A-B at squared distance 1 and C-D at 4.
  Eigen::MatrixXd x(4, 2);
  x << 0, 0, 1, 0, 0, 3, 0, 5;
  const double t = 2.0;
  const BaselineRanking r = laplacian_score(x, 1, t);
  const double a = std::exp(-1.0 / t);
  const double c = std::exp(-4.0 / t);

  // Column 0 is (0, 1, 0, 0); only the A-B edge sees a difference.
  const double mu0 = a / (2 * a + 2 * c);
  const double num0 = a * 1.0;
  const double den0 = a * mu0 * mu0 + a * (1 - mu0) * (1 - mu0) + 2 * c * mu0 * mu0;
  EXPECT_NEAR(r.scores(0), num0 / den0, 1e-12);

  // Column 1 is (0, 0, 3, 5); only the C-D edge sees a difference.
  const double mu1 = (3 * c + 5 * c) / (2 * a + 2 * c);
  const double num1 = c * 4.0;
  const double den1 = 2 * a * mu1 * mu1 + c * (3 - mu1) * (3 - mu1) + c * (5 - mu1) * (5 - mu1);
  EXPECT_NEAR(r.scores(1), num1 / den1, 1e-12);
  EXPECT_EQ(r.direction, ScoreDirection::lower_is_better);
}

TEST(LaplacianScore, ClusterIndicatorBeatsNoise) {
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const BaselineRanking r = laplacian_score(blobs_with_indicator(seed), 5);
    wins += r.scores(3) < r.scores(4);
  }
  EXPECT_GE(wins, 48);
}

TEST(LaplacianScore, ConstantFeatureRanksLastWithInfiniteScore) {
  Eigen::MatrixXd x = oracle::random_matrix(15, 4, 1);
  x.col(0).setConstant(3.0);
  const BaselineRanking r = laplacian_score(x, 3);
  EXPECT_EQ(r.scores(0), std::numeric_limits<double>::infinity());
  EXPECT_EQ(r.order.back(), 0u);
}

TEST(LaplacianScore, InvariantToConstantShift) {
  const Eigen::MatrixXd x = oracle::random_matrix(25, 5, 2);
  const BaselineRanking base = laplacian_score(x, 5, 3.0);
  Eigen::MatrixXd shifted = x;
  // Shifting a column moves no pairwise distance, so the graph is unchanged.
  shifted.col(2).array() += 17.5;
  const BaselineRanking moved = laplacian_score(shifted, 5, 3.0);
  EXPECT_LT(std::abs(base.scores(2) - moved.scores(2)), 1e-10);
}

TEST(LaplacianScore, ValidatesArguments) {
  const Eigen::MatrixXd x = oracle::random_matrix(6, 2, 3);
  EXPECT_THROW(laplacian_score(x, 0), InputError);
  EXPECT_THROW(laplacian_score(x, 6), InputError);
  EXPECT_THROW(laplacian_score(Eigen::MatrixXd::Ones(6, 2), 2), DegenerateDataError);
}

TEST(SubspaceDistance, MetricProperties) {
  const Eigen::MatrixXd a = oracle::random_matrix(10, 3, 4).householderQr().householderQ() * Eigen::MatrixXd::Identity(10, 3);
  const Eigen::MatrixXd b = oracle::random_matrix(10, 3, 5).householderQr().householderQ() * Eigen::MatrixXd::Identity(10, 3);
  EXPECT_EQ(subspace_distance(a, a), 0.0);
  EXPECT_EQ(subspace_distance(a, b), subspace_distance(b, a));
  EXPECT_GE(subspace_distance(a, b), 0.0);
  EXPECT_LE(subspace_distance(a, b), std::sqrt(3.0) + 1e-12);
  Eigen::MatrixXd e1 = Eigen::MatrixXd::Zero(4, 1);
  Eigen::MatrixXd e2 = Eigen::MatrixXd::Zero(4, 1);
  e1(0, 0) = 1.0;
  e2(1, 0) = 1.0;
  EXPECT_NEAR(subspace_distance(e1, e2), 1.0, 1e-15);
  EXPECT_THROW(subspace_distance(e1, a), InputError);
}

TEST(PermutationImportance, ConstantFeatureScoresZeroAndRanksLast) {
  Eigen::MatrixXd x = oracle::random_matrix(12, 4, 6);
  x.col(1).setConstant(-1.0);
  for (PermuteDistance distance : {PermuteDistance::subspace, PermuteDistance::gram_frobenius}) {
    const BaselineRanking r = permutation_importance(x, KernelSpec::rbf(0.3), 2, 3, 7, distance);
    EXPECT_EQ(r.scores(1), 0.0);
    EXPECT_EQ(r.order.back(), 1u);
    EXPECT_EQ(r.direction, ScoreDirection::higher_is_better);
  }
}

TEST(PermutationImportance, MatchesFullRecomputation) {
  // The incremental pairwise update must equal refitting on the permuted column.
  const Eigen::MatrixXd x = oracle::random_matrix(9, 3, 8);
  for (const KernelSpec& spec : {KernelSpec::rbf(0.4), KernelSpec::linear(), KernelSpec::polynomial(2, 1.0)}) {
    const BaselineRanking r = permutation_importance(x, spec, 2, 1, 11, PermuteDistance::gram_frobenius);
    const Eigen::MatrixXd base = oracle::hkh(gram_matrix(spec, x).values);
    for (Eigen::Index j = 0; j < 3; ++j) {
      std::vector<Eigen::Index> perm(9);
      std::iota(perm.begin(), perm.end(), Eigen::Index{0});
      auto rng = permutation_stream(11, static_cast<std::size_t>(j), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      Eigen::MatrixXd moved = x;
      for (Eigen::Index i = 0; i < 9; ++i) moved(i, j) = x(perm[static_cast<std::size_t>(i)], j);
      const double expected = (base - oracle::hkh(gram_matrix(spec, moved).values)).norm();
      EXPECT_NEAR(r.scores(j), expected, 1e-10 * std::max(1.0, expected));
    }
  }
}

TEST(PermutationImportance, SeededAndThreadIndependent) {
  const Eigen::MatrixXd x = oracle::random_matrix(15, 7, 9);
  const BaselineRanking a = permutation_importance(x, KernelSpec::rbf(0.2), 2, 2, 42);
  const BaselineRanking b = permutation_importance(x, KernelSpec::rbf(0.2), 2, 2, 42);
  const BaselineRanking c = permutation_importance(x, KernelSpec::rbf(0.2), 2, 2, 42, PermuteDistance::subspace, 4);
  EXPECT_EQ(a.scores, b.scores);
  EXPECT_EQ(a.scores, c.scores);
  EXPECT_EQ(a.order, c.order);
}

TEST(PermutationImportance, InformativeFeatureScoresHighest) {
  int wins = 0;
  // Unstandardized: the group shift gives column 0 the largest variance.
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Dataset d = synthetic::two_groups_one_feature(40, 10, 2.0, seed);
    const KernelSpec spec = resolve_kernel(KernelSpec::rbf(1.0), SigmaMode::median(), d.matrix, 2);
    const BaselineRanking r = permutation_importance(d.matrix, spec, 2, 1, seed);
    wins += r.order.front() == 0;
  }
  EXPECT_GE(wins, 45);
}

TEST(PermutationImportance, MoreDrawsShrinkSeedVariance) {
  const Dataset d = standardize(synthetic::two_groups_one_feature(30, 6, 1.5, 3));
  const KernelSpec spec = resolve_kernel(KernelSpec::rbf(1.0), SigmaMode::median(), d.matrix, 2);
  std::vector<double> spread;
  for (std::size_t n_perm : {1u, 4u, 16u}) {
    std::vector<double> scores;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      scores.push_back(permutation_importance(d.matrix, spec, 2, n_perm, seed).scores(1));
    }
    spread.push_back(variance(scores));
  }
  EXPECT_GT(spread[0], spread[1]);
  EXPECT_GT(spread[1], spread[2]);
}

TEST(PermutationImportance, ValidatesArguments) {
  const Eigen::MatrixXd x = oracle::random_matrix(6, 2, 10);
  EXPECT_THROW(permutation_importance(x, KernelSpec::rbf(1.0), 2, 0, 1), InputError);
  EXPECT_THROW(permutation_importance(x, KernelSpec::rbf(1.0), 6, 1, 1), InputError);
}
