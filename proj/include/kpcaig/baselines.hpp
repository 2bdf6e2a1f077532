#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string_view>
#include <thread>
#include <vector>

#include "kpcaig/error.hpp"
#include "kpcaig/kernel.hpp"

namespace kpcaig {

enum class BaselineMethod { laplacian, kpca_permute };
enum class ScoreDirection { lower_is_better, higher_is_better };

inline std::string_view to_string(BaselineMethod method) {
  return method == BaselineMethod::laplacian ? "laplacian" : "permute";
}

struct BaselineRanking {
  BaselineMethod method = BaselineMethod::laplacian;
  Eigen::VectorXd scores;
  std::vector<std::size_t> order;
  ScoreDirection direction = ScoreDirection::lower_is_better;
};

/// How a permuted kernel matrix is compared with the original one.
enum class PermuteDistance {
  subspace,        // (1/sqrt 2) |UU' - VV'|_F on the leading-q eigenspaces
  gram_frobenius,  // |Kc - Kc'|_F between the centered Gram matrices
};

namespace detail {

inline bool is_constant(const Eigen::Ref<const Eigen::VectorXd>& column) {
  for (Eigen::Index i = 1; i < column.size(); ++i) {
    if (column(i) != column(0)) return false;
  }
  return true;
}

// Order by preferred direction, ties by index; `sentinel` entries go last.
inline std::vector<std::size_t> baseline_order(const Eigen::VectorXd& scores, ScoreDirection direction,
                                               const std::vector<char>& sentinel) {
  std::vector<std::size_t> order(static_cast<std::size_t>(scores.size()));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (sentinel[a] != sentinel[b]) return sentinel[b] != 0;
    if (sentinel[a]) return false;
    const double sa = scores(static_cast<Eigen::Index>(a));
    const double sb = scores(static_cast<Eigen::Index>(b));
    return direction == ScoreDirection::lower_is_better ? sa < sb : sa > sb;
  });
  return order;
}

// Eigenvectors of the `q` largest eigenvalues of a symmetric matrix.
inline Eigen::MatrixXd leading_eigenvectors(const Eigen::MatrixXd& symmetric, Eigen::Index q) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric);
  if (solver.info() != Eigen::Success) throw DegenerateDataError("eigendecomposition did not converge");
  return solver.eigenvectors().rightCols(q).rowwise().reverse();
}

}  // namespace detail

/// Laplacian score of every column of `data` (rows are samples).
///
/// Builds a symmetric k-nearest-neighbour graph with heat weights exp(-|xi - xj|^2 / t).
/// The score is f'Lf / f'Df after removing the D-weighted mean; lower is better.
/// Constant columns score +infinity and are ordered last. `t` defaults to the mean
/// squared pairwise distance.
inline BaselineRanking laplacian_score(const Eigen::MatrixXd& data, std::size_t k_nn = 5,
                                       std::optional<double> t = std::nullopt) {
  const Eigen::Index n = data.rows();
  const Eigen::Index p = data.cols();
  if (n < 2) throw InputError("laplacian score needs at least two samples");
  if (k_nn < 1 || k_nn >= static_cast<std::size_t>(n)) throw InputError("k_nn must lie in [1, n-1]");

  const Eigen::MatrixXd d2 = pairwise_statistic(KernelSpec::rbf(1.0), data);
  double width = 0.0;
  if (t) {
    width = *t;
  } else {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) acc += d2(i, j);
    }
    width = acc / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
  }
  if (!(width > 0.0) || !std::isfinite(width)) throw DegenerateDataError("heat-kernel width must be positive");

  Eigen::MatrixXd weights = Eigen::MatrixXd::Zero(n, n);
  std::vector<Eigen::Index> candidates(static_cast<std::size_t>(n - 1));
  for (Eigen::Index i = 0; i < n; ++i) {
    candidates.clear();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) candidates.push_back(j);
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return d2(i, a) < d2(i, b); });
    for (std::size_t r = 0; r < k_nn; ++r) {
      const Eigen::Index j = candidates[r];
      const double w = std::exp(-d2(i, j) / width);
      weights(i, j) = w;
      weights(j, i) = w;
    }
  }
  const Eigen::VectorXd degree = weights.rowwise().sum();
  if ((degree.array() <= 0.0).any()) throw DegenerateDataError("neighbour graph has a node with zero degree");
  const double volume = degree.sum();

  BaselineRanking ranking;
  ranking.method = BaselineMethod::laplacian;
  ranking.direction = ScoreDirection::lower_is_better;
  ranking.scores.resize(p);
  std::vector<char> constant(static_cast<std::size_t>(p), 0);
  for (Eigen::Index j = 0; j < p; ++j) {
    const Eigen::VectorXd f = data.col(j);
    if (detail::is_constant(f)) {
      constant[static_cast<std::size_t>(j)] = 1;
      ranking.scores(j) = std::numeric_limits<double>::infinity();
      continue;
    }
    const Eigen::VectorXd centered = f.array() - f.dot(degree) / volume;
    const double denominator = centered.dot(degree.cwiseProduct(centered));
    // f'Lf = f'Df - f'Sf
    const double numerator = denominator - centered.dot(weights * centered);
    ranking.scores(j) = denominator > 0.0 ? numerator / denominator : std::numeric_limits<double>::infinity();
    if (!(denominator > 0.0)) constant[static_cast<std::size_t>(j)] = 1;
  }
  ranking.order = detail::baseline_order(ranking.scores, ranking.direction, constant);
  return ranking;
}

/// Distance between the subspaces spanned by the orthonormal columns of `u` and `v`:
/// (1/sqrt 2) |UU' - VV'|_F. Lies in [0, sqrt(q)] and is exactly 0 for identical inputs.
inline double subspace_distance(const Eigen::MatrixXd& u, const Eigen::MatrixXd& v) {
  if (u.rows() != v.rows() || u.cols() != v.cols()) throw InputError("subspace bases must have equal shape");
  const Eigen::MatrixXd diff = u * u.transpose() - v * v.transpose();
  return diff.norm() / std::sqrt(2.0);
}

/// Seed for the permutation of feature `feature` in draw `draw`.
inline std::mt19937_64 permutation_stream(std::uint64_t seed, std::size_t feature, std::size_t draw) {
  std::seed_seq sequence{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32U),
                         static_cast<std::uint32_t>(feature), static_cast<std::uint32_t>(draw)};
  return std::mt19937_64(sequence);
}

/// Scores each feature by how far permuting its values across samples moves the
/// kernel structure; higher is better. Each (feature, draw) pair has its own seeded
/// stream, so the result does not depend on `threads`.
inline BaselineRanking permutation_importance(const Eigen::MatrixXd& data, const KernelSpec& spec, std::size_t q,
                                              std::size_t n_perm, std::uint64_t seed,
                                              PermuteDistance distance = PermuteDistance::subspace,
                                              unsigned threads = 1) {
  spec.validate();
  const Eigen::Index n = data.rows();
  const Eigen::Index p = data.cols();
  if (n_perm < 1) throw InputError("n_perm must be at least 1");
  if (n < 2) throw InputError("permutation importance needs at least two samples");
  if (q < 1 || q > static_cast<std::size_t>(n - 1)) throw InputError("q must lie in [1, n-1]");

  const Eigen::MatrixXd statistic = pairwise_statistic(spec, data);
  auto centered_from = [&](const Eigen::MatrixXd& s) {
    GramMatrix k{s.unaryExpr([&](double v) { return detail::kernel_from_statistic(spec, v); }), false};
    return center_gram(k).values;
  };
  const Eigen::MatrixXd base = centered_from(statistic);
  const auto qi = static_cast<Eigen::Index>(q);
  const Eigen::MatrixXd base_basis = detail::leading_eigenvectors(base, qi);
  const bool rbf = spec.family == KernelFamily::rbf;

  BaselineRanking ranking;
  ranking.method = BaselineMethod::kpca_permute;
  ranking.direction = ScoreDirection::higher_is_better;
  ranking.scores = Eigen::VectorXd::Zero(p);
  std::vector<char> constant(static_cast<std::size_t>(p), 0);

  auto work = [&](Eigen::Index begin, Eigen::Index end) {
    Eigen::MatrixXd permuted_statistic(n, n);
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    for (Eigen::Index j = begin; j < end; ++j) {
      const Eigen::VectorXd column = data.col(j);
      if (detail::is_constant(column)) {
        constant[static_cast<std::size_t>(j)] = 1;
        continue;
      }
      double total = 0.0;
      for (std::size_t draw = 0; draw < n_perm; ++draw) {
        std::iota(perm.begin(), perm.end(), Eigen::Index{0});
        auto rng = permutation_stream(seed, static_cast<std::size_t>(j), draw);
        std::shuffle(perm.begin(), perm.end(), rng);
        Eigen::VectorXd shuffled(n);
        for (Eigen::Index i = 0; i < n; ++i) shuffled(i) = column(perm[static_cast<std::size_t>(i)]);
        if (shuffled == column) continue;  // identical kernel, distance 0
        // Only the contribution of column j to each pairwise statistic changes.
        for (Eigen::Index b = 0; b < n; ++b) {
          for (Eigen::Index a = 0; a < n; ++a) {
            const double before = rbf ? (column(a) - column(b)) * (column(a) - column(b)) : column(a) * column(b);
            const double after =
                rbf ? (shuffled(a) - shuffled(b)) * (shuffled(a) - shuffled(b)) : shuffled(a) * shuffled(b);
            permuted_statistic(a, b) = statistic(a, b) - before + after;
          }
        }
        const Eigen::MatrixXd moved = centered_from(permuted_statistic);
        total += distance == PermuteDistance::subspace
                     ? subspace_distance(base_basis, detail::leading_eigenvectors(moved, qi))
                     : (base - moved).norm();
      }
      ranking.scores(j) = total / static_cast<double>(n_perm);
    }
  };

  threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(std::max<Eigen::Index>(p, 1))));
  if (threads == 1) {
    work(0, p);
  } else {
    std::vector<std::jthread> pool;
    const Eigen::Index block = (p + threads - 1) / threads;
    for (Eigen::Index begin = 0; begin < p; begin += block) pool.emplace_back(work, begin, std::min(p, begin + block));
  }
  ranking.order = detail::baseline_order(ranking.scores, ranking.direction, constant);
  return ranking;
}

}  // namespace kpcaig
