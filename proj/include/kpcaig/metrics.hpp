#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "kpcaig/error.hpp"

namespace kpcaig {

struct ClusteringResult {
  std::vector<int> labels;  // in [0, k)
  double inertia = 0.0;
  std::uint64_t seed = 0;
  std::size_t iterations = 0;
};

enum class NmiNormalization { arithmetic, geometric };

namespace detail {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Maps arbitrary integer labels onto 0..k-1 in ascending label order.
inline std::vector<int> compact_labels(std::span<const int> labels, int& classes) {
  std::map<int, int> index;
  for (int l : labels) index.emplace(l, 0);
  int next = 0;
  for (auto& [label, slot] : index) slot = next++;
  classes = next;
  std::vector<int> out;
  out.reserve(labels.size());
  for (int l : labels) out.push_back(index[l]);
  return out;
}

// Minimum-cost assignment of every row to a distinct column; requires rows <= cols.
// Classic O(rows^2 cols) shortest augmenting path (Hungarian) with potentials.
inline std::vector<int> min_cost_assignment(const Eigen::MatrixXd& cost) {
  const auto rows = static_cast<int>(cost.rows());
  const auto cols = static_cast<int>(cost.cols());
  if (rows > cols) throw std::invalid_argument("assignment needs rows <= cols");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(rows + 1), 0.0);
  std::vector<double> v(static_cast<std::size_t>(cols + 1), 0.0);
  std::vector<int> match(static_cast<std::size_t>(cols + 1), 0);  // column -> row, 1-based
  std::vector<int> way(static_cast<std::size_t>(cols + 1), 0);
  for (int i = 1; i <= rows; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(cols + 1), inf);
    std::vector<char> used(static_cast<std::size_t>(cols + 1), 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = match[static_cast<std::size_t>(j0)];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= cols; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= cols; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (match[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(static_cast<std::size_t>(rows), -1);
  for (int j = 1; j <= cols; ++j) {
    if (match[static_cast<std::size_t>(j)] != 0) assignment[static_cast<std::size_t>(match[static_cast<std::size_t>(j)] - 1)] = j - 1;
  }
  return assignment;
}

inline Eigen::MatrixXd contingency(std::span<const int> pred, std::span<const int> truth, int& kp, int& kt) {
  if (pred.size() != truth.size()) throw InputError("label vectors have different lengths");
  if (pred.empty()) throw InputError("label vectors are empty");
  const auto p = compact_labels(pred, kp);
  const auto t = compact_labels(truth, kt);
  Eigen::MatrixXd table = Eigen::MatrixXd::Zero(kp, kt);
  for (std::size_t i = 0; i < p.size(); ++i) table(p[i], t[i]) += 1.0;
  return table;
}

inline double row_distance2(const RowMajorMatrix& x, Eigen::Index a, const RowMajorMatrix& c, Eigen::Index b) {
  double acc = 0.0;
  for (Eigen::Index k = 0; k < x.cols(); ++k) {
    const double d = x(a, k) - c(b, k);
    acc += d * d;
  }
  return acc;
}

}  // namespace detail

/// Lloyd's k-means with k-means++ seeding.
///
/// Stops when assignments no longer change or after `max_iterations`. A cluster that
/// empties claims the point farthest from its centroid. Ties go to the lowest cluster index.
inline ClusteringResult kmeans(const Eigen::MatrixXd& coords, std::size_t k, std::uint64_t seed,
                               std::size_t max_iterations = 300) {
  const Eigen::Index m = coords.rows();
  const Eigen::Index r = coords.cols();
  if (k < 1) throw InputError("k must be at least 1");
  if (static_cast<Eigen::Index>(k) > m) throw InputError("k exceeds the number of points");
  const detail::RowMajorMatrix x = coords;
  const auto kk = static_cast<Eigen::Index>(k);
  std::mt19937_64 rng(seed);

  // k-means++ seeding
  detail::RowMajorMatrix centers(kk, r);
  std::vector<char> chosen(static_cast<std::size_t>(m), 0);
  std::uniform_int_distribution<Eigen::Index> first(0, m - 1);
  Eigen::Index pick = first(rng);
  centers.row(0) = x.row(pick);
  chosen[static_cast<std::size_t>(pick)] = 1;
  std::vector<double> nearest(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) nearest[static_cast<std::size_t>(i)] = detail::row_distance2(x, i, centers, 0);
  for (Eigen::Index c = 1; c < kk; ++c) {
    double total = 0.0;
    for (double d : nearest) total += d;
    pick = -1;
    if (total > 0.0) {
      std::uniform_real_distribution<double> draw(0.0, total);
      const double target = draw(rng);
      double cumulative = 0.0;
      for (Eigen::Index i = 0; i < m; ++i) {
        const double w = nearest[static_cast<std::size_t>(i)];
        if (w <= 0.0) continue;
        cumulative += w;
        pick = i;
        if (cumulative > target) break;
      }
    }
    if (pick < 0) {
      for (Eigen::Index i = 0; i < m; ++i) {
        if (!chosen[static_cast<std::size_t>(i)]) {
          pick = i;
          break;
        }
      }
    }
    centers.row(c) = x.row(pick);
    chosen[static_cast<std::size_t>(pick)] = 1;
    for (Eigen::Index i = 0; i < m; ++i) {
      nearest[static_cast<std::size_t>(i)] =
          std::min(nearest[static_cast<std::size_t>(i)], detail::row_distance2(x, i, centers, c));
    }
  }

  ClusteringResult result;
  result.seed = seed;
  result.labels.assign(static_cast<std::size_t>(m), -1);
  double previous = std::numeric_limits<double>::infinity();
  std::vector<Eigen::Index> sizes(static_cast<std::size_t>(kk));
  for (std::size_t iter = 0; iter < max_iterations; ++iter) {
    bool changed = false;
    double inertia = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      int best = 0;
      double best_d = detail::row_distance2(x, i, centers, 0);
      for (Eigen::Index c = 1; c < kk; ++c) {
        const double d = detail::row_distance2(x, i, centers, c);
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(c);
        }
      }
      inertia += best_d;
      if (result.labels[static_cast<std::size_t>(i)] != best) {
        result.labels[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    if (inertia > previous * (1.0 + 1e-12) + 1e-12) {
      throw std::logic_error("k-means inertia increased between Lloyd iterations");
    }
    previous = inertia;
    result.inertia = inertia;
    result.iterations = iter + 1;
    if (!changed) break;

    centers.setZero();
    std::fill(sizes.begin(), sizes.end(), 0);
    for (Eigen::Index i = 0; i < m; ++i) {
      const int c = result.labels[static_cast<std::size_t>(i)];
      centers.row(c) += x.row(i);
      ++sizes[static_cast<std::size_t>(c)];
    }
    for (Eigen::Index c = 0; c < kk; ++c) {
      if (sizes[static_cast<std::size_t>(c)] > 0) centers.row(c) /= static_cast<double>(sizes[static_cast<std::size_t>(c)]);
    }
    for (Eigen::Index c = 0; c < kk; ++c) {
      if (sizes[static_cast<std::size_t>(c)] > 0) continue;
      Eigen::Index far = -1;
      double far_d = -1.0;
      for (Eigen::Index i = 0; i < m; ++i) {
        const int owner = result.labels[static_cast<std::size_t>(i)];
        if (sizes[static_cast<std::size_t>(owner)] < 2) continue;
        const double d = detail::row_distance2(x, i, centers, owner);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      const int donor = result.labels[static_cast<std::size_t>(far)];
      result.labels[static_cast<std::size_t>(far)] = static_cast<int>(c);
      --sizes[static_cast<std::size_t>(donor)];
      sizes[static_cast<std::size_t>(c)] = 1;
      centers.row(c) = x.row(far);
      centers.row(donor).setZero();
      for (Eigen::Index i = 0; i < m; ++i) {
        if (result.labels[static_cast<std::size_t>(i)] == donor) centers.row(donor) += x.row(i);
      }
      centers.row(donor) /= static_cast<double>(sizes[static_cast<std::size_t>(donor)]);
    }
  }
  return result;
}

/// Best k-means solution (lowest inertia, earliest on ties) over seeds seed..seed+restarts-1.
inline ClusteringResult kmeans_restarts(const Eigen::MatrixXd& coords, std::size_t k, std::uint64_t seed,
                                        std::size_t restarts) {
  if (restarts < 1) throw InputError("restarts must be at least 1");
  ClusteringResult best = kmeans(coords, k, seed);
  for (std::size_t r = 1; r < restarts; ++r) {
    ClusteringResult candidate = kmeans(coords, k, seed + r);
    if (candidate.inertia < best.inertia) best = std::move(candidate);
  }
  return best;
}

/// Fraction of points on which `pred` agrees with `truth` under the best one-to-one
/// matching of predicted to true classes.
inline double clustering_accuracy(std::span<const int> pred, std::span<const int> truth) {
  int kp = 0;
  int kt = 0;
  const Eigen::MatrixXd table = detail::contingency(pred, truth, kp, kt);
  const bool transpose = kp > kt;
  const Eigen::MatrixXd cost = transpose ? Eigen::MatrixXd(-table.transpose()) : Eigen::MatrixXd(-table);
  const auto assignment = detail::min_cost_assignment(cost);
  double matched = 0.0;
  for (std::size_t r = 0; r < assignment.size(); ++r) matched -= cost(static_cast<Eigen::Index>(r), assignment[r]);
  return matched / static_cast<double>(pred.size());
}

/// Normalized mutual information with natural logarithms.
///
/// Arithmetic normalization is 2 I / (H(pred) + H(truth)); geometric is I / sqrt(H H).
/// When a normalizer vanishes the result is 1 for identical partitions and 0 otherwise.
inline double nmi(std::span<const int> pred, std::span<const int> truth,
                  NmiNormalization normalization = NmiNormalization::arithmetic) {
  int kp = 0;
  int kt = 0;
  const Eigen::MatrixXd table = detail::contingency(pred, truth, kp, kt);
  const double n = static_cast<double>(pred.size());
  const Eigen::VectorXd pp = table.rowwise().sum() / n;
  const Eigen::VectorXd pt = table.colwise().sum().transpose() / n;
  auto entropy = [](const Eigen::VectorXd& prob) {
    double h = 0.0;
    for (Eigen::Index i = 0; i < prob.size(); ++i) {
      if (prob(i) > 0.0) h -= prob(i) * std::log(prob(i));
    }
    return h;
  };
  const double hp = entropy(pp);
  const double ht = entropy(pt);
  double info = 0.0;
  for (Eigen::Index a = 0; a < kp; ++a) {
    for (Eigen::Index b = 0; b < kt; ++b) {
      const double pab = table(a, b) / n;
      if (pab > 0.0) info += pab * std::log(pab / (pp(a) * pt(b)));
    }
  }
  const double denominator = normalization == NmiNormalization::arithmetic ? 0.5 * (hp + ht) : std::sqrt(hp * ht);
  if (!(denominator > 0.0)) {
    // At least one partition is a single class: identical only if both are.
    return kp == 1 && kt == 1 ? 1.0 : 0.0;
  }
  return std::clamp(info / denominator, 0.0, 1.0);
}

/// Mean silhouette coefficient under Euclidean distance. Points in singleton clusters
/// contribute 0.
inline double silhouette(const Eigen::MatrixXd& coords, std::span<const int> labels) {
  const Eigen::Index m = coords.rows();
  if (static_cast<std::size_t>(m) != labels.size()) throw InputError("label count does not match point count");
  int k = 0;
  const auto compact = detail::compact_labels(labels, k);
  if (k < 2) throw InputError("silhouette needs at least two clusters");
  const detail::RowMajorMatrix x = coords;
  std::vector<Eigen::Index> sizes(static_cast<std::size_t>(k), 0);
  for (int c : compact) ++sizes[static_cast<std::size_t>(c)];

  double total = 0.0;
  std::vector<double> sums(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < m; ++i) {
    std::fill(sums.begin(), sums.end(), 0.0);
    for (Eigen::Index j = 0; j < m; ++j) {
      if (j == i) continue;
      sums[static_cast<std::size_t>(compact[static_cast<std::size_t>(j)])] += std::sqrt(detail::row_distance2(x, i, x, j));
    }
    const int own = compact[static_cast<std::size_t>(i)];
    if (sizes[static_cast<std::size_t>(own)] < 2) continue;
    const double a = sums[static_cast<std::size_t>(own)] / static_cast<double>(sizes[static_cast<std::size_t>(own)] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      if (c == own) continue;
      b = std::min(b, sums[static_cast<std::size_t>(c)] / static_cast<double>(sizes[static_cast<std::size_t>(c)]));
    }
    const double scale = std::max(a, b);
    if (scale > 0.0) total += (b - a) / scale;
  }
  return total / static_cast<double>(m);
}

}  // namespace kpcaig
