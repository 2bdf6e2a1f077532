#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "kpcaig/dataset.hpp"
#include "kpcaig/error.hpp"
#include "kpcaig/importance.hpp"
#include "kpcaig/kpca.hpp"
#include "kpcaig/metrics.hpp"

namespace kpcaig {

/// Mean and population standard deviation of k-means ACC/NMI at one subset size.
struct SelectionPoint {
  std::size_t d = 0;
  double acc_mean = 0.0;
  double acc_std = 0.0;
  double nmi_mean = 0.0;
  double nmi_std = 0.0;
};

struct SilhouettePoint {
  std::size_t d = 0;
  double silhouette = 0.0;
  double sigma = 0.0;  // bandwidth used for this subset (0 for non-rbf kernels)
};

struct VariancePoint {
  std::size_t split = 0;
  std::size_t d = 0;
  double var_train = 0.0;
  double var_test = 0.0;
};

/// Parses "start:stop:step" (inclusive) or a comma-separated list.
inline std::vector<std::size_t> parse_d_grid(const std::string& text) {
  auto number = [&](const std::string& token) -> std::size_t {
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(token, &used);
    } catch (const std::exception&) {
      throw ConfigError("invalid d-grid entry '" + token + "'");
    }
    if (used != token.size() || v < 1) throw ConfigError("invalid d-grid entry '" + token + "'");
    return static_cast<std::size_t>(v);
  };
  std::vector<std::size_t> grid;
  if (text.find(':') != std::string::npos) {
    const auto a = text.find(':');
    const auto b = text.find(':', a + 1);
    if (b == std::string::npos) throw ConfigError("d-grid range must be start:stop:step");
    const std::size_t start = number(text.substr(0, a));
    const std::size_t stop = number(text.substr(a + 1, b - a - 1));
    const std::size_t step = number(text.substr(b + 1));
    if (stop < start) throw ConfigError("d-grid range stop is below start");
    for (std::size_t d = start; d <= stop; d += step) grid.push_back(d);
  } else {
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const auto comma = text.find(',', pos);
      const auto end = comma == std::string::npos ? text.size() : comma;
      grid.push_back(number(text.substr(pos, end - pos)));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
  }
  if (grid.empty()) throw ConfigError("d-grid is empty");
  return grid;
}

/// A seeded uniformly random feature order. The stream is salted so it never
/// coincides with a generator seeded directly with the same value.
inline std::vector<std::size_t> random_ranking(std::size_t p, std::uint64_t seed) {
  std::vector<std::size_t> order(p);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::seed_seq sequence{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32U), 0x72616e64U};
  std::mt19937_64 rng(sequence);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

namespace detail {

inline void check_grid(std::span<const std::size_t> d_grid, std::size_t p) {
  if (d_grid.empty()) throw InputError("d grid is empty");
  for (std::size_t d : d_grid) {
    if (d < 1 || d > p) throw InputError("d grid value " + std::to_string(d) + " outside [1, " + std::to_string(p) + "]");
  }
}

inline void check_order(std::span<const std::size_t> order, std::size_t p) {
  if (order.size() != p) throw InputError("ranking order must list every feature once");
  std::vector<char> seen(p, 0);
  for (std::size_t j : order) {
    if (j >= p || seen[j]) throw InputError("ranking order must be a permutation of the features");
    seen[j] = 1;
  }
}

inline std::pair<double, double> mean_std(const std::vector<double>& values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(values.size()))};
}

}  // namespace detail

/// k-means ACC/NMI on the top-d ranked columns, `runs` times per d with seeds
/// seed, seed+1, ... Data is clustered as given (standardize beforehand).
inline std::vector<SelectionPoint> selection_curve(const Eigen::MatrixXd& data, std::span<const std::size_t> order,
                                                   std::span<const int> truth, std::size_t k,
                                                   std::span<const std::size_t> d_grid, std::size_t runs,
                                                   std::uint64_t seed) {
  const auto p = static_cast<std::size_t>(data.cols());
  detail::check_order(order, p);
  detail::check_grid(d_grid, p);
  if (truth.size() != static_cast<std::size_t>(data.rows())) throw InputError("label count does not match samples");
  if (runs < 1) throw InputError("runs must be at least 1");
  std::vector<SelectionPoint> curve;
  std::vector<double> accs(runs);
  std::vector<double> nmis(runs);
  for (std::size_t d : d_grid) {
    const Eigen::MatrixXd subset = select_columns(data, order.first(d));
    for (std::size_t r = 0; r < runs; ++r) {
      const ClusteringResult clusters = kmeans(subset, k, seed + r);
      accs[r] = clustering_accuracy(clusters.labels, truth);
      nmis[r] = nmi(clusters.labels, truth);
    }
    const auto [acc_mean, acc_std] = detail::mean_std(accs);
    const auto [nmi_mean, nmi_std] = detail::mean_std(nmis);
    curve.push_back({d, acc_mean, acc_std, nmi_mean, nmi_std});
  }
  return curve;
}

/// Silhouette of a k-means clustering of the two-component kernel PCA embedding of
/// the top-d ranked columns. Sigma is re-resolved for every subset.
inline std::vector<SilhouettePoint> silhouette_curve(const Eigen::MatrixXd& data, std::span<const std::size_t> order,
                                                     const KernelSpec& base, const SigmaMode& sigma, std::size_t k,
                                                     std::span<const std::size_t> d_grid, std::uint64_t seed,
                                                     std::size_t restarts = 10) {
  const auto p = static_cast<std::size_t>(data.cols());
  detail::check_order(order, p);
  detail::check_grid(d_grid, p);
  if (k < 2) throw InputError("silhouette curve needs k >= 2");
  std::vector<SilhouettePoint> curve;
  for (std::size_t d : d_grid) {
    const Eigen::MatrixXd subset = select_columns(data, order.first(d));
    const KernelSpec spec = resolve_kernel(base, sigma, subset, 2);
    const FittedKpca model = fit_kpca(subset, spec, 2);
    const Eigen::MatrixXd coords = project_training(model).coords;
    const ClusteringResult clusters = kmeans_restarts(coords, k, seed, restarts);
    curve.push_back({d, silhouette(coords, clusters.labels), spec.family == KernelFamily::rbf ? spec.sigma : 0.0});
  }
  return curve;
}

/// Retained-q explained variance of the top-d ranked columns on a training and a test
/// set. The test value comes from a separate fit on the test rows with the same kernel.
inline VariancePoint variance_split_point(const Eigen::MatrixXd& train, const Eigen::MatrixXd& test,
                                          std::span<const std::size_t> order, const KernelSpec& base,
                                          const SigmaMode& sigma, std::size_t q, std::size_t d) {
  const Eigen::MatrixXd train_d = select_columns(train, order.first(d));
  const Eigen::MatrixXd test_d = select_columns(test, order.first(d));
  const KernelSpec spec = resolve_kernel(base, sigma, train_d, q);
  VariancePoint point;
  point.d = d;
  point.var_train = explained_variance(fit_kpca(train_d, spec, q)).sum();
  point.var_test = explained_variance(fit_kpca(test_d, spec, q)).sum();
  return point;
}

/// Random train/test splits (seeded per split); features are ranked on the training
/// rows only, then explained variance is compared across the d grid.
inline std::vector<VariancePoint> variance_generalization(const Eigen::MatrixXd& data, const KernelSpec& base,
                                                          const SigmaMode& sigma, std::size_t q,
                                                          std::span<const std::size_t> d_grid, std::size_t n_splits,
                                                          std::uint64_t seed, double train_fraction = 0.75) {
  const auto n = static_cast<std::size_t>(data.rows());
  const auto p = static_cast<std::size_t>(data.cols());
  if (n_splits < 1) throw InputError("n_splits must be at least 1");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw InputError("train fraction must lie in (0, 1)");
  detail::check_grid(d_grid, p);
  const auto n_train = static_cast<std::size_t>(std::lround(train_fraction * static_cast<double>(n)));
  if (n_train < 3 || n - n_train < 3) throw InputError("split leaves fewer than 3 samples on one side");
  if (q + 1 > n - n_train) throw InputError("q must be below the test-set size");

  std::vector<VariancePoint> curve;
  for (std::size_t s = 0; s < n_splits; ++s) {
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    std::seed_seq sequence{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32U),
                           static_cast<std::uint32_t>(s)};
    std::mt19937_64 rng(sequence);
    std::shuffle(rows.begin(), rows.end(), rng);
    std::vector<std::size_t> train_rows(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<std::size_t> test_rows(rows.begin() + static_cast<std::ptrdiff_t>(n_train), rows.end());
    std::sort(train_rows.begin(), train_rows.end());
    std::sort(test_rows.begin(), test_rows.end());
    const Eigen::MatrixXd train = select_rows(data, train_rows);
    const Eigen::MatrixXd test = select_rows(data, test_rows);

    const KernelSpec spec = resolve_kernel(base, sigma, train, q);
    const FeatureRanking ranking = rank_features(fit_kpca(train, spec, q));
    for (std::size_t d : d_grid) {
      VariancePoint point = variance_split_point(train, test, ranking.order, base, sigma, q, d);
      point.split = s;
      curve.push_back(point);
    }
  }
  return curve;
}

}  // namespace kpcaig
