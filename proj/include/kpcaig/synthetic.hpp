#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "kpcaig/dataset.hpp"

// Seeded data generators with planted structure, used by the test suites and `bench`.

namespace kpcaig::synthetic {

struct PlantedData {
  Dataset data;
  std::vector<std::size_t> informative;  // columns carrying the cluster signal
};

struct PlantedClusterOptions {
  std::size_t n = 120;
  std::size_t p = 500;
  std::size_t informative = 10;
  std::size_t clusters = 4;
  double separation = 4.0;  // radius of the circle holding the cluster means
  double noise = 1.0;       // within-cluster standard deviation on informative columns
  bool shuffle_columns = true;
};

/// Balanced clusters whose means differ only on `informative` columns; every other
/// column is independent N(0, 1) noise.
///
/// Cluster means sit on a circle in a two-dimensional latent plane, starting at 45 degrees
/// so that two clusters already differ along both axes. Informative
/// columns alternate between the two latent axes, each with a random sign and a
/// loading in [0.75, 1.25].
inline PlantedData planted_clusters(const PlantedClusterOptions& opt, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto n = static_cast<Eigen::Index>(opt.n);
  const auto p = static_cast<Eigen::Index>(opt.p);
  std::vector<std::size_t> columns(opt.p);
  std::iota(columns.begin(), columns.end(), std::size_t{0});
  if (opt.shuffle_columns) std::shuffle(columns.begin(), columns.end(), rng);
  std::vector<std::size_t> informative(columns.begin(), columns.begin() + static_cast<std::ptrdiff_t>(opt.informative));
  std::sort(informative.begin(), informative.end());

  std::uniform_real_distribution<double> magnitude(0.75, 1.25);
  std::vector<double> loading(opt.informative);
  for (double& l : loading) l = (normal(rng) > 0.0 ? 1.0 : -1.0) * magnitude(rng);

  Dataset d;
  d.matrix.resize(n, p);
  d.labels = std::vector<int>(opt.n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::size_t c = static_cast<std::size_t>(i) % opt.clusters;
    (*d.labels)[static_cast<std::size_t>(i)] = static_cast<int>(c);
    const double angle =
        0.7853981633974483 + 6.283185307179586 * static_cast<double>(c) / static_cast<double>(opt.clusters);
    const double latent[2] = {opt.separation * std::cos(angle), opt.separation * std::sin(angle)};
    for (Eigen::Index j = 0; j < p; ++j) d.matrix(i, j) = normal(rng);
    for (std::size_t f = 0; f < opt.informative; ++f) {
      d.matrix(i, static_cast<Eigen::Index>(informative[f])) = loading[f] * latent[f % 2] + opt.noise * normal(rng);
    }
  }
  d.validate();
  return {std::move(d), std::move(informative)};
}

/// Two groups separated along column 0 only; all other columns are noise.
inline Dataset two_groups_one_feature(std::size_t n, std::size_t p, double shift, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Dataset d;
  d.matrix.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  d.labels = std::vector<int>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int group = static_cast<int>(i % 2);
    (*d.labels)[i] = group;
    for (std::size_t j = 0; j < p; ++j) d.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = normal(rng);
    d.matrix(static_cast<Eigen::Index>(i), 0) += group == 1 ? shift : -shift;
  }
  d.validate();
  return d;
}

/// Points on a smooth two-dimensional manifold embedded in p columns through random
/// sinusoids, plus small isotropic noise.
inline Dataset smooth_manifold(std::size_t n, std::size_t p, double noise, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<double> a(p), b(p), phase(p);
  for (std::size_t j = 0; j < p; ++j) {
    a[j] = 2.0 * normal(rng);
    b[j] = 2.0 * normal(rng);
    phase[j] = 6.283185307179586 * uniform(rng);
  }
  Dataset d;
  d.matrix.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < n; ++i) {
    const double u = uniform(rng);
    const double v = uniform(rng);
    for (std::size_t j = 0; j < p; ++j) {
      d.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          std::sin(a[j] * u + b[j] * v + phase[j]) + noise * normal(rng);
    }
  }
  d.validate();
  return d;
}

/// Independent standard normal entries.
inline Dataset gaussian_noise(std::size_t n, std::size_t p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Dataset d;
  d.matrix.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  for (Eigen::Index j = 0; j < d.matrix.cols(); ++j) {
    for (Eigen::Index i = 0; i < d.matrix.rows(); ++i) d.matrix(i, j) = normal(rng);
  }
  d.validate();
  return d;
}

}  // namespace kpcaig::synthetic
