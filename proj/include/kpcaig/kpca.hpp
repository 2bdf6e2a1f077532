#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "kpcaig/error.hpp"
#include "kpcaig/kernel.hpp"

namespace kpcaig {

/// Relative eigenvalue floor: components with mu_k <= kEigenTolerance * mu_1 are dropped.
inline constexpr double kEigenTolerance = 1e-10;

/// A fitted kernel PCA model. Immutable after fit_kpca; safe to share across threads.
struct FittedKpca {
  Eigen::MatrixXd training;  // n x p, rows are samples
  KernelSpec kernel;
  GramMatrix gram;      // uncentered
  GramMatrix centered;  // double-centered
  Eigen::VectorXd gram_column_means;
  Eigen::VectorXd eigenvalues;      // retained mu_1 >= ... >= mu_q of the centered Gram
  Eigen::VectorXd all_eigenvalues;  // every eigenvalue, descending
  Eigen::MatrixXd alphas;           // n x q, column k scaled so alpha' Kc alpha = 1
  std::size_t requested_q = 0;

  [[nodiscard]] std::size_t q() const { return static_cast<std::size_t>(alphas.cols()); }
  [[nodiscard]] std::size_t samples() const { return static_cast<std::size_t>(training.rows()); }
  [[nodiscard]] std::size_t features() const { return static_cast<std::size_t>(training.cols()); }
  [[nodiscard]] bool reduced() const { return q() < requested_q; }
};

/// Coordinates of points on the retained axes plus the share of variance per axis.
struct Embedding {
  Eigen::MatrixXd coords;
  Eigen::VectorXd component_variance;
};

/// Eigendecomposition of the centered Gram matrix, keeping up to `q` components.
///
/// Components whose eigenvalue falls below kEigenTolerance * mu_1 are dropped, so the
/// returned model may hold fewer than `q` (see FittedKpca::reduced). Each retained
/// eigenvector is scaled by 1/sqrt(mu_k) and its largest-magnitude entry made positive.
inline FittedKpca fit_kpca(const Eigen::MatrixXd& data, const KernelSpec& spec, std::size_t q) {
  spec.validate();
  const Eigen::Index n = data.rows();
  if (n < 2) throw InputError("kernel PCA needs at least two samples");
  if (q < 1 || q > static_cast<std::size_t>(n - 1)) {
    throw InputError("retained component count must lie in [1, n-1], got " + std::to_string(q));
  }

  FittedKpca model;
  model.training = data;
  model.kernel = spec;
  model.requested_q = q;
  model.gram = gram_matrix(spec, data);
  model.centered = center_gram(model.gram);
  model.gram_column_means = detail::column_means(model.gram.values);

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(model.centered.values);
  if (solver.info() != Eigen::Success) throw DegenerateDataError("eigendecomposition did not converge");
  model.all_eigenvalues = solver.eigenvalues().reverse();
  const Eigen::MatrixXd vectors = solver.eigenvectors().rowwise().reverse();

  const double top = model.all_eigenvalues(0);
  const double scale = model.gram.values.cwiseAbs().maxCoeff();
  if (!(top > 1e-12 * std::max(scale, std::numeric_limits<double>::min()))) {
    throw DegenerateDataError("centered Gram matrix is numerically zero (all samples identical?)");
  }
  const double floor = kEigenTolerance * top;
  Eigen::Index kept = 0;
  while (kept < static_cast<Eigen::Index>(q) && model.all_eigenvalues(kept) > floor) ++kept;

  model.eigenvalues = model.all_eigenvalues.head(kept);
  model.alphas.resize(n, kept);
  for (Eigen::Index k = 0; k < kept; ++k) {
    Eigen::VectorXd a = vectors.col(k) / std::sqrt(model.eigenvalues(k));
    Eigen::Index pivot = 0;
    for (Eigen::Index i = 1; i < n; ++i) {
      if (std::abs(a(i)) > std::abs(a(pivot))) pivot = i;
    }
    if (a(pivot) < 0.0) a = -a;
    model.alphas.col(k) = a;
  }
  return model;
}

/// Share of total variance per retained component: mu_k over the sum of all positive eigenvalues.
inline Eigen::VectorXd explained_variance(const FittedKpca& model) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < model.all_eigenvalues.size(); ++i) {
    if (model.all_eigenvalues(i) > 0.0) total += model.all_eigenvalues(i);
  }
  return model.eigenvalues / total;
}

/// Projection of an arbitrary point onto the retained axes.
template <class A>
Eigen::RowVectorXd project(const FittedKpca& model, const Eigen::MatrixBase<A>& x) {
  if (static_cast<std::size_t>(x.size()) != model.features()) throw InputError("query point has wrong dimension");
  const Eigen::Index n = model.training.rows();
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z(i) = eval_kernel(model.kernel, x, model.training.row(i));
  return center_cross(model.gram_column_means, z) * model.alphas;
}

/// Projections of many points (rows of `queries`).
inline Eigen::MatrixXd project_rows(const FittedKpca& model, const Eigen::MatrixXd& queries) {
  Eigen::MatrixXd out(queries.rows(), static_cast<Eigen::Index>(model.q()));
  for (Eigen::Index r = 0; r < queries.rows(); ++r) out.row(r) = project(model, queries.row(r));
  return out;
}

/// Training-point coordinates, Kc * alpha.
inline Embedding project_training(const FittedKpca& model) {
  return {model.centered.values * model.alphas, explained_variance(model)};
}

/// How the rbf bandwidth is chosen for a fit.
struct SigmaMode {
  enum class Kind { fixed, median, grid };
  Kind kind = Kind::median;
  double value = 1.0;
  std::vector<double> grid;

  static SigmaMode fixed(double sigma) { return {Kind::fixed, sigma, {}}; }
  static SigmaMode median() { return {Kind::median, 1.0, {}}; }
  static SigmaMode search(std::vector<double> candidates) { return {Kind::grid, 1.0, std::move(candidates)}; }

  void validate() const {
    if (kind == Kind::fixed && !(value > 0.0 && std::isfinite(value))) throw ConfigError("sigma must be > 0");
    if (kind == Kind::grid) {
      if (grid.empty()) throw ConfigError("sigma grid must not be empty");
      for (double s : grid) {
        if (!(s > 0.0 && std::isfinite(s))) throw ConfigError("sigma grid values must be > 0");
      }
    }
  }

  friend bool operator==(const SigmaMode&, const SigmaMode&) = default;
};

/// Sum of retained explained-variance ratios for a candidate kernel.
inline double retained_variance(const Eigen::MatrixXd& data, const KernelSpec& spec, std::size_t q) {
  return explained_variance(fit_kpca(data, spec, q)).sum();
}

/// Kernel with sigma resolved for `data`. Non-rbf kernels are returned unchanged.
///
/// The grid mode keeps the first candidate that maximizes the retained-q explained variance.
inline KernelSpec resolve_kernel(const KernelSpec& base, const SigmaMode& mode, const Eigen::MatrixXd& data,
                                 std::size_t q) {
  if (base.family != KernelFamily::rbf) return base;
  mode.validate();
  KernelSpec spec = base;
  switch (mode.kind) {
    case SigmaMode::Kind::fixed: spec.sigma = mode.value; break;
    case SigmaMode::Kind::median: spec.sigma = sigma_heuristic(data); break;
    case SigmaMode::Kind::grid: {
      double best = -1.0;
      for (double candidate : mode.grid) {
        const double v = retained_variance(data, KernelSpec::rbf(candidate), q);
        if (v > best) {
          best = v;
          spec.sigma = candidate;
        }
      }
      break;
    }
  }
  return spec;
}

}  // namespace kpcaig
