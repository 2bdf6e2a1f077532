#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "kpcaig/error.hpp"

namespace kpcaig {

enum class KernelFamily { rbf, linear, polynomial };

inline std::string_view to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::rbf: return "rbf";
    case KernelFamily::linear: return "linear";
    case KernelFamily::polynomial: return "poly";
  }
  return "unknown";
}

inline KernelFamily parse_kernel_family(std::string_view name) {
  if (name == "rbf" || name == "gaussian") return KernelFamily::rbf;
  if (name == "linear") return KernelFamily::linear;
  if (name == "poly" || name == "polynomial") return KernelFamily::polynomial;
  throw ConfigError("unknown kernel '" + std::string(name) + "' (expected rbf, linear or poly)");
}

/// Kernel family and hyperparameters.
///
/// RBF is k(x, y) = exp(-sigma * |x - y|^2), polynomial is (x.y + coef0)^degree.
struct KernelSpec {
  KernelFamily family = KernelFamily::rbf;
  double sigma = 1.0;
  int degree = 2;
  double coef0 = 1.0;

  static KernelSpec rbf(double sigma) { return {KernelFamily::rbf, sigma, 2, 1.0}; }
  static KernelSpec linear() { return {KernelFamily::linear, 1.0, 1, 0.0}; }
  static KernelSpec polynomial(int degree, double coef0) {
    return {KernelFamily::polynomial, 1.0, degree, coef0};
  }

  void validate() const {
    if (family == KernelFamily::rbf && !(sigma > 0.0 && std::isfinite(sigma))) {
      throw InputError("rbf kernel requires a finite sigma > 0");
    }
    if (family == KernelFamily::polynomial && degree < 1) {
      throw InputError("polynomial kernel requires degree >= 1");
    }
    if (family == KernelFamily::polynomial && !std::isfinite(coef0)) {
      throw InputError("polynomial kernel requires a finite coef0");
    }
  }

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

namespace detail {

template <class A, class B>
double squared_distance(const Eigen::MatrixBase<A>& x, const Eigen::MatrixBase<B>& y) {
  double acc = 0.0;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double diff = x(k) - y(k);
    acc += diff * diff;
  }
  return acc;
}

template <class A, class B>
double dot(const Eigen::MatrixBase<A>& x, const Eigen::MatrixBase<B>& y) {
  double acc = 0.0;
  for (Eigen::Index k = 0; k < x.size(); ++k) acc += x(k) * y(k);
  return acc;
}

inline double int_pow(double base, int exponent) {
  double result = 1.0;
  for (int e = 0; e < exponent; ++e) result *= base;
  return result;
}

// Kernel value from the pairwise statistic it depends on: the squared
// distance for rbf, the dot product otherwise.
inline double kernel_from_statistic(const KernelSpec& spec, double statistic) {
  switch (spec.family) {
    case KernelFamily::rbf: return std::exp(-spec.sigma * statistic);
    case KernelFamily::linear: return statistic;
    case KernelFamily::polynomial: return int_pow(statistic + spec.coef0, spec.degree);
  }
  return 0.0;
}

template <class A, class B>
double pair_statistic(const KernelSpec& spec, const Eigen::MatrixBase<A>& x, const Eigen::MatrixBase<B>& y) {
  return spec.family == KernelFamily::rbf ? squared_distance(x, y) : dot(x, y);
}

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace detail

template <class A, class B>
double eval_kernel(const KernelSpec& spec, const Eigen::MatrixBase<A>& x, const Eigen::MatrixBase<B>& y) {
  if (x.size() != y.size() || x.size() == 0) throw InputError("kernel arguments must have equal nonzero length");
  return detail::kernel_from_statistic(spec, detail::pair_statistic(spec, x, y));
}

/// Partial derivative of k(x, xi) with respect to coordinate `j` (0-based) of x.
template <class A, class B>
double kernel_partial(const KernelSpec& spec, const Eigen::MatrixBase<A>& x, const Eigen::MatrixBase<B>& xi,
                      std::size_t j) {
  if (x.size() != xi.size() || x.size() == 0) throw InputError("kernel arguments must have equal nonzero length");
  if (j >= static_cast<std::size_t>(x.size())) throw InputError("feature index out of range");
  const auto jj = static_cast<Eigen::Index>(j);
  switch (spec.family) {
    case KernelFamily::rbf: {
      const double k = eval_kernel(spec, x, xi);
      return -2.0 * spec.sigma * k * (x(jj) - xi(jj));
    }
    case KernelFamily::linear: return xi(jj);
    case KernelFamily::polynomial: {
      const double base = detail::dot(x, xi) + spec.coef0;
      return spec.degree * detail::int_pow(base, spec.degree - 1) * xi(jj);
    }
  }
  return 0.0;
}

/// Square kernel matrix, optionally double-centered.
struct GramMatrix {
  Eigen::MatrixXd values;
  bool centered = false;

  [[nodiscard]] Eigen::Index size() const { return values.rows(); }
};

/// Upper triangle of the pairwise statistic (squared distance or dot product), mirrored.
inline Eigen::MatrixXd pairwise_statistic(const KernelSpec& spec, const Eigen::MatrixXd& data) {
  const detail::RowMatrix rows = data;
  const Eigen::Index n = rows.rows();
  Eigen::MatrixXd s(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const double v = detail::pair_statistic(spec, rows.row(i), rows.row(j));
      s(i, j) = v;
      s(j, i) = v;
    }
  }
  return s;
}

/// Uncentered Gram matrix over the rows of `data`.
inline GramMatrix gram_matrix(const KernelSpec& spec, const Eigen::MatrixXd& data) {
  spec.validate();
  if (data.rows() < 2) throw InputError("gram matrix needs at least two samples");
  if (data.cols() < 1) throw InputError("gram matrix needs at least one feature");
  Eigen::MatrixXd k = pairwise_statistic(spec, data);
  k = k.unaryExpr([&](double s) { return detail::kernel_from_statistic(spec, s); });
  return {std::move(k), false};
}

/// Kernel values between every row of `queries` and every row of `training`.
inline Eigen::MatrixXd cross_gram(const KernelSpec& spec, const Eigen::MatrixXd& queries,
                                  const Eigen::MatrixXd& training) {
  if (queries.cols() != training.cols()) throw InputError("query and training feature counts differ");
  const detail::RowMatrix q = queries;
  const detail::RowMatrix t = training;
  Eigen::MatrixXd out(q.rows(), t.rows());
  for (Eigen::Index a = 0; a < q.rows(); ++a) {
    for (Eigen::Index b = 0; b < t.rows(); ++b) out(a, b) = eval_kernel(spec, q.row(a), t.row(b));
  }
  return out;
}

namespace detail {

inline Eigen::VectorXd row_means(const Eigen::MatrixXd& k) {
  const Eigen::Index n = k.rows();
  Eigen::VectorXd means(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < k.cols(); ++j) acc += k(i, j);
    means(i) = acc / static_cast<double>(k.cols());
  }
  return means;
}

inline Eigen::VectorXd column_means(const Eigen::MatrixXd& k) {
  const Eigen::Index m = k.cols();
  Eigen::VectorXd means(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < k.rows(); ++i) acc += k(i, j);
    means(j) = acc / static_cast<double>(k.rows());
  }
  return means;
}

}  // namespace detail

/// Double centering K - (1/n) K 11' - (1/n) 11' K + (1/n^2)(1'K1) 11'.
///
/// Bitwise symmetric input gives bitwise symmetric output. Idempotent up to rounding.
inline GramMatrix center_gram(const GramMatrix& gram) {
  const Eigen::MatrixXd& k = gram.values;
  if (k.rows() != k.cols() || k.rows() == 0) throw InputError("center_gram needs a nonempty square matrix");
  const Eigen::Index n = k.rows();
  const Eigen::VectorXd rows = detail::row_means(k);
  const Eigen::VectorXd cols = detail::column_means(k);
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) total += rows(i);
  const double grand = total / static_cast<double>(n);
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) out(i, j) = k(i, j) - (rows(i) + cols(j)) + grand;
  }
  return {std::move(out), true};
}

/// Centered cross-kernel row from precomputed training Gram column means.
inline Eigen::RowVectorXd center_cross(const Eigen::VectorXd& gram_column_means, const Eigen::VectorXd& z) {
  const Eigen::Index n = gram_column_means.size();
  if (z.size() != n) throw InputError("cross-kernel vector length does not match the Gram matrix");
  Eigen::RowVectorXd v = (z - gram_column_means).transpose();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) acc += v(i);
  v.array() -= acc / static_cast<double>(n);
  return v;
}

/// Centered cross-kernel row (z' - (1/n) 1'K)(I - (1/n) 11') for a query with
/// kernel values `z` against the training points. `gram` is the raw training Gram.
inline Eigen::RowVectorXd center_cross(const GramMatrix& gram, const Eigen::VectorXd& z) {
  return center_cross(detail::column_means(gram.values), z);
}

/// Inverse median of the squared pairwise distances over i < j.
inline double sigma_heuristic(const Eigen::MatrixXd& data) {
  const Eigen::Index n = data.rows();
  if (n < 2) throw InputError("sigma heuristic needs at least two samples");
  const detail::RowMatrix rows = data;
  std::vector<double> d2;
  d2.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) d2.push_back(detail::squared_distance(rows.row(i), rows.row(j)));
  }
  const std::size_t mid = d2.size() / 2;
  std::nth_element(d2.begin(), d2.begin() + static_cast<std::ptrdiff_t>(mid), d2.end());
  double median = d2[mid];
  if (d2.size() % 2 == 0) {
    const double lower = *std::max_element(d2.begin(), d2.begin() + static_cast<std::ptrdiff_t>(mid));
    median = 0.5 * (lower + median);
  }
  if (!(median > 0.0)) throw DegenerateDataError("median squared pairwise distance is zero");
  return 1.0 / median;
}

}  // namespace kpcaig
