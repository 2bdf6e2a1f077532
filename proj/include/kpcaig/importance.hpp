#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include "kpcaig/error.hpp"
#include "kpcaig/kernel.hpp"
#include "kpcaig/kpca.hpp"

namespace kpcaig {

/// Rows are, at each training point, the derivative of the point's embedding
/// with respect to one input variable.
struct GradientField {
  std::size_t variable = 0;
  Eigen::MatrixXd W;  // n x q
};

/// Mean gradient norm per variable with its dispersion, and the descending order.
struct FeatureRanking {
  Eigen::VectorXd scores;
  Eigen::VectorXd stds;
  std::vector<std::size_t> order;
  std::vector<std::string> feature_names;
};

struct FeatureScore {
  double score = 0.0;
  double std = 0.0;
};

/// One quiver arrow: a training point's first two embedding coordinates and
/// the first two components of its gradient row.
struct Arrow {
  double x = 0.0;
  double y = 0.0;
  double dx = 0.0;
  double dy = 0.0;
  std::size_t sample = 0;
};

namespace detail {

// Everything a gradient field needs that does not depend on the variable.
//
// Row m of W^j is sum_i D_j k(x_m, x_i) * B_i with B = (I - 11'/n) alpha. The
// kernel derivative factors as S(m, i) * g_j(m, i) where g_j is x_m^j - x_i^j
// for rbf and x_i^j for the dot-product kernels, so S is computed once.
class GradientContext {
public:
  explicit GradientContext(const FittedKpca& model) : model_(&model) {
    const Eigen::Index n = model.training.rows();
    weights_ = model.alphas;
    for (Eigen::Index k = 0; k < weights_.cols(); ++k) {
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) acc += weights_(i, k);
      weights_.col(k).array() -= acc / static_cast<double>(n);
    }
    const KernelSpec& spec = model.kernel;
    switch (spec.family) {
      case KernelFamily::rbf:
        factor_ = -2.0 * spec.sigma * model.gram.values;
        break;
      case KernelFamily::linear:
        break;
      case KernelFamily::polynomial: {
        const Eigen::MatrixXd dots = pairwise_statistic(KernelSpec::linear(), model.training);
        factor_ = dots.unaryExpr([&](double s) { return spec.degree * int_pow(s + spec.coef0, spec.degree - 1); });
        break;
      }
    }
  }

  [[nodiscard]] const FittedKpca& model() const { return *model_; }

  // Writes W^j into `out`, using `scratch` as the n x n derivative matrix.
  void field(std::size_t j, Eigen::MatrixXd& scratch, Eigen::MatrixXd& out) const {
    const Eigen::MatrixXd& x = model_->training;
    if (j >= static_cast<std::size_t>(x.cols())) throw InputError("feature index out of range");
    const auto column = x.col(static_cast<Eigen::Index>(j));
    const Eigen::Index n = x.rows();
    scratch.resize(n, n);
    switch (model_->kernel.family) {
      case KernelFamily::rbf:
        for (Eigen::Index i = 0; i < n; ++i) {
          for (Eigen::Index m = 0; m < n; ++m) scratch(m, i) = factor_(m, i) * (column(m) - column(i));
        }
        break;
      case KernelFamily::linear:
        for (Eigen::Index i = 0; i < n; ++i) scratch.col(i).setConstant(column(i));
        break;
      case KernelFamily::polynomial:
        for (Eigen::Index i = 0; i < n; ++i) {
          for (Eigen::Index m = 0; m < n; ++m) scratch(m, i) = factor_(m, i) * column(i);
        }
        break;
    }
    out.noalias() = scratch * weights_;
  }

private:
  const FittedKpca* model_;
  Eigen::MatrixXd weights_;
  Eigen::MatrixXd factor_;
};

inline FeatureScore score_rows(const Eigen::MatrixXd& w) {
  const Eigen::Index n = w.rows();
  Eigen::VectorXd norms(n);
  for (Eigen::Index i = 0; i < n; ++i) norms(i) = w.row(i).norm();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) sum += norms(i);
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) ss += (norms(i) - mean) * (norms(i) - mean);
  return {mean, std::sqrt(ss / static_cast<double>(n))};
}

}  // namespace detail

/// Gradient field of the embedding with respect to variable `j` (0-based),
/// evaluated at every training point.
inline GradientField gradient_field(const FittedKpca& model, std::size_t j) {
  const detail::GradientContext ctx(model);
  Eigen::MatrixXd scratch;
  GradientField field{j, {}};
  ctx.field(j, scratch, field.W);
  return field;
}

/// Mean over training points of the gradient-row norm, and its population standard deviation.
inline FeatureScore feature_score(const FittedKpca& model, std::size_t j) {
  return detail::score_rows(gradient_field(model, j).W);
}

/// Stable descending order of `scores`, ties by ascending index.
inline std::vector<std::size_t> descending_order(const Eigen::VectorXd& scores) {
  std::vector<std::size_t> order(static_cast<std::size_t>(scores.size()));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores(static_cast<Eigen::Index>(a)) > scores(static_cast<Eigen::Index>(b));
  });
  return order;
}

/// Scores every variable and sorts them, most influential first.
///
/// Variables are processed one at a time (n x q working set). With `threads` > 1 the
/// variables are split into contiguous blocks; each score is still computed by a
/// single thread, so the result does not depend on the thread count.
inline FeatureRanking rank_features(const FittedKpca& model, std::vector<std::string> feature_names = {},
                                    unsigned threads = 1) {
  const std::size_t p = model.features();
  if (feature_names.empty()) {
    for (std::size_t j = 0; j < p; ++j) feature_names.push_back("f" + std::to_string(j + 1));
  }
  if (feature_names.size() != p) throw InputError("feature name count does not match model");

  const detail::GradientContext ctx(model);
  FeatureRanking ranking;
  ranking.scores.resize(static_cast<Eigen::Index>(p));
  ranking.stds.resize(static_cast<Eigen::Index>(p));

  auto work = [&](std::size_t begin, std::size_t end) {
    Eigen::MatrixXd scratch;
    Eigen::MatrixXd w;
    for (std::size_t j = begin; j < end; ++j) {
      ctx.field(j, scratch, w);
      const FeatureScore s = detail::score_rows(w);
      ranking.scores(static_cast<Eigen::Index>(j)) = s.score;
      ranking.stds(static_cast<Eigen::Index>(j)) = s.std;
    }
  };

  threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(p, 1))));
  if (threads == 1) {
    work(0, p);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t block = (p + threads - 1) / threads;
    for (std::size_t begin = 0; begin < p; begin += block) {
      pool.emplace_back(work, begin, std::min(p, begin + block));
    }
  }

  ranking.order = descending_order(ranking.scores);
  ranking.feature_names = std::move(feature_names);
  return ranking;
}

/// Quiver data for variable `j` on the first two components.
inline std::vector<Arrow> arrow_field(const FittedKpca& model, std::size_t j, double scale) {
  if (model.q() < 2) throw InputError("arrow field needs at least two retained components");
  if (!(scale >= 0.0) || !std::isfinite(scale)) throw InputError("arrow scale must be a finite value >= 0");
  const Eigen::MatrixXd coords = project_training(model).coords;
  const GradientField field = gradient_field(model, j);
  std::vector<Arrow> arrows;
  arrows.reserve(model.samples());
  for (Eigen::Index i = 0; i < coords.rows(); ++i) {
    arrows.push_back({coords(i, 0), coords(i, 1), field.W(i, 0) * scale, field.W(i, 1) * scale,
                      static_cast<std::size_t>(i)});
  }
  return arrows;
}

}  // namespace kpcaig
