#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "kpcaig/error.hpp"

namespace kpcaig {

/// Samples-by-features matrix with names. Rows are samples.
struct Dataset {
  Eigen::MatrixXd matrix;
  std::vector<std::string> feature_names;
  std::vector<std::string> sample_ids;
  std::optional<std::vector<int>> labels;
  bool standardized = false;

  [[nodiscard]] std::size_t samples() const { return static_cast<std::size_t>(matrix.rows()); }
  [[nodiscard]] std::size_t features() const { return static_cast<std::size_t>(matrix.cols()); }

  /// Fills in default names ("f1", "s1", ...) where missing and checks the invariants.
  void validate() {
    const auto n = samples();
    const auto p = features();
    if (feature_names.empty()) {
      for (std::size_t j = 0; j < p; ++j) feature_names.push_back("f" + std::to_string(j + 1));
    }
    if (sample_ids.empty()) {
      for (std::size_t i = 0; i < n; ++i) sample_ids.push_back("s" + std::to_string(i + 1));
    }
    if (feature_names.size() != p) throw InputError("feature name count does not match column count");
    if (sample_ids.size() != n) throw InputError("sample id count does not match row count");
    if (labels && labels->size() != n) throw InputError("label count does not match row count");
    if (!matrix.allFinite()) throw InputError("dataset contains NaN or infinite entries");
    std::unordered_set<std::string> seen;
    for (const auto& name : feature_names) {
      if (!seen.insert(name).second) throw InputError("duplicate feature name '" + name + "'");
    }
  }

  static Dataset from_matrix(Eigen::MatrixXd m) {
    Dataset d;
    d.matrix = std::move(m);
    d.validate();
    return d;
  }
};

/// Columns `columns` of `x`, in the given order.
inline Eigen::MatrixXd select_columns(const Eigen::MatrixXd& x, std::span<const std::size_t> columns) {
  Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c] >= static_cast<std::size_t>(x.cols())) throw InputError("column index out of range");
    out.col(static_cast<Eigen::Index>(c)) = x.col(static_cast<Eigen::Index>(columns[c]));
  }
  return out;
}

inline Eigen::MatrixXd select_rows(const Eigen::MatrixXd& x, std::span<const std::size_t> rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= static_cast<std::size_t>(x.rows())) throw InputError("row index out of range");
    out.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(rows[r]));
  }
  return out;
}

}  // namespace kpcaig
