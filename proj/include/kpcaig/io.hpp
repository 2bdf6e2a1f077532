#pragma once

#include <Eigen/Dense>

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "kpcaig/baselines.hpp"
#include "kpcaig/curves.hpp"
#include "kpcaig/dataset.hpp"
#include "kpcaig/error.hpp"
#include "kpcaig/importance.hpp"

namespace kpcaig {

/// Layout of a matrix file: one sample per row, or one feature per row.
enum class Orientation { samples_as_rows, features_as_rows };

inline std::string_view to_string(Orientation o) { return o == Orientation::samples_as_rows ? "rows" : "cols"; }

inline Orientation parse_orientation(std::string_view text) {
  if (text == "rows") return Orientation::samples_as_rows;
  if (text == "cols") return Orientation::features_as_rows;
  throw ConfigError("orientation must be 'rows' or 'cols'");
}

/// Shortest decimal text that parses back to exactly `value`.
inline std::string format_double(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return {buffer, result.ptr};
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

inline std::string unquote(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return std::string(s);
}

inline std::vector<std::string_view> split(std::string_view line, char delimiter) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delimiter, start);
    if (pos == std::string_view::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return cells;
}

inline bool parse_finite(std::string_view text, double& out) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return false;
  const auto result = std::from_chars(text.data(), text.data() + text.size(), out);
  return result.ec == std::errc() && result.ptr == text.data() + text.size() && std::isfinite(out);
}

inline char detect_delimiter(std::string_view header) { return header.find('\t') != std::string_view::npos ? '\t' : ','; }

}  // namespace detail

/// Reads a delimited matrix with one header row and one leading id column.
///
/// The delimiter (tab or comma) is taken from the header line. With
/// `features_as_rows` each data row is a feature and the result is transposed.
inline Dataset load_matrix(std::istream& in, Orientation orientation) {
  std::string line;
  std::size_t line_number = 0;
  std::string header;
  while (std::getline(in, header)) {
    ++line_number;
    if (!detail::trim(header).empty()) break;
  }
  if (detail::trim(header).empty()) throw FormatError("matrix file is empty");
  const char delimiter = detail::detect_delimiter(header);
  const auto head = detail::split(header, delimiter);
  if (head.size() < 2) throw FormatError("header must hold an id column and at least one name");
  std::vector<std::string> column_names;
  for (std::size_t c = 1; c < head.size(); ++c) column_names.push_back(detail::unquote(head[c]));

  std::vector<std::string> row_names;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_number;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split(line, delimiter);
    if (cells.size() != head.size()) {
      throw FormatError("line " + std::to_string(line_number) + " has " + std::to_string(cells.size()) +
                        " cells, header has " + std::to_string(head.size()));
    }
    row_names.push_back(detail::unquote(cells[0]));
    for (std::size_t c = 1; c < cells.size(); ++c) {
      double v = 0.0;
      if (!detail::parse_finite(cells[c], v)) throw ParseError(line_number, c + 1, std::string(detail::trim(cells[c])));
      values.push_back(v);
    }
  }
  if (row_names.empty()) throw FormatError("matrix file has no data rows");

  const auto rows = static_cast<Eigen::Index>(row_names.size());
  const auto cols = static_cast<Eigen::Index>(column_names.size());
  const Eigen::MatrixXd parsed = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), rows, cols);
  Dataset d;
  if (orientation == Orientation::samples_as_rows) {
    d.matrix = parsed;
    d.feature_names = std::move(column_names);
    d.sample_ids = std::move(row_names);
  } else {
    d.matrix = parsed.transpose();
    d.feature_names = std::move(row_names);
    d.sample_ids = std::move(column_names);
  }
  try {
    d.validate();
  } catch (const InputError& e) {
    throw FormatError(e.what());
  }
  return d;
}

inline Dataset load_matrix(const std::string& path, Orientation orientation) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return load_matrix(in, orientation);
}

/// One integer label per non-empty line.
inline std::vector<int> load_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::vector<int> labels;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const auto cell = detail::trim(line);
    if (cell.empty()) continue;
    int v = 0;
    const auto result = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (result.ec != std::errc() || result.ptr != cell.data() + cell.size()) {
      throw ParseError(line_number, 1, std::string(cell));
    }
    labels.push_back(v);
  }
  return labels;
}

/// Writes `d` as a delimited matrix (samples as rows) at full precision.
inline void write_matrix(std::ostream& out, const Dataset& d, char delimiter = '\t') {
  out << "id";
  for (const auto& name : d.feature_names) out << delimiter << name;
  out << '\n';
  for (Eigen::Index i = 0; i < d.matrix.rows(); ++i) {
    out << d.sample_ids[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < d.matrix.cols(); ++j) out << delimiter << format_double(d.matrix(i, j));
    out << '\n';
  }
}

struct StandardizeReport {
  std::vector<std::size_t> constant_columns;
};

/// Centers every column and divides by its population standard deviation.
/// Constant columns become exactly zero and are listed in the report.
inline Dataset standardize(const Dataset& data, StandardizeReport* report = nullptr) {
  Dataset out = data;
  const Eigen::Index n = data.matrix.rows();
  for (Eigen::Index j = 0; j < data.matrix.cols(); ++j) {
    auto column = out.matrix.col(j);
    bool constant = true;
    for (Eigen::Index i = 1; i < n && constant; ++i) constant = column(i) == column(0);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) sum += column(i);
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) ss += (column(i) - mean) * (column(i) - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n));
    if (constant || !(sd > 0.0)) {
      column.setZero();
      if (report) report->constant_columns.push_back(static_cast<std::size_t>(j));
      continue;
    }
    for (Eigen::Index i = 0; i < n; ++i) column(i) = (column(i) - mean) / sd;
  }
  out.standardized = true;
  return out;
}

// Table writers. Every table starts with the caller-supplied header comment.

inline void write_ranking(std::ostream& out, const FeatureRanking& ranking) {
  out << "rank\tfeature\tscore\tstd\n";
  for (std::size_t r = 0; r < ranking.order.size(); ++r) {
    const std::size_t j = ranking.order[r];
    out << r + 1 << '\t' << ranking.feature_names[j] << '\t' << format_double(ranking.scores(static_cast<Eigen::Index>(j)))
        << '\t' << format_double(ranking.stds(static_cast<Eigen::Index>(j))) << '\n';
  }
}

inline void write_baseline(std::ostream& out, const BaselineRanking& ranking, const std::vector<std::string>& names) {
  out << "rank\tfeature\tscore\n";
  for (std::size_t r = 0; r < ranking.order.size(); ++r) {
    const std::size_t j = ranking.order[r];
    out << r + 1 << '\t' << names[j] << '\t' << format_double(ranking.scores(static_cast<Eigen::Index>(j))) << '\n';
  }
}

inline void write_embedding(std::ostream& out, const Eigen::MatrixXd& coords, const std::vector<std::string>& ids) {
  out << "sample";
  for (Eigen::Index k = 0; k < coords.cols(); ++k) out << "\tpc" << k + 1;
  out << '\n';
  for (Eigen::Index i = 0; i < coords.rows(); ++i) {
    out << ids[static_cast<std::size_t>(i)];
    for (Eigen::Index k = 0; k < coords.cols(); ++k) out << '\t' << format_double(coords(i, k));
    out << '\n';
  }
}

inline void write_arrows(std::ostream& out, const std::vector<Arrow>& arrows, const std::vector<std::string>& ids) {
  out << "x\ty\tdx\tdy\tsample_id\n";
  for (const Arrow& a : arrows) {
    out << format_double(a.x) << '\t' << format_double(a.y) << '\t' << format_double(a.dx) << '\t'
        << format_double(a.dy) << '\t' << ids[a.sample] << '\n';
  }
}

inline void write_selection_curve(std::ostream& out, const std::string& ranking,
                                  const std::vector<SelectionPoint>& curve, bool header) {
  if (header) out << "ranking\td\tacc_mean\tacc_std\tnmi_mean\tnmi_std\n";
  for (const auto& c : curve) {
    out << ranking << '\t' << c.d << '\t' << format_double(c.acc_mean) << '\t' << format_double(c.acc_std) << '\t'
        << format_double(c.nmi_mean) << '\t' << format_double(c.nmi_std) << '\n';
  }
}

inline void write_silhouette_curve(std::ostream& out, const std::string& ranking,
                                   const std::vector<SilhouettePoint>& curve, bool header) {
  if (header) out << "ranking\td\tsilhouette\tsigma\n";
  for (const auto& c : curve) {
    out << ranking << '\t' << c.d << '\t' << format_double(c.silhouette) << '\t' << format_double(c.sigma) << '\n';
  }
}

inline void write_variance_curve(std::ostream& out, const std::vector<VariancePoint>& curve) {
  out << "split\td\tvar_train\tvar_test\n";
  for (const auto& c : curve) {
    out << c.split + 1 << '\t' << c.d << '\t' << format_double(c.var_train) << '\t' << format_double(c.var_test) << '\n';
  }
}

}  // namespace kpcaig
