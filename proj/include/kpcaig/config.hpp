#pragma once

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kpcaig/error.hpp"
#include "kpcaig/io.hpp"
#include "kpcaig/kernel.hpp"
#include "kpcaig/kpca.hpp"

namespace kpcaig {

/// Text form of a sigma mode: a number, "median", or "grid:<v1>,<v2>,...".
inline std::string to_string(const SigmaMode& mode) {
  switch (mode.kind) {
    case SigmaMode::Kind::fixed: return format_double(mode.value);
    case SigmaMode::Kind::median: return "median";
    case SigmaMode::Kind::grid: {
      std::string text = "grid:";
      for (std::size_t i = 0; i < mode.grid.size(); ++i) text += (i ? "," : "") + format_double(mode.grid[i]);
      return text;
    }
  }
  return {};
}

inline SigmaMode parse_sigma_mode(std::string_view text) {
  auto number = [](std::string_view token) {
    double v = 0.0;
    if (!detail::parse_finite(token, v) || !(v > 0.0)) {
      throw ConfigError("invalid sigma value '" + std::string(token) + "'");
    }
    return v;
  };
  if (text == "median") return SigmaMode::median();
  if (text.starts_with("grid:")) {
    std::vector<double> grid;
    for (auto token : detail::split(text.substr(5), ',')) grid.push_back(number(token));
    SigmaMode mode = SigmaMode::search(std::move(grid));
    mode.validate();
    return mode;
  }
  return SigmaMode::fixed(number(text));
}

/// Fully resolved settings of one CLI invocation. Serialized into the first line of
/// every output file and parseable back from it.
struct RunConfig {
  std::string command;  // rank | project | arrows | baseline | curve | bench
  std::string mode;     // baseline method or curve kind
  std::string input;
  std::string labels;
  std::string out;
  Orientation orientation = Orientation::samples_as_rows;
  bool standardize = true;
  KernelSpec kernel = KernelSpec::rbf(1.0);
  SigmaMode sigma = SigmaMode::median();
  std::optional<double> resolved_sigma;
  std::size_t q = 2;
  std::uint64_t seed = 1;
  std::vector<std::size_t> d_grid;
  std::size_t runs = 20;
  std::size_t splits = 5;
  std::size_t clusters = 0;  // 0: number of distinct labels
  std::vector<std::string> rankings{"kpcaig"};
  std::string feature;
  double scale = 1.0;
  std::size_t knn = 5;
  double heat_t = 0.0;  // 0: mean squared pairwise distance
  std::size_t n_perm = 1;
  std::string distance = "subspace";
  std::size_t restarts = 10;
  double train_fraction = 0.75;
  unsigned threads = 1;
  std::size_t bench_n = 165;
  std::size_t bench_p = 12626;

  void validate() const {
    kernel.validate();
    sigma.validate();
    auto positive = [](std::size_t v, const char* name) {
      if (v < 1) throw ConfigError(std::string(name) + " must be positive");
    };
    positive(q, "q");
    positive(runs, "runs");
    positive(splits, "splits");
    positive(knn, "knn");
    positive(n_perm, "n-perm");
    positive(restarts, "restarts");
    positive(threads, "threads");
    positive(bench_n, "bench n");
    positive(bench_p, "bench p");
    for (std::size_t d : d_grid) positive(d, "d-grid values");
    if (!(scale >= 0.0)) throw ConfigError("scale must be >= 0");
    if (!(heat_t >= 0.0)) throw ConfigError("heat-t must be >= 0");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train fraction must lie in (0, 1)");
    if (distance != "subspace" && distance != "gram") throw ConfigError("distance must be 'subspace' or 'gram'");
    if (rankings.empty()) throw ConfigError("at least one ranking is required");
    for (const auto& r : rankings) {
      if (r != "kpcaig" && r != "random" && r != "laplacian" && r != "permute") {
        throw ConfigError("unknown ranking '" + r + "'");
      }
    }
  }

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

inline nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
  j["command"] = c.command;
  j["mode"] = c.mode;
  j["input"] = c.input;
  j["labels"] = c.labels;
  j["out"] = c.out;
  j["orientation"] = std::string(to_string(c.orientation));
  j["standardize"] = c.standardize;
  j["kernel"] = std::string(to_string(c.kernel.family));
  j["degree"] = c.kernel.degree;
  j["coef0"] = c.kernel.coef0;
  j["sigma"] = to_string(c.sigma);
  j["resolved_sigma"] = c.resolved_sigma ? nlohmann::json(*c.resolved_sigma) : nlohmann::json(nullptr);
  j["q"] = c.q;
  j["seed"] = c.seed;
  j["d_grid"] = c.d_grid;
  j["runs"] = c.runs;
  j["splits"] = c.splits;
  j["clusters"] = c.clusters;
  j["rankings"] = c.rankings;
  j["feature"] = c.feature;
  j["scale"] = c.scale;
  j["knn"] = c.knn;
  j["heat_t"] = c.heat_t;
  j["n_perm"] = c.n_perm;
  j["distance"] = c.distance;
  j["restarts"] = c.restarts;
  j["train_fraction"] = c.train_fraction;
  j["threads"] = c.threads;
  j["bench_n"] = c.bench_n;
  j["bench_p"] = c.bench_p;
  return j;
}

inline RunConfig config_from_json(const nlohmann::json& j) {
  try {
    RunConfig c;
    c.command = j.at("command").get<std::string>();
    c.mode = j.at("mode").get<std::string>();
    c.input = j.at("input").get<std::string>();
    c.labels = j.at("labels").get<std::string>();
    c.out = j.at("out").get<std::string>();
    c.orientation = parse_orientation(j.at("orientation").get<std::string>());
    c.standardize = j.at("standardize").get<bool>();
    c.kernel.family = parse_kernel_family(j.at("kernel").get<std::string>());
    c.kernel.degree = j.at("degree").get<int>();
    c.kernel.coef0 = j.at("coef0").get<double>();
    c.sigma = parse_sigma_mode(j.at("sigma").get<std::string>());
    if (c.sigma.kind == SigmaMode::Kind::fixed) c.kernel.sigma = c.sigma.value;
    if (!j.at("resolved_sigma").is_null()) c.resolved_sigma = j.at("resolved_sigma").get<double>();
    c.q = j.at("q").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.d_grid = j.at("d_grid").get<std::vector<std::size_t>>();
    c.runs = j.at("runs").get<std::size_t>();
    c.splits = j.at("splits").get<std::size_t>();
    c.clusters = j.at("clusters").get<std::size_t>();
    c.rankings = j.at("rankings").get<std::vector<std::string>>();
    c.feature = j.at("feature").get<std::string>();
    c.scale = j.at("scale").get<double>();
    c.knn = j.at("knn").get<std::size_t>();
    c.heat_t = j.at("heat_t").get<double>();
    c.n_perm = j.at("n_perm").get<std::size_t>();
    c.distance = j.at("distance").get<std::string>();
    c.restarts = j.at("restarts").get<std::size_t>();
    c.train_fraction = j.at("train_fraction").get<double>();
    c.threads = j.at("threads").get<unsigned>();
    c.bench_n = j.at("bench_n").get<std::size_t>();
    c.bench_p = j.at("bench_p").get<std::size_t>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  }
}

inline constexpr std::string_view kHeaderPrefix = "# kpcaig ";

/// The comment line that opens every output table.
inline std::string config_header(const RunConfig& c) { return std::string(kHeaderPrefix) + to_json(c).dump(); }

inline RunConfig parse_config_header(std::string_view line) {
  while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.remove_suffix(1);
  if (!line.starts_with(kHeaderPrefix)) throw ConfigError("not a configuration header line");
  line.remove_prefix(kHeaderPrefix.size());
  try {
    return config_from_json(nlohmann::json::parse(line));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("malformed configuration header: ") + e.what());
  }
}

}  // namespace kpcaig
