#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "kpcaig/baselines.hpp"
#include "kpcaig/config.hpp"
#include "kpcaig/curves.hpp"
#include "kpcaig/dataset.hpp"
#include "kpcaig/error.hpp"
#include "kpcaig/importance.hpp"
#include "kpcaig/io.hpp"
#include "kpcaig/kpca.hpp"
#include "kpcaig/synthetic.hpp"

namespace kpcaig::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,       // unknown flag, missing argument
  kConfig = 3,      // invalid parameter values
  kIo = 4,          // file cannot be read or written
  kData = 5,        // malformed matrix or label file
  kDegenerate = 6,  // data admits no answer (e.g. all samples identical)
};

namespace detail {

struct Loaded {
  Dataset data;
  std::vector<int> labels;
};

inline Loaded load_inputs(const RunConfig& c, std::ostream& err) {
  if (c.input.empty()) throw ConfigError("--input is required");
  Loaded l;
  l.data = load_matrix(c.input, c.orientation);
  if (c.standardize) {
    StandardizeReport report;
    l.data = standardize(l.data, &report);
    for (std::size_t j : report.constant_columns) {
      err << "warning: feature '" << l.data.feature_names[j] << "' is constant\n";
    }
  }
  if (!c.labels.empty()) {
    l.labels = load_labels(c.labels);
    if (l.labels.size() != l.data.samples()) {
      throw FormatError("label file has " + std::to_string(l.labels.size()) + " entries, matrix has " +
                        std::to_string(l.data.samples()) + " samples");
    }
  }
  return l;
}

inline std::size_t cluster_count(const RunConfig& c, const std::vector<int>& labels) {
  if (c.clusters > 0) return c.clusters;
  if (labels.empty()) throw ConfigError("--clusters or --labels is required");
  return std::set<int>(labels.begin(), labels.end()).size();
}

inline std::size_t feature_index(const Dataset& d, const std::string& feature) {
  for (std::size_t j = 0; j < d.feature_names.size(); ++j) {
    if (d.feature_names[j] == feature) return j;
  }
  std::size_t used = 0;
  try {
    const long long v = std::stoll(feature, &used);
    if (used == feature.size() && v >= 1 && static_cast<std::size_t>(v) <= d.features()) {
      return static_cast<std::size_t>(v - 1);
    }
  } catch (const std::exception&) {
  }
  throw ConfigError("unknown feature '" + feature + "'");
}

inline std::vector<std::size_t> default_grid(std::size_t p) {
  std::vector<std::size_t> grid;
  for (std::size_t d = 10; d <= std::min<std::size_t>(300, p); d += 10) grid.push_back(d);
  if (grid.empty()) grid.push_back(p);
  return grid;
}

// Writes to --out when given, otherwise to the caller's stream.
class Sink {
public:
  Sink(const std::string& path, std::ostream& fallback) {
    if (path.empty() || path == "-") {
      stream_ = &fallback;
    } else {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw IoError("cannot open '" + path + "' for writing");
      stream_ = file_.get();
    }
  }
  std::ostream& stream() { return *stream_; }
  void finish() {
    stream_->flush();
    if (!*stream_) throw IoError("write failed");
  }

private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_ = nullptr;
};

inline FittedKpca fit_model(RunConfig& c, const Eigen::MatrixXd& x, std::ostream& err) {
  const KernelSpec spec = resolve_kernel(c.kernel, c.sigma, x, c.q);
  if (spec.family == KernelFamily::rbf) c.resolved_sigma = spec.sigma;
  FittedKpca model = fit_kpca(x, spec, c.q);
  if (model.reduced()) {
    err << "warning: only " << model.q() << " of " << c.q << " components are numerically valid\n";
  }
  return model;
}

inline std::vector<std::size_t> ranking_order(RunConfig& c, const std::string& name, const Dataset& d,
                                              std::ostream& err) {
  if (name == "kpcaig") return rank_features(fit_model(c, d.matrix, err), d.feature_names, c.threads).order;
  if (name == "random") return random_ranking(d.features(), c.seed);
  if (name == "laplacian") {
    return laplacian_score(d.matrix, c.knn, c.heat_t > 0.0 ? std::optional<double>(c.heat_t) : std::nullopt).order;
  }
  const KernelSpec spec = resolve_kernel(c.kernel, c.sigma, d.matrix, c.q);
  return permutation_importance(d.matrix, spec, c.q, c.n_perm, c.seed,
                                c.distance == "gram" ? PermuteDistance::gram_frobenius : PermuteDistance::subspace,
                                c.threads)
      .order;
}

inline void run_rank(RunConfig& c, std::ostream& out, std::ostream& err) {
  const auto in = load_inputs(c, err);
  const FittedKpca model = fit_model(c, in.data.matrix, err);
  const FeatureRanking ranking = rank_features(model, in.data.feature_names, c.threads);
  Sink sink(c.out, out);
  sink.stream() << config_header(c) << '\n';
  write_ranking(sink.stream(), ranking);
  sink.finish();
}

inline void run_project(RunConfig& c, std::ostream& out, std::ostream& err) {
  if (c.out.empty() || c.out == "-") throw ConfigError("project needs --out (the variance sidecar is written next to it)");
  const auto in = load_inputs(c, err);
  const FittedKpca model = fit_model(c, in.data.matrix, err);
  const Embedding embedding = project_training(model);
  Sink sink(c.out, out);
  sink.stream() << config_header(c) << '\n';
  write_embedding(sink.stream(), embedding.coords, in.data.sample_ids);
  sink.finish();

  nlohmann::json sidecar;
  sidecar["config"] = to_json(c);
  sidecar["q"] = model.q();
  sidecar["eigenvalues"] = std::vector<double>(model.eigenvalues.data(), model.eigenvalues.data() + model.eigenvalues.size());
  sidecar["explained_variance"] = std::vector<double>(embedding.component_variance.data(),
                                                      embedding.component_variance.data() + embedding.component_variance.size());
  sidecar["explained_variance_total"] = embedding.component_variance.sum();
  Sink side(c.out + ".variance.json", out);
  side.stream() << sidecar.dump(2) << '\n';
  side.finish();
}

inline void run_arrows(RunConfig& c, std::ostream& out, std::ostream& err) {
  if (c.feature.empty()) throw ConfigError("arrows needs --feature");
  const auto in = load_inputs(c, err);
  const std::size_t j = feature_index(in.data, c.feature);
  const FittedKpca model = fit_model(c, in.data.matrix, err);
  const auto arrows = arrow_field(model, j, c.scale);
  Sink sink(c.out, out);
  sink.stream() << config_header(c) << '\n';
  write_arrows(sink.stream(), arrows, in.data.sample_ids);
  sink.finish();
}

inline void run_baseline(RunConfig& c, std::ostream& out, std::ostream& err) {
  const auto in = load_inputs(c, err);
  BaselineRanking ranking;
  if (c.mode == "laplacian") {
    ranking = laplacian_score(in.data.matrix, c.knn, c.heat_t > 0.0 ? std::optional<double>(c.heat_t) : std::nullopt);
  } else {
    const KernelSpec spec = resolve_kernel(c.kernel, c.sigma, in.data.matrix, c.q);
    if (spec.family == KernelFamily::rbf) c.resolved_sigma = spec.sigma;
    ranking = permutation_importance(in.data.matrix, spec, c.q, c.n_perm, c.seed,
                                     c.distance == "gram" ? PermuteDistance::gram_frobenius : PermuteDistance::subspace,
                                     c.threads);
  }
  Sink sink(c.out, out);
  sink.stream() << config_header(c) << '\n';
  write_baseline(sink.stream(), ranking, in.data.feature_names);
  sink.finish();
}

inline void run_curve(RunConfig& c, std::ostream& out, std::ostream& err) {
  const auto in = load_inputs(c, err);
  const Dataset& d = in.data;
  if (c.d_grid.empty()) c.d_grid = default_grid(d.features());
  std::ostringstream body;
  if (c.mode == "selection") {
    if (in.labels.empty()) throw ConfigError("curve selection needs --labels");
    const std::size_t k = cluster_count(c, in.labels);
    bool header = true;
    for (const auto& name : c.rankings) {
      const auto order = ranking_order(c, name, d, err);
      write_selection_curve(body, name, selection_curve(d.matrix, order, in.labels, k, c.d_grid, c.runs, c.seed),
                            header);
      header = false;
    }
  } else if (c.mode == "silhouette") {
    const std::size_t k = cluster_count(c, in.labels);
    bool header = true;
    for (const auto& name : c.rankings) {
      const auto order = ranking_order(c, name, d, err);
      write_silhouette_curve(body, name,
                             silhouette_curve(d.matrix, order, c.kernel, c.sigma, k, c.d_grid, c.seed, c.restarts),
                             header);
      header = false;
    }
  } else {
    write_variance_curve(body, variance_generalization(d.matrix, c.kernel, c.sigma, c.q, c.d_grid, c.splits, c.seed,
                                                       c.train_fraction));
  }
  Sink sink(c.out, out);
  sink.stream() << config_header(c) << '\n' << body.str();
  sink.finish();
}

inline void run_bench(RunConfig& c, std::ostream& out, std::ostream& err) {
  using clock = std::chrono::steady_clock;
  auto seconds = [](clock::time_point a, clock::time_point b) { return std::chrono::duration<double>(b - a).count(); };
  std::vector<std::pair<std::string, double>> stages;
  auto t0 = clock::now();
  Dataset data;
  if (c.input.empty()) {
    data = synthetic::gaussian_noise(c.bench_n, c.bench_p, c.seed);
    data = standardize(data);
  } else {
    data = load_inputs(c, err).data;
  }
  auto t1 = clock::now();
  stages.emplace_back("load", seconds(t0, t1));
  const FittedKpca model = fit_model(c, data.matrix, err);
  auto t2 = clock::now();
  stages.emplace_back("fit", seconds(t1, t2));
  const FeatureRanking ranking = rank_features(model, data.feature_names, c.threads);
  auto t3 = clock::now();
  stages.emplace_back("rank", seconds(t2, t3));
  stages.emplace_back("fit_and_rank", seconds(t1, t3));

  Sink sink(c.out, out);
  sink.stream() << config_header(c) << '\n';
  sink.stream() << "stage\tseconds\n";
  for (const auto& [stage, s] : stages) sink.stream() << stage << '\t' << format_double(s) << '\n';
  sink.stream() << "# samples=" << data.samples() << " features=" << data.features()
                << " top_feature=" << ranking.feature_names[ranking.order.front()] << '\n';
  sink.finish();
}

}  // namespace detail

/// Runs one invocation. `args` includes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Kernel PCA with gradient-based feature ranking"};
  app.require_subcommand(1);
  RunConfig c;
  std::string kernel = "rbf";
  std::string sigma = "median";
  std::string orientation = "rows";
  std::string d_grid;
  bool no_standardize = false;
  std::vector<std::string> rankings;

  auto common = [&](CLI::App* sub) {
    sub->add_option("-i,--input", c.input, "Delimited matrix file");
    sub->add_option("-o,--out", c.out, "Output file (default: stdout)");
    sub->add_option("--orientation", orientation, "rows: samples are rows; cols: features are rows")
        ->check(CLI::IsMember({"rows", "cols"}));
    sub->add_flag("--no-standardize", no_standardize, "Skip column standardization");
    sub->add_option("--kernel", kernel, "rbf | linear | poly");
    sub->add_option("--sigma", sigma, "<value> | median | grid:<v1,v2,...>");
    sub->add_option("--degree", c.kernel.degree, "Polynomial degree");
    sub->add_option("--coef0", c.kernel.coef0, "Polynomial offset");
    sub->add_option("--q", c.q, "Retained kernel principal components");
    sub->add_option("--seed", c.seed, "Random seed");
    sub->add_option("--threads", c.threads, "Worker threads (results do not depend on it)");
  };

  auto* rank = app.add_subcommand("rank", "Rank features by mean gradient norm");
  common(rank);
  auto* project = app.add_subcommand("project", "Kernel PCA embedding of the training samples");
  common(project);
  auto* arrows = app.add_subcommand("arrows", "Per-sample gradient arrows of one feature on PC1/PC2");
  common(arrows);
  arrows->add_option("--feature", c.feature, "Feature name or 1-based index")->required();
  arrows->add_option("--scale", c.scale, "Arrow length multiplier");

  auto* baseline = app.add_subcommand("baseline", "Laplacian score or permutation importance");
  common(baseline);
  baseline->add_option("method", c.mode, "laplacian | permute")->required()->check(CLI::IsMember({"laplacian", "permute"}));
  baseline->add_option("--knn", c.knn, "Neighbours in the Laplacian graph");
  baseline->add_option("--heat-t", c.heat_t, "Heat-kernel width (default: mean squared distance)");
  baseline->add_option("--n-perm", c.n_perm, "Permutations per feature");
  baseline->add_option("--distance", c.distance, "subspace | gram")->check(CLI::IsMember({"subspace", "gram"}));

  auto* curve = app.add_subcommand("curve", "Evaluation curves over feature-subset sizes");
  common(curve);
  curve->add_option("kind", c.mode, "selection | silhouette | variance")
      ->required()
      ->transform(CLI::IsMember(std::map<std::string, std::string>{{"selection", "selection"},
                                                                   {"selection_curve", "selection"},
                                                                   {"silhouette", "silhouette"},
                                                                   {"silhouette-curve", "silhouette"},
                                                                   {"variance", "variance"},
                                                                   {"variance-split", "variance"}}));
  curve->add_option("--labels", c.labels, "One integer label per sample");
  curve->add_option("--d-grid", d_grid, "start:stop:step or comma list");
  curve->add_option("--runs", c.runs, "k-means runs per subset");
  curve->add_option("--splits", c.splits, "Train/test splits");
  curve->add_option("--clusters", c.clusters, "k for k-means (default: distinct labels)");
  curve->add_option("--ranking", rankings, "kpcaig | random | laplacian | permute (repeatable)");
  curve->add_option("--restarts", c.restarts, "k-means restarts per silhouette point");
  curve->add_option("--train-fraction", c.train_fraction, "Training share of each split");
  curve->add_option("--knn", c.knn, "Neighbours for the laplacian ranking");
  curve->add_option("--n-perm", c.n_perm, "Permutations for the permute ranking");

  auto* bench = app.add_subcommand("bench", "Time fit and ranking (informational)");
  common(bench);
  bench->add_option("--n", c.bench_n, "Synthetic sample count");
  bench->add_option("--p", c.bench_p, "Synthetic feature count");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    c.command = app.get_subcommands().front()->get_name();
    c.orientation = parse_orientation(orientation);
    c.standardize = !no_standardize;
    c.kernel.family = parse_kernel_family(kernel);
    c.sigma = parse_sigma_mode(sigma);
    if (c.sigma.kind == SigmaMode::Kind::fixed) c.kernel.sigma = c.sigma.value;
    if (!d_grid.empty()) c.d_grid = parse_d_grid(d_grid);
    if (!rankings.empty()) c.rankings = rankings;
    if (c.command != "curve" && c.command != "baseline") c.mode.clear();
    c.validate();

    if (c.command == "rank") detail::run_rank(c, out, err);
    else if (c.command == "project") detail::run_project(c, out, err);
    else if (c.command == "arrows") detail::run_arrows(c, out, err);
    else if (c.command == "baseline") detail::run_baseline(c, out, err);
    else if (c.command == "curve") detail::run_curve(c, out, err);
    else detail::run_bench(c, out, err);
    return kOk;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kConfig;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kConfig;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  } catch (const DegenerateDataError& e) {
    err << "error: " << e.what() << '\n';
    return kDegenerate;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInternal;
  }
}

}  // namespace kpcaig::cli
