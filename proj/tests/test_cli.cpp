#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "kpcaig/cli.hpp"
#include "oracles.hpp"

using namespace kpcaig;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

class Cli : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("kpcaig_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name)) << text;
    return path(name);
  }

  std::string write(const std::string& name, const Dataset& d) const {
    std::ofstream out(path(name));
    write_matrix(out, d);
    return path(name);
  }

  static Result invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "kpcaig");
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
  }

  static std::string read(const std::string& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  }

  static std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> v;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) v.push_back(line);
    return v;
  }

  std::string toy() const {
    Dataset d = Dataset::from_matrix(oracle::random_matrix(10, 5, 3));
    d.matrix.col(2) *= 4.0;
    return write("toy.tsv", d);
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, ExitCodes) {
  const std::string ok = toy();
  EXPECT_EQ(invoke({"rank", "-i", ok}).code, 0);
  EXPECT_EQ(invoke({"rank", "-i", ok, "--bogus"}).code, 2);
  EXPECT_EQ(invoke({}).code, 2);
  EXPECT_EQ(invoke({"rank", "-i", ok, "--q", "0"}).code, 3);
  EXPECT_EQ(invoke({"rank", "-i", ok, "--sigma", "abc"}).code, 3);
  EXPECT_EQ(invoke({"rank", "-i", ok, "--q", "10"}).code, 3);
  EXPECT_EQ(invoke({"rank"}).code, 3);
  EXPECT_EQ(invoke({"rank", "-i", path("missing.tsv")}).code, 4);
  EXPECT_EQ(invoke({"rank", "-i", ok, "-o", path("no/such/dir/out.tsv")}).code, 4);
  EXPECT_EQ(invoke({"rank", "-i", write("na.tsv", "id\ta\tb\ns1\t1\tNA\ns2\t2\t3\n")}).code, 5);
  EXPECT_EQ(invoke({"rank", "-i", write("ragged.tsv", "id\ta\tb\ns1\t1\n")}).code, 5);
  const Result same = invoke({"rank", "-i", write("same.tsv", "id\ta\tb\ns1\t1\t2\ns2\t1\t2\ns3\t1\t2\n")});
  EXPECT_EQ(same.code, 6);
  EXPECT_NE(same.err.find("error:"), std::string::npos);
  EXPECT_EQ(invoke({"--help"}).code, 0);
}

TEST_F(Cli, RankTableIsSortedByScore) {
  const Result r = invoke({"rank", "-i", toy(), "--q", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = lines(r.out);
  ASSERT_EQ(rows.size(), 7u);
  EXPECT_EQ(rows[0].rfind("# kpcaig ", 0), 0u);
  EXPECT_EQ(rows[1], "rank\tfeature\tscore\tstd");
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t i = 2; i < rows.size(); ++i) {
    std::istringstream fields(rows[i]);
    std::size_t rank = 0;
    std::string name;
    double score = 0.0;
    fields >> rank >> name >> score;
    EXPECT_EQ(rank, i - 1);
    EXPECT_LE(score, previous);
    previous = score;
  }
}

TEST_F(Cli, RepeatedRunsAreByteIdentical) {
  const std::string in = toy();
  const Result a = invoke({"rank", "-i", in, "--seed", "4"});
  const Result b = invoke({"rank", "-i", in, "--seed", "4"});
  EXPECT_EQ(a.out, b.out);
  const Result c = invoke({"baseline", "permute", "-i", in, "--n-perm", "3"});
  const Result d = invoke({"baseline", "permute", "-i", in, "--n-perm", "3"});
  EXPECT_EQ(c.out, d.out);
}

TEST_F(Cli, ThreadCountOnlyChangesHeader) {
  const std::string in = toy();
  const auto one = lines(invoke({"rank", "-i", in, "--threads", "1"}).out);
  const auto four = lines(invoke({"rank", "-i", in, "--threads", "4"}).out);
  ASSERT_EQ(one.size(), four.size());
  for (std::size_t i = 1; i < one.size(); ++i) EXPECT_EQ(one[i], four[i]);
}

TEST_F(Cli, HeaderParsesBackToTheRunConfig) {
  const std::string in = toy();
  const Result r = invoke({"rank", "-i", in, "--q", "3", "--kernel", "poly", "--degree", "3", "--seed", "9"});
  ASSERT_EQ(r.code, 0) << r.err;
  const RunConfig c = parse_config_header(lines(r.out)[0]);
  EXPECT_EQ(c.command, "rank");
  EXPECT_EQ(c.input, in);
  EXPECT_EQ(c.q, 3u);
  EXPECT_EQ(c.kernel.family, KernelFamily::polynomial);
  EXPECT_EQ(c.kernel.degree, 3);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_FALSE(c.resolved_sigma.has_value());

  const Result rbf = invoke({"rank", "-i", in});
  const RunConfig d = parse_config_header(lines(rbf.out)[0]);
  ASSERT_TRUE(d.resolved_sigma.has_value());
  EXPECT_GT(*d.resolved_sigma, 0.0);
  // Re-running with the resolved width pinned reproduces the table.
  const Result pinned = invoke({"rank", "-i", in, "--sigma", format_double(*d.resolved_sigma)});
  EXPECT_EQ(lines(pinned.out)[2], lines(rbf.out)[2]);
}

TEST_F(Cli, ProjectWritesEmbeddingAndSidecar) {
  const std::string out = path("emb.tsv");
  EXPECT_EQ(invoke({"project", "-i", toy(), "--q", "3"}).code, 3);
  const Result r = invoke({"project", "-i", toy(), "--q", "3", "-o", out});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = lines(read(out));
  ASSERT_EQ(rows.size(), 12u);
  EXPECT_EQ(rows[1], "sample\tpc1\tpc2\tpc3");
  const auto side = nlohmann::json::parse(read(out + ".variance.json"));
  EXPECT_EQ(side["q"], 3);
  EXPECT_EQ(side["eigenvalues"].size(), 3u);
  double total = 0.0;
  for (double v : side["explained_variance"]) total += v;
  EXPECT_NEAR(side["explained_variance_total"].get<double>(), total, 1e-12);
  EXPECT_LE(total, 1.0 + 1e-12);
  EXPECT_EQ(config_from_json(side["config"]).command, "project");
}

TEST_F(Cli, ArrowsByNameOrIndex) {
  const std::string in = toy();
  const Result by_index = invoke({"arrows", "-i", in, "--feature", "3"});
  const Result by_name = invoke({"arrows", "-i", in, "--feature", "f3"});
  ASSERT_EQ(by_index.code, 0) << by_index.err;
  const auto a = lines(by_index.out);
  const auto b = lines(by_name.out);
  ASSERT_EQ(a.size(), 12u);
  EXPECT_EQ(a[1], "x\ty\tdx\tdy\tsample_id");
  for (std::size_t i = 1; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);
  EXPECT_EQ(invoke({"arrows", "-i", in, "--feature", "6"}).code, 3);
  EXPECT_EQ(invoke({"arrows", "-i", in, "--feature", "zzz"}).code, 3);
  EXPECT_EQ(invoke({"arrows", "-i", in, "--feature", "1", "--q", "1"}).code, 3);
}

TEST_F(Cli, BaselinesProduceFullRankings) {
  const std::string in = toy();
  for (const std::string method : {"laplacian", "permute"}) {
    const Result r = invoke({"baseline", method, "-i", in, "--knn", "3"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = lines(r.out);
    ASSERT_EQ(rows.size(), 7u);
    EXPECT_EQ(rows[1], "rank\tfeature\tscore");
    EXPECT_EQ(parse_config_header(rows[0]).mode, method);
  }
  EXPECT_EQ(invoke({"baseline", "other", "-i", in}).code, 2);
}

TEST_F(Cli, SelectionCurveFavoursKpcaIgAtSmallD) {
  const auto planted = synthetic::planted_clusters({.n = 120, .p = 100}, 5);
  const std::string in = write("planted.tsv", planted.data);
  std::string labels;
  for (int l : *planted.data.labels) labels += std::to_string(l) + "\n";
  const std::string lab = write("labels.txt", labels);
  const Result r = invoke({"curve", "selection", "-i", in, "--labels", lab, "--ranking", "kpcaig", "--ranking", "random",
                           "--d-grid", "10,100", "--runs", "5", "--q", "3", "--seed", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = lines(r.out);
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[1], "ranking\td\tacc_mean\tacc_std\tnmi_mean\tnmi_std");
  std::map<std::string, double> acc10;
  for (std::size_t i = 2; i < rows.size(); ++i) {
    std::istringstream fields(rows[i]);
    std::string name;
    std::size_t d = 0;
    double acc = 0.0;
    fields >> name >> d >> acc;
    if (d == 10) acc10[name] = acc;
  }
  EXPECT_GT(acc10["kpcaig"], acc10["random"]);
  EXPECT_EQ(invoke({"curve", "selection", "-i", in}).code, 3);
  EXPECT_EQ(invoke({"curve", "selection", "-i", in, "--labels", write("short.txt", "0\n1\n")}).code, 5);
}

TEST_F(Cli, SilhouetteAndVarianceCurves) {
  const std::string in = write("manifold.tsv", synthetic::smooth_manifold(40, 12, 0.3, 1));
  const Result s = invoke({"curve", "silhouette", "-i", in, "--clusters", "3", "--d-grid", "4,12", "--ranking",
                           "kpcaig", "--ranking", "laplacian", "--restarts", "2"});
  ASSERT_EQ(s.code, 0) << s.err;
  EXPECT_EQ(lines(s.out).size(), 6u);
  const Result v = invoke({"curve", "variance", "-i", in, "--splits", "2", "--d-grid", "6,12"});
  ASSERT_EQ(v.code, 0) << v.err;
  const auto rows = lines(v.out);
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[1], "split\td\tvar_train\tvar_test");
  EXPECT_EQ(invoke({"curve", "silhouette", "-i", in}).code, 3);
  EXPECT_EQ(invoke({"curve", "variance", "-i", in, "--d-grid", "0"}).code, 3);
}

TEST_F(Cli, BenchReportsStages) {
  const Result r = invoke({"bench", "--n", "20", "--p", "30"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = lines(r.out);
  ASSERT_EQ(rows.size(), 7u);
  EXPECT_EQ(rows[1], "stage\tseconds");
  EXPECT_EQ(rows[2].rfind("load\t", 0), 0u);
  EXPECT_EQ(rows[5].rfind("fit_and_rank\t", 0), 0u);
  EXPECT_EQ(rows[6].rfind("# samples=20 features=30 top_feature=", 0), 0u);
}

TEST_F(Cli, TransposedInputMatchesRowInput) {
  const std::string rows_file = toy();
  const Dataset d = load_matrix(rows_file, Orientation::samples_as_rows);
  std::ostringstream t;
  t << "id";
  for (const auto& s : d.sample_ids) t << '\t' << s;
  t << '\n';
  for (Eigen::Index j = 0; j < d.matrix.cols(); ++j) {
    t << d.feature_names[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 0; i < d.matrix.rows(); ++i) t << '\t' << format_double(d.matrix(i, j));
    t << '\n';
  }
  const std::string cols_file = write("toy_t.tsv", t.str());
  const auto a = lines(invoke({"rank", "-i", rows_file}).out);
  const auto b = lines(invoke({"rank", "-i", cols_file, "--orientation", "cols"}).out);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 1; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);
}
