#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "helpers.hpp"

using namespace srip;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "srip");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path scratch(const std::string& name) {
  const char* base = std::getenv("SRIP_TEST_TMP");
  std::filesystem::path dir = base ? base : std::filesystem::temp_directory_path();
  dir /= "cli_scratch";
  std::filesystem::create_directories(dir);
  return dir / name;
}

void write(const std::filesystem::path& p, const std::string& text) { std::ofstream(p) << text; }

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) break;
    std::vector<std::string> fields;
    std::istringstream ls(line);
    std::string f;
    while (std::getline(ls, f, ',')) fields.push_back(f);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    rows.push_back(fields);
  }
  return rows;
}

/// Field-by-field comparison of a CSV table with its JSON twin.
void expect_same_content(const std::string& csv, const io::Json& json) {
  const auto rows = csv_rows(csv);
  ASSERT_EQ(rows.size(), json.size() + 1);
  const auto& header = rows.front();
  for (std::size_t r = 0; r < json.size(); ++r) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      const auto& v = json[r].at(header[c]);
      const std::string& text = rows[r + 1][c];
      if (v.is_null()) {
        EXPECT_TRUE(text.empty() || text == "nan") << header[c];
      } else if (v.is_string()) {
        EXPECT_EQ(text, v.get<std::string>());
      } else if (v.is_boolean()) {
        EXPECT_EQ(text, v.get<bool>() ? "true" : "false");
      } else if (v.is_number_unsigned()) {
        EXPECT_EQ(text, std::to_string(v.get<std::uint64_t>()));
      } else {
        EXPECT_EQ(std::stod(text), v.get<double>()) << header[c];
      }
    }
  }
}

std::string subspace_file(const std::string& name, const Subspace& s) {
  std::ostringstream os;
  io::write_subspace_csv(os, s);
  const auto p = scratch(name);
  write(p, os.str());
  return p.string();
}

}  // namespace

TEST(CliAffinity, SameSubspaceTwice) {
  Rng rng = make_rng(1);
  const auto f = subspace_file("same.csv", random_subspace(10, 3, rng));
  const auto r = run({"affinity", "--x1", f, "--x2", f});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_NEAR(std::stod(rows[1][4]), 3.0, 1e-10);  // aff_sq
  EXPECT_NEAR(std::stod(rows[1][5]), 0.0, 1e-6);   // dist
}

TEST(CliAffinity, GeneratedPairs) {
  auto r = run({"affinity", "--lambdas", "0", "-N", "8"});
  ASSERT_EQ(r.code, 0);
  EXPECT_NEAR(std::stod(csv_rows(r.out)[1][3]), 0.0, 1e-9);
  r = run({"affinity", "--lambdas", "0.9,0.5", "--seed", "4"});
  ASSERT_EQ(r.code, 0);
  EXPECT_NEAR(std::stod(csv_rows(r.out)[1][4]), 1.06, 1e-9);
  EXPECT_LE(std::stod(csv_rows(r.out)[1][7]), 1e-9);
}

TEST(CliAffinity, ExitCodes) {
  Rng rng = make_rng(2);
  const auto a = subspace_file("a.csv", random_subspace(6, 2, rng));
  const auto b = subspace_file("b.csv", random_subspace(7, 2, rng));
  const auto bad = scratch("bad.csv");
  write(bad, "6,2\n1,2,3\n");
  EXPECT_EQ(run({"affinity", "--x1", a, "--x2", b}).code, 3);
  EXPECT_EQ(run({"affinity", "--x1", a, "--x2", bad.string()}).code, 2);
  EXPECT_EQ(run({"affinity", "--x1", a, "--x2", scratch("missing.csv").string()}).code, 2);
  EXPECT_EQ(run({"affinity", "--x1", a}).code, 2);
  EXPECT_EQ(run({"affinity", "--bogus"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"affinity", "--format", "xml"}).code, 2);
}

TEST(CliVerify, IdentityStub) {
  const auto r = run({"verify", "--family", "identity", "-n", "64", "-N", "64", "--trials", "3", "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = io::Json::parse(r.out);
  for (const auto& row : j["summary"]) EXPECT_LE(row["Delta"].get<double>(), 1e-12);
  EXPECT_EQ(j["pairs"].size(), 3u * 6u);
}

TEST(CliVerify, GaussianDefaultRunWritesReport) {
  const auto path = scratch("verify.csv");
  const auto r = run({"verify", "--family", "gaussian", "--subspaces", "4", "--dim", "4", "-N", "128", "-n", "96",
                      "--trials", "50", "-o", path.string()});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto text = io::read_file(path.string());
  const auto rows = csv_rows(text);
  ASSERT_EQ(rows.size(), 1u + 50u * 6u);
  EXPECT_EQ(rows.front(), (std::vector<std::string>{"trial", "i", "j", "d_i", "d_j", "aff_x_sq", "aff_y_sq", "ratio",
                                                    "delta", "bound_ratio", "hypothesis_violated", "n", "N", "family",
                                                    "seed"}));
  EXPECT_NE(text.find("trial,seed,Delta,hypothesis_violated_pairs"), std::string::npos);
}

TEST(CliVerify, TinyTargetDimensionWarnsButSucceeds) {
  const auto r = run({"verify", "-n", "2", "--trials", "3"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("warning"), std::string::npos);
  const auto rows = csv_rows(r.out);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(rows[i][10], "true");
}

TEST(CliVerify, InvalidSpecIsInputError) {
  EXPECT_EQ(run({"verify", "--family", "partial_hadamard", "-N", "100", "-n", "10"}).code, 2);
  EXPECT_EQ(run({"verify", "--family", "nope"}).code, 2);
  EXPECT_EQ(run({"verify", "-n", "200", "-N", "100"}).code, 2);
}

TEST(CliLineBound, RunsAndReportsRatios) {
  const auto r = run({"line-bound", "--trials", "100", "-n", "200", "-N", "256", "--dim", "2", "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = io::Json::parse(r.out);
  ASSERT_EQ(j.size(), 100u);
  for (const auto& row : j)
    if (!row["bound_ratio"].is_null()) EXPECT_LE(row["bound_ratio"].get<double>(), kLineBoundConstant);
}

TEST(CliJlTail, IdentityNeverExceeds) {
  const auto r = run({"jl-tail", "--family", "identity", "-n", "16", "-N", "16", "--trials", "100", "--eps", "0.01"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(csv_rows(r.out)[1][1], "0");
  EXPECT_EQ(run({"jl-tail", "--trials", "10"}).code, 2);
}

TEST(CliCluster, OrthogonalLinesDataset) {
  const auto ds = sample_uos({testing_util::coordinate_subspace(2, {0}), testing_util::coordinate_subspace(2, {1})},
                             {10, 10}, 0.0, 3);
  std::ostringstream os;
  io::write_dataset_csv(os, ds.points, 2, ds.labels);
  const auto p = scratch("lines.csv");
  write(p, os.str());
  const auto r = run({"cluster", "--input", p.string(), "--neighbors", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1][2], "0");

  std::ostringstream unlabeled;
  io::write_dataset_csv(unlabeled, ds.points, 2);
  write(p, unlabeled.str());
  const auto u = run({"cluster", "--input", p.string(), "--neighbors", "3"});
  ASSERT_EQ(u.code, 0) << u.err;
  EXPECT_EQ(csv_rows(u.out).size(), 21u);
}

TEST(CliCluster, SyntheticProjected) {
  const auto r = run({"cluster", "--trials", "2", "-n", "64", "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = io::Json::parse(r.out);
  ASSERT_EQ(j.size(), 2u);
  EXPECT_TRUE(j[0].contains("error_rate"));
}

TEST(CliDetect, IdentityOperatorIsPerfect) {
  const auto r = run({"detect", "--family", "identity", "-n", "64", "-N", "64", "--trials", "2", "--draws", "200"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 3u);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(rows[i][4], "1");
}

TEST(CliBench, OneRowPerFamilyAndTarget) {
  const auto r = run({"bench", "-N", "64", "--ns", "4,16", "--vectors", "2", "--repeats", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = csv_rows(r.out);
  EXPECT_EQ(rows.front(), (std::vector<std::string>{"family", "n", "N", "mean_us", "median_us"}));
  EXPECT_EQ(rows.size(), 1u + 2u * kRandomFamilies.size());
}

TEST(CliGenProject, OperatorSubspaceDatasetAndProjection) {
  auto r = run({"gen", "--kind", "operator", "--family", "partial_fourier", "-n", "3", "-N", "8", "--seed", "5"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(csv_rows(r.out).size(), 3u);
  r = run({"gen", "--kind", "subspace", "-N", "8", "--dim", "2"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(io::parse_subspace(r.out).dim(), 2u);
  r = run({"gen", "--kind", "spec", "--family", "student_t", "--nu", "7"});
  EXPECT_EQ(io::spec_from_json(io::Json::parse(r.out)).params.nu, 7.0);
  r = run({"gen", "--kind", "dataset", "-N", "10", "--subspaces", "2", "--dim", "2", "--points-per", "4"});
  ASSERT_EQ(r.code, 0);
  const auto p = scratch("gen.csv");
  write(p, r.out);
  const auto pr = run({"project", "--input", p.string(), "-n", "5"});
  ASSERT_EQ(pr.code, 0) << pr.err;
  const auto ds = io::parse_dataset(pr.out);
  EXPECT_EQ(ds.points.rows(), 5u);
  EXPECT_EQ(ds.points.cols(), 8u);
  EXPECT_EQ(ds.labels.size(), 8u);
  EXPECT_EQ(run({"project", "--input", p.string(), "-n", "5", "-N", "11"}).code, 3);
  EXPECT_EQ(run({"gen", "--kind", "nothing"}).code, 2);
}

TEST(CliSeeds, EnvironmentFallbackAndFlagPrecedence) {
  const auto a = run({"gen", "--kind", "subspace", "-N", "6", "--dim", "1", "--seed", "9"});
  setenv("SRIP_SEED", "9", 1);
  const auto b = run({"gen", "--kind", "subspace", "-N", "6", "--dim", "1"});
  const auto c = run({"gen", "--kind", "subspace", "-N", "6", "--dim", "1", "--seed", "10"});
  setenv("SRIP_SEED", "zz", 1);
  const auto d = run({"gen", "--kind", "subspace", "-N", "6", "--dim", "1"});
  unsetenv("SRIP_SEED");
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out, c.out);
  EXPECT_EQ(d.code, 2);
}

TEST(CliConfig, JsonOverridesFlags) {
  const auto cfg = scratch("cfg.json");
  write(cfg, R"({"ensemble": {"family": "rademacher", "n": 4, "N": 8, "seed": 3}, "kind": "operator"})");
  const auto r = run({"gen", "--family", "gaussian", "-n", "2", "--config", cfg.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 4u);
  for (const auto& f : rows[0]) EXPECT_TRUE(f == "0.5" || f == "-0.5") << f;
  write(cfg, R"({"unknown": 1})");
  EXPECT_EQ(run({"gen", "--config", cfg.string()}).code, 2);
  write(cfg, R"({"trials": "many"})");
  EXPECT_EQ(run({"gen", "--config", cfg.string()}).code, 2);
}

TEST(CliFormats, CsvAndJsonAgree) {
  const std::vector<std::vector<std::string>> commands = {
      {"affinity", "--lambdas", "0.3,0.2"},
      {"jl-tail", "--trials", "200"},
      {"line-bound", "--trials", "50"},
      {"cluster", "--trials", "2", "-N", "64", "--points-per", "20"},
      {"detect", "--trials", "2", "--draws", "50"},
  };
  for (auto args : commands) {
    args.insert(args.end(), {"--seed", "123"});
    const auto csv = run(args);
    args.insert(args.end(), {"--format", "json"});
    const auto json = run(args);
    ASSERT_EQ(csv.code, 0) << args[0] << csv.err;
    ASSERT_EQ(json.code, 0) << args[0] << json.err;
    expect_same_content(csv.out, io::Json::parse(json.out));
  }
  const auto vcsv = run({"verify", "--trials", "2", "--seed", "5"});
  const auto vjson = run({"verify", "--trials", "2", "--seed", "5", "--format", "json"});
  expect_same_content(vcsv.out, io::Json::parse(vjson.out)["pairs"]);
}

TEST(CliDeterminism, RepeatedRunsAreByteIdentical) {
  const std::vector<std::vector<std::string>> commands = {
      {"affinity"},
      {"gen", "--kind", "operator", "--family", "partial_circulant"},
      {"verify", "--trials", "3"},
      {"line-bound", "--trials", "30"},
      {"jl-tail", "--trials", "100"},
      {"cluster", "--trials", "2", "-n", "32", "-N", "64", "--points-per", "15"},
      {"detect", "--draws", "40"},
  };
  for (auto args : commands) {
    args.insert(args.end(), {"--seed", "77"});
    const auto a = run(args);
    const auto b = run(args);
    ASSERT_EQ(a.code, 0) << args[0] << a.err;
    EXPECT_EQ(a.out, b.out) << args[0];
  }
  const auto one = run({"verify", "--trials", "4", "--threads", "1"});
  const auto three = run({"verify", "--trials", "4", "--threads", "3"});
  EXPECT_EQ(one.out, three.out);
}
