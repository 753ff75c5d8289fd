#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mdlab/config.hpp"
#include "mdlab/runner.hpp"
#include "mdlab/suite.hpp"

using namespace mdlab;
namespace fs = std::filesystem;

namespace {

const char* kSigma2Iid = R"({
  "task": "sigma2", "seed": 4,
  "model": {"type": "iid", "law": {"kind": "rademacher"}},
  "params": {"methods": ["covariance_series"], "n": 20000, "replicas": 5, "K_max": 5}
})";

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mdlab_test_cli_" + name);
  fs::remove_all(p);
  return p;
}

fs::path write_text(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p) << text;
  return p;
}

double csv_value(const std::string& csv, const std::string& row_key, std::size_t column) {
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(row_key + ",", 0) != 0) continue;
    std::istringstream cells(line);
    std::string cell;
    for (std::size_t i = 0; i <= column; ++i) std::getline(cells, cell, ',');
    return std::stod(cell);
  }
  return std::nan("");
}

}  // namespace

TEST(Config, RejectsUnknownField) {
  EXPECT_THROW(parse_config_text(R"({"task": "simulate", "seed": 1, "modle": {}})"), ConfigError);
  EXPECT_THROW(parse_config_text(R"({"task": "simulate", "seed": 1,
    "model": {"type": "iid", "law": {"kind": "rademacher", "bias": 0.1}}})"),
               ConfigError);
}

TEST(Config, RejectsBadValuesAndTypes) {
  const std::string model = R"("model": {"type": "iid", "law": {"kind": "rademacher"}})";
  EXPECT_THROW(parse_config_text(R"({"task": "simulate", "seed": 1, )" + model + R"(, "params": {"replicas": -3}})"),
               ConfigError);
  EXPECT_THROW(parse_config_text(R"({"task": "simulate", "seed": 1, )" + model + R"(, "params": {"n": "ten"}})"),
               ConfigError);
  EXPECT_THROW(parse_config_text(R"({"task": "simulate", "seed": -1, )" + model + "}"), ConfigError);
  EXPECT_THROW(parse_config_text(R"({"task": "teleport", "seed": 1})"), ConfigError);
  EXPECT_THROW(parse_config_text(R"({"task": "mdp-scan", "seed": 1, )" + model + R"(, "params": {"gamma": 1.0}})"),
               ConfigError);
  EXPECT_THROW(parse_config_text(R"({"task": "inequality", "seed": 1, )" + model +
                                 R"(, "params": {"bound": "azuma", "replicas": 10}})"),
               ConfigError);
  // Model required for simulation tasks.
  EXPECT_THROW(parse_config_text(R"({"task": "simulate", "seed": 1})"), ConfigError);
  // Domain errors raised while building specs surface as config errors.
  EXPECT_THROW(parse_config_text(R"({"task": "diophantine", "seed": 1,
    "params": {"irrational": {"kind": "quadratic", "P": 0, "D": 9, "Q": 1}}})"),
               ConfigError);
}

TEST(Config, AcceptsComments) {
  const auto c = parse_config_text("// header\n{\"task\": \"diophantine\", \"seed\": 0 /* inline */}");
  EXPECT_EQ(c.task, "diophantine");
}

TEST(Config, ShippedExamplesParse) {
  const fs::path dir = fs::path(MDLAB_SOURCE_DIR) / "configs";
  int seen = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() != ".json") continue;
    std::ifstream in(e.path());
    std::stringstream ss;
    ss << in.rdbuf();
    EXPECT_NO_THROW(parse_config_text(ss.str())) << e.path();
    ++seen;
  }
  EXPECT_GE(seen, 8);
}

TEST(Config, SchemaIsJson) {
  const auto j = nlohmann::json::parse(config_schema());
  EXPECT_TRUE(j.contains("properties"));
  EXPECT_TRUE(j["properties"].contains("task"));
}

TEST(Runner, Sigma2IidNearOne) {
  const auto a = execute(parse_config_text(kSigma2Iid));
  EXPECT_EQ(a.exit_code, kExitOk);
  const std::string* csv = a.file("sigma2.csv");
  ASSERT_NE(csv, nullptr);
  EXPECT_NEAR(csv_value(*csv, "covariance_series", 1), 1.0, 0.05);
}

TEST(Runner, ManifestIsDeterministic) {
  const auto c = parse_config_text(kSigma2Iid);
  const auto a = execute(c), b = execute(c);
  ASSERT_EQ(a.files.size(), b.files.size());
  for (std::size_t i = 0; i < a.files.size(); ++i) EXPECT_EQ(a.files[i], b.files[i]) << a.files[i].first;
  const auto m = manifest_json(c, a);
  EXPECT_EQ(m, manifest_json(c, b));
  EXPECT_EQ(m.find("finished_at"), std::string::npos);
  const auto j = nlohmann::json::parse(m);
  EXPECT_EQ(j["seed"], 4);
  EXPECT_EQ(j["exit_code"], 0);
}

TEST(Runner, MalformedConfigWritesNothing) {
  const fs::path dir = scratch("malformed");
  const fs::path cfg = write_text(dir / "bad.json", R"({"task": "simulate", "seed": 1, "params": {"n": 0}})");
  std::ostringstream out, err;
  const fs::path target = dir / "out";
  EXPECT_EQ(run_config_file(cfg, target, out, err), kExitConfig);
  EXPECT_FALSE(fs::exists(target));
  EXPECT_FALSE(err.str().empty());
  EXPECT_EQ(run_config_file(dir / "missing.json", target, out, err), kExitConfig);
  fs::remove_all(dir);
}

TEST(Runner, WritesOutputsAndTiming) {
  const fs::path dir = scratch("sigma2");
  const fs::path cfg = write_text(dir / "c.json", kSigma2Iid);
  std::ostringstream out, err;
  ASSERT_EQ(run_config_file(cfg, dir / "out", out, err), kExitOk) << err.str();
  EXPECT_TRUE(fs::exists(dir / "out" / "sigma2.csv"));
  EXPECT_TRUE(fs::exists(dir / "out" / "manifest.json"));
  EXPECT_TRUE(fs::exists(dir / "out" / "timing.json"));
  fs::remove_all(dir);
}

TEST(Runner, MdpScanHasGapColumn) {
  const auto a = execute(parse_config_text(R"({"task": "mdp-scan", "seed": 1,
    "model": {"type": "iid", "law": {"kind": "rademacher"}},
    "params": {"ns": [100, 10000], "xs": [1.0], "method": "exact_binomial"}})"));
  const std::string* csv = a.file("mdp_scan.csv");
  ASSERT_NE(csv, nullptr);
  EXPECT_NE(csv->substr(0, csv->find('\n')).find(",gap"), std::string::npos);
}

TEST(Runner, CapacityBecomesRefusal) {
  const auto a = execute(parse_config_text(R"({"task": "mdp-scan", "seed": 1,
    "model": {"type": "iid", "law": {"kind": "rademacher"}},
    "params": {"ns": [1000000], "xs": [2.0], "method": "naive", "replicas": 100}})"));
  EXPECT_EQ(a.exit_code, kExitRefused);
  EXPECT_TRUE(a.files.empty());
  ASSERT_EQ(a.refusals.size(), 1u);
}

TEST(Runner, TaskFailureExitsOne) {
  // A modulus far below that of f cannot bound the decay.
  const auto a = execute(parse_config_text(R"({"task": "transfer-decay", "seed": 0,
    "model": {"type": "expanding_map", "map": "doubling", "observable": "cos"},
    "params": {"n_max": 10, "modulus": {"kind": "lipschitz", "constant": 0.01}}})"));
  EXPECT_EQ(a.exit_code, kExitTaskFailure);
}

TEST(Suite, UnknownNameIsConfigError) {
  std::ostringstream out, err;
  EXPECT_EQ(run_suite("nonsense", scratch("suite"), out, err), kExitConfig);
}
