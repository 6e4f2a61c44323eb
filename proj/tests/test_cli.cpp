#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <sstream>

#include "cli.hpp"
#include "config.hpp"
#include "io.hpp"
#include "json.hpp"
#include "support.hpp"
#include "wbary/experiments.hpp"

namespace fs = std::filesystem;
using namespace wbary;
using wbary::cli::run;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("wbary_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  std::string write(const std::string& name, const std::string& text) const {
    cli::write_text(path(name), text);
    return path(name);
  }
  std::string write_measure(const std::string& name, const Measure& m) const {
    return write(name, cli::measure_json(m));
  }

  fs::path dir_;
};

nlohmann::json parse(const std::string& text) { return nlohmann::json::parse(text); }

}  // namespace

TEST_F(CliTest, W2OfMeasureWithItselfIsZero) {
  const auto a = write_measure("a.json", DiscreteMeasure(1, {0.1, 0.5, 0.9}, {0.2, 0.3, 0.5}));
  const auto r = call({"w2", "--mu", a, "--nu", a});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(parse(r.out)["cost"].get<double>(), 0.0);
}

TEST_F(CliTest, W2ExactReportsCertificate) {
  const auto a = write_measure("a.json", DiscreteMeasure(2, {0, 0, 1, 1}, {0.5, 0.5}));
  const auto b = write_measure("b.json", DiscreteMeasure(2, {1, 0, 0, 1}, {0.5, 0.5}));
  const auto out = path("w2.json");
  const auto r = call({"w2", "--mu", a, "--nu", b, "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = parse(cli::read_text(out));
  EXPECT_NEAR(doc["cost"].get<double>(), 1.0, 1e-14);
  EXPECT_EQ(doc["method"], "network_simplex");
  EXPECT_TRUE(doc["certificate"]["ok"].get<bool>());
  EXPECT_TRUE(fs::exists(cli::manifest_path(out)));
}

TEST_F(CliTest, MissingFileNamesThePath) {
  const auto missing = path("nope.json");
  const auto r = call({"w2", "--mu", missing, "--nu", missing});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.err.rfind("error: kind=", 0), 0u) << r.err;
  EXPECT_NE(r.err.find(missing), std::string::npos);
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
}

TEST_F(CliTest, MalformedJsonIsAParseError) {
  const auto bad = write("bad.json", "{\"type\": \"discrete\", ");
  const auto r = call({"validate", "--measure", bad});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("kind=parse"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("file=" + bad), std::string::npos);
}

TEST_F(CliTest, SchemaErrorsCarryTheFieldPath) {
  const auto bad = write("bad.json",
                         R"({"type": "discrete", "dim": 1, "points": [0.1, "x"], "weights": [0.5, 0.5]})");
  const auto r = call({"validate", "--measure", bad});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("kind=schema"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("field=points[1]"), std::string::npos) << r.err;
}

TEST_F(CliTest, UnknownFlagIsAUsageError) {
  const auto r = call({"w2", "--bogus", "1"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("kind=usage"), std::string::npos);
}

TEST_F(CliTest, ValidateReportsViolations) {
  const auto good = write_measure("good.json", DiscreteMeasure::dirac({0.5}));
  auto r = call({"validate", "--measure", good});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "ok\n");
  const auto bad = write_measure("bad.json", DiscreteMeasure(1, {0.2, 0.4}, {0.5, 0.6}));
  r = call({"validate", "--measure", bad});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("weights sum to 1.1"), std::string::npos) << r.err;
  const auto outside = write_measure("out.json", DiscreteMeasure::dirac({2.0}));
  r = call({"validate", "--measure", outside, "--domain-min", "0", "--domain-max", "1"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("support outside"), std::string::npos) << r.err;
}

TEST_F(CliTest, BarycenterWritesSolutionTraceAndManifest) {
  fs::create_directories(dir_ / "nus");
  std::mt19937_64 rng(1);
  for (int i = 0; i < 3; ++i) {
    write_measure("nus/m" + std::to_string(i) + ".json",
                  wbary::testing::random_discrete(rng, 1, 20));
  }
  const auto out = path("bary.json");
  const auto r = call({"barycenter", "--measures", path("nus"), "--grid", "32", "--gamma", "0.1",
                       "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = parse(cli::read_text(out));
  EXPECT_TRUE(doc["converged"].get<bool>());
  const auto m = cli::parse_measure(cli::read_text(out), out);
  ASSERT_TRUE(std::holds_alternative<GridDensity>(m));
  EXPECT_NEAR(std::get<GridDensity>(m).mass(), 1.0, 1e-12);
  EXPECT_TRUE(fs::exists(path("bary.trace.csv")));
  const auto manifest =
      cli::parse_manifest(cli::read_text(cli::manifest_path(out)), "manifest");
  EXPECT_EQ(manifest.argv.front(), "barycenter");
  EXPECT_EQ(manifest.outputs.size(), 2u);
}

TEST_F(CliTest, IterationCapExitsTwoWithPartialSolution) {
  fs::create_directories(dir_ / "nus");
  std::mt19937_64 rng(2);
  for (int i = 0; i < 4; ++i) {
    write_measure("nus/m" + std::to_string(i) + ".json",
                  wbary::testing::random_discrete(rng, 1, 40));
  }
  const auto out = path("bary.json");
  const auto r = call({"barycenter", "--measures", path("nus"), "--iters", "1", "--gamma", "0.01",
                       "--out", out});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("kind=numerical"), std::string::npos) << r.err;
  ASSERT_TRUE(fs::exists(out));
  EXPECT_FALSE(parse(cli::read_text(out))["converged"].get<bool>());
}

TEST_F(CliTest, BarycenterConfigErrorsNameTheKey) {
  fs::create_directories(dir_ / "nus");
  write_measure("nus/a.json", DiscreteMeasure::dirac({0.5}));
  const auto cfg = write("cfg.json", R"({"solver.tol": -1})");
  const auto r = call({"barycenter", "--measures", path("nus"), "--config", cfg, "--out",
                       path("x.json")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("field=solver.tol"), std::string::npos) << r.err;
  const auto nested = write("nested.json", R"({"solver": {"tol": 1e-6}})");
  const auto r2 = call({"barycenter", "--measures", path("nus"), "--config", nested, "--out",
                        path("x.json")});
  EXPECT_EQ(r2.code, 1);
  EXPECT_NE(r2.err.find("field=solver"), std::string::npos) << r2.err;
}

TEST_F(CliTest, BregmanMatchesLibrary) {
  std::mt19937_64 rng(3);
  const auto f = wbary::testing::random_density(rng, BoxDomain::unit(1), {16});
  const auto g = wbary::testing::random_density(rng, BoxDomain::unit(1), {16});
  const auto r = call({"bregman", "--f", write_measure("f.json", f), "--g",
                       write_measure("g.json", g), "--penalty", "quadratic"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = parse(r.out);
  EXPECT_DOUBLE_EQ(doc["d_E"].get<double>(), bregman_sym(Penalty::quadratic(), f, g));
  EXPECT_DOUBLE_EQ(doc["D_E_fg"].get<double>(), bregman_nonsym(Penalty::quadratic(), f, g));
}

TEST_F(CliTest, SampleIsSeeded) {
  const auto nu = write_measure("nu.json", RandomMeasureModel::gaussian(32).base);
  ASSERT_EQ(call({"sample", "--nu", nu, "--p", "25", "--seed", "4", "--out", path("a.json")}).code,
            0);
  ASSERT_EQ(call({"sample", "--nu", nu, "--p", "25", "--seed", "4", "--out", path("b.json")}).code,
            0);
  EXPECT_EQ(cli::read_text(path("a.json")), cli::read_text(path("b.json")));
  const auto m = cli::read_measure(path("a.json"));
  EXPECT_EQ(std::get<DiscreteMeasure>(m).size(), 25u);
}

TEST_F(CliTest, MeasureJsonRoundTripsExactly) {
  std::mt19937_64 rng(5);
  const auto d = wbary::testing::random_discrete(rng, 2, 9);
  const auto back = std::get<DiscreteMeasure>(cli::parse_measure(cli::measure_json(d), "-"));
  EXPECT_EQ(back.points(), d.points());
  EXPECT_EQ(back.weights(), d.weights());
}

TEST_F(CliTest, ExperimentReplayIsBitIdentical) {
  const auto cfg = write("exp.json", R"({"n_list": [2, 4], "replicates": 2, "reference_size": 8,
                                         "model.cells": 32, "seed": 11})");
  const auto out = path("report.csv");
  const auto r = call({"--threads", "1", "experiment", "rate-variance", "--config", cfg, "--out",
                       out});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("slope mean_d_E_sq"), std::string::npos);
  const auto csv = cli::read_text(out);
  EXPECT_EQ(csv.rfind("experiment,n,p,gamma,replicate,metric,value\n", 0), 0u);

  const auto replay = path("replay.csv");
  const auto rr = call({"replay", "--manifest", cli::manifest_path(out).string(), "--out", replay});
  ASSERT_EQ(rr.code, 0) << rr.err;
  EXPECT_EQ(cli::read_text(replay), csv);

  const auto manifest = cli::parse_manifest(cli::read_text(cli::manifest_path(out)), "m");
  EXPECT_EQ(manifest.seed, 11u);
  EXPECT_EQ(manifest.config_hash, "fnv1a64:" + cli::Config::load(cfg).hash());
}

TEST_F(CliTest, UnknownExperimentIsAUsageError) {
  const auto r = call({"experiment", "nonsense", "--out", path("x.csv")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("kind=usage"), std::string::npos);
}

TEST(Config, AccessorsValidateTypes) {
  const auto c = cli::Config::parse(R"({"a": 1.5, "b": [1, 2], "c": "x", "d": -1})", "cfg");
  EXPECT_EQ(c.number("a", 0.0), 1.5);
  EXPECT_EQ(c.counts("b", {}), (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(c.text("c", ""), "x");
  EXPECT_EQ(c.number("missing", 7.0), 7.0);
  EXPECT_THROW(c.count("d", 1), cli::CliError);
  EXPECT_THROW(c.text("a", ""), cli::CliError);
  EXPECT_THROW(cli::Config::parse("[1]", "cfg"), cli::CliError);
}

TEST(Io, FormatDoubleRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300}) {
    EXPECT_EQ(std::stod(cli::format_double(v)), v);
  }
}
