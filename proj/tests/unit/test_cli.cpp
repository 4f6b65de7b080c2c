#include <gtest/gtest.h>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include "aqs/core/files.hpp"
#include "support/process.hpp"
#include "support/temp_dir.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using aqs::test_support::ChildProcess;
using aqs::test_support::RunResult;
using aqs::test_support::TempDir;

RunResult cli(std::vector<std::string> args) { return aqs::test_support::run_process(AQS_CLI_PATH, std::move(args)); }

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

std::size_t line_count(const fs::path& p) {
  const auto text = aqs::files::read_text(p);
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

// One fixture with a dataset, trained linear model and composites, shared by
// the tests that only read them.
class CliPipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir("aqs-cli");
    const auto d = dir_->path();
    ASSERT_EQ(cli({"make-fixture", "--out", (d / "fx").string()}).code, 0);
    ASSERT_EQ(cli({"build-dataset", "--city", "fixture_city", "--year", "2019", "--pollutant", "no2", "--stations",
                   (d / "fx/stations.csv").string(), "--rasters", (d / "fx/rasters").string(), "--out",
                   (d / "table.csv").string()})
                  .code,
              0);
    ASSERT_EQ(cli({"train", "--dataset", (d / "table.csv").string(), "--model", "linear", "--out",
                   (d / "linear").string()})
                  .code,
              0);
    ASSERT_EQ(cli({"composite", "--rasters", (d / "fx/rasters").string(), "--year", "2019", "--area",
                   (d / "fx/area.json").string(), "--out", (d / "composites").string()})
                  .code,
              0);
  }
  static void TearDownTestSuite() { delete dir_; }
  static fs::path at(const std::string& rel) { return dir_->path() / rel; }

  static inline TempDir* dir_ = nullptr;
};

TEST(Cli, HelpExitsZeroForEveryCommand) {
  const auto top = cli({"--help"});
  EXPECT_EQ(top.code, 0);
  for (const char* cmd :
       {"build-dataset", "train", "predict-grid", "composite", "kde-smooth", "make-fixture", "serve"}) {
    const auto r = cli({cmd, "--help"});
    EXPECT_EQ(r.code, 0) << cmd;
    EXPECT_TRUE(contains(r.out, "--json")) << cmd;
    EXPECT_TRUE(contains(top.out, cmd)) << cmd;
  }
}

TEST(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(cli({}).code, 1);
  EXPECT_EQ(cli({"frobnicate"}).code, 1);
  EXPECT_EQ(cli({"train", "--model", "linear"}).code, 1);  // --dataset missing
  EXPECT_EQ(cli({"make-fixture", "--out", "x", "--seed", "abc"}).code, 1);
  const auto r = cli({"serve", "--config", "/nonexistent/service.json"});
  EXPECT_EQ(r.code, 1);
  EXPECT_TRUE(contains(r.err, "/nonexistent/service.json")) << r.err;
}

TEST(Cli, MakeFixtureIsByteIdenticalForSeed) {
  TempDir dir;
  const auto a = cli({"make-fixture", "--out", (dir / "a").string(), "--seed", "11", "--stations", "5", "--json"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(json::parse(a.out)["stations"], 5);
  ASSERT_EQ(cli({"make-fixture", "--out", (dir / "b").string(), "--seed", "11", "--stations", "5"}).code, 0);
  ASSERT_EQ(cli({"make-fixture", "--out", (dir / "c").string(), "--seed", "12", "--stations", "5"}).code, 0);
  std::size_t files = 0;
  bool any_differs = false;
  for (const auto& e : fs::recursive_directory_iterator(dir / "a")) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), dir / "a");
    EXPECT_EQ(aqs::files::read_text(e.path()), aqs::files::read_text(dir / "b" / rel)) << rel;
    if (aqs::files::read_text(e.path()) != aqs::files::read_text(dir / "c" / rel)) any_differs = true;
    ++files;
  }
  EXPECT_GE(files, 89u);
  EXPECT_TRUE(any_differs);
}

TEST(Cli, BuildDatasetWithThreeStationsWritesThirtySixRows) {
  TempDir dir;
  ASSERT_EQ(cli({"make-fixture", "--out", (dir / "fx").string(), "--stations", "3"}).code, 0);
  const auto r = cli({"build-dataset", "--city", "fixture_city", "--year", "2019", "--pollutant", "no2", "--stations",
                      (dir / "fx/stations.csv").string(), "--rasters", (dir / "fx/rasters").string(), "--out",
                      (dir / "t.csv").string(), "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(line_count(dir / "t.csv"), 37u);
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["rows_written"], 36);
  EXPECT_EQ(j["rows_removed"], 0);
}

TEST(Cli, DataErrorsExitTwoAndNameThePath) {
  TempDir dir;
  ASSERT_EQ(cli({"make-fixture", "--out", (dir / "fx").string(), "--stations", "3"}).code, 0);
  const auto missing = (dir / "no_such_rasters").string();
  const auto r = cli({"build-dataset", "--city", "fixture_city", "--year", "2019", "--pollutant", "no2", "--stations",
                      (dir / "fx/stations.csv").string(), "--rasters", missing, "--ground-truth",
                      (dir / "fx/ground_truth.csv").string(), "--area", (dir / "fx/area.json").string(), "--out",
                      (dir / "t.csv").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_TRUE(contains(r.err, missing)) << r.err;
  EXPECT_FALSE(fs::exists(dir / "t.csv"));

  const auto j = cli({"train", "--dataset", (dir / "absent.csv").string(), "--model", "linear", "--json"});
  EXPECT_EQ(j.code, 2);
  EXPECT_EQ(json::parse(j.out)["exit_code"], 2);
}

TEST(Cli, InternalErrorsExitThree) {
  TempDir dir;
  ASSERT_EQ(cli({"make-fixture", "--out", (dir / "fx").string(), "--stations", "3"}).code, 0);
  aqs::files::write_atomic(dir / "blocker", "not a directory");
  aqs::files::write_atomic(dir / "svc.json",
                           json{{"catalog", "fx/catalog.json"}, {"store_dir", "blocker/store"}, {"port", 0}}.dump());
  const auto r = cli({"serve", "--config", (dir / "svc.json").string()});
  EXPECT_EQ(r.code, 3) << r.err;
}

TEST_F(CliPipeline, TrainLinearMeetsFitAndIsReproducible) {
  const auto r =
      cli({"train", "--dataset", at("table.csv").string(), "--model", "linear", "--out", at("first").string(), "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_GE(j["r2"].get<double>(), 0.9);
  EXPECT_EQ(j["n_train"], 336);
  EXPECT_EQ(j["n_test"], 144);

  ASSERT_EQ(cli({"train", "--dataset", at("table.csv").string(), "--model", "linear", "--out", at("again").string()})
                .code,
            0);
  EXPECT_EQ(aqs::files::read_text(at("again/metrics.json")), aqs::files::read_text(at("linear/metrics.json")));
  EXPECT_EQ(aqs::files::read_text(at("again/model.json")), aqs::files::read_text(at("linear/model.json")));
}

TEST_F(CliPipeline, UnknownModelListsTheFourKinds) {
  const auto r = cli({"train", "--dataset", at("table.csv").string(), "--model", "knn"});
  EXPECT_EQ(r.code, 1);
  for (const char* kind : {"linear", "random_forest", "svr", "gradient_boosting"})
    EXPECT_TRUE(contains(r.err, kind)) << r.err;
}

TEST_F(CliPipeline, GridFileDrivesSearch) {
  aqs::files::write_atomic(at("svr_grid.json"), R"({"C": [1, 10], "epsilon": [0.5]})");
  const auto r = cli({"train", "--dataset", at("table.csv").string(), "--model", "svr", "--grid",
                      at("svr_grid.json").string(), "--out", at("svr").string(), "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::is_regular_file(at("svr/grid_search.json")));
  EXPECT_TRUE(json::parse(r.out)["hyperparameters"].contains("C"));

  aqs::files::write_atomic(at("bad_grid.json"), R"({"depth": [1]})");
  EXPECT_EQ(cli({"train", "--dataset", at("table.csv").string(), "--model", "svr", "--grid",
                 at("bad_grid.json").string(), "--out", at("bad").string()})
                .code,
            1);
  EXPECT_EQ(cli({"train", "--dataset", at("table.csv").string(), "--model", "svr", "--grid",
                 at("absent_grid.json").string(), "--out", at("bad").string()})
                .code,
            2);
}

TEST_F(CliPipeline, PredictGridWritesHundredRecords) {
  const auto gj = cli({"predict-grid", "--model", at("linear/model.json").string(), "--area",
                       at("fx/area.json").string(), "--composites", at("composites").string(), "--out",
                       at("s.geojson").string(), "--json"});
  ASSERT_EQ(gj.code, 0) << gj.err;
  EXPECT_EQ(json::parse(gj.out)["points"], 100);
  const auto g = json::parse(aqs::files::read_text(at("s.geojson")));
  EXPECT_EQ(g["type"], "FeatureCollection");
  EXPECT_EQ(g["features"].size(), 100u);

  ASSERT_EQ(cli({"predict-grid", "--model", at("linear/model.json").string(), "--area", at("fx/area.json").string(),
                 "--composites", at("composites").string(), "--out", at("s.csv").string(), "--format", "csv"})
                .code,
            0);
  EXPECT_EQ(line_count(at("s.csv")), 101u);

  const auto k = cli({"kde-smooth", "--surface", at("s.csv").string(), "--bandwidth", "5000", "--out",
                      at("smooth.asc").string(), "--json"});
  EXPECT_EQ(k.code, 0) << k.err;
  EXPECT_TRUE(fs::is_regular_file(at("smooth.asc")));
}

TEST_F(CliPipeline, PredictGridNamesMissingFactor) {
  TempDir partial;
  for (const auto& e : fs::directory_iterator(at("composites")))
    if (e.path().stem() != "elevation") fs::copy_file(e.path(), partial / e.path().filename().string());
  const auto r = cli({"predict-grid", "--model", at("linear/model.json").string(), "--area",
                      at("fx/area.json").string(), "--composites", partial.path().string(), "--out",
                      at("p.geojson").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_TRUE(contains(r.err, "elevation")) << r.err;
}

TEST_F(CliPipeline, ServeAnswersHealthAndCatalog) {
  aqs::files::write_atomic(at("svc.json"),
                           json{{"catalog", "fx/catalog.json"}, {"store_dir", "svc_store"}, {"port", 0}}.dump());
  ChildProcess server(AQS_CLI_PATH, {"serve", "--config", at("svc.json").string(), "--json"});
  const auto banner = server.read_until([](const std::string& s) { return json::accept(s); });
  ASSERT_TRUE(json::accept(banner)) << banner;
  const int port = json::parse(banner)["port"];
  ASSERT_GT(port, 0);

  httplib::Client c("127.0.0.1", port);
  const auto health = c.Get("/api/health");
  ASSERT_TRUE(health);
  EXPECT_EQ(json::parse(health->body)["ok"], true);
  const auto cat = c.Get("/api/catalog");
  ASSERT_TRUE(cat);
  EXPECT_EQ(json::parse(cat->body)["cities"][0]["id"], "fixture_city");
  EXPECT_EQ(server.terminate(), 0);
}

}  // namespace
