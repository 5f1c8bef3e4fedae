#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <catch2/catch_amalgamated.hpp>

#include "ctbn/ctbn.hpp"
#include "support/fixtures.hpp"

using namespace ctbn;
using namespace ctbn_test;

namespace {

namespace fs = std::filesystem;

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  REQUIRE(is.good());
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const char* stem)
      : path(fs::temp_directory_path() /
             (std::string(stem) + "_" + std::to_string(::getpid()))) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
};

ExperimentConfig small_config(const char* name, const std::string& out_dir) {
  ExperimentConfig config;
  config.name = name;
  config.models_dir = models_dir();
  config.out_dir = out_dir;
  return config;
}

}  // namespace

TEST_CASE("experiment outputs are byte-identical across reruns", "[experiments]") {
  TempDir first("ctbn_exp_a"), second("ctbn_exp_b");
  ExperimentConfig config = small_config("ex51", first.str());
  config.epsilons = {0.2};
  config.seeds = {1};
  config.stop = StopRule::at_time(200.0);

  ExperimentReport a = run_experiment(config);
  config.out_dir = second.str();
  ExperimentReport b = run_experiment(config);

  REQUIRE(a.files.size() == b.files.size());
  for (size_t k = 0; k < a.files.size(); ++k) {
    CAPTURE(a.files[k]);
    REQUIRE(fs::path(a.files[k]).filename() == fs::path(b.files[k]).filename());
    REQUIRE(slurp(a.files[k]) == slurp(b.files[k]));
  }
}

TEST_CASE("the effective-rate experiment reports analytic and estimated rates",
          "[experiments]") {
  TempDir dir("ctbn_exp_ex51");
  ExperimentConfig config = small_config("ex51", dir.str());
  config.epsilons = {0.1};
  config.seeds = {1, 2};
  config.stop = StopRule::at_time(500.0);

  ExperimentReport report = run_experiment(config);
  REQUIRE(report.files.size() == 3);

  const std::string effective = slurp((dir.path / "ex51_effective.csv").string());
  REQUIRE(effective.find("3.8") != std::string::npos);
  REQUIRE(effective.find("5.2") != std::string::npos);

  const std::string rates = slurp((dir.path / "ex51_rates.csv").string());
  REQUIRE(rates.rfind("epsilon,seed,from,to,analytic,estimate,relative_error", 0) == 0);
  int lines = 0;
  for (char ch : rates) lines += ch == '\n';
  REQUIRE(lines == 1 + 2 * 12);  // header + per-seed off-diagonal entries

  REQUIRE(report.summary["runs"].size() == 2);
  for (const auto& run : report.summary["runs"]) {
    REQUIRE(run["max_relative_error"].get<double>() < 1.0);
  }
}

TEST_CASE("an empty epsilon list yields the analytic-only variant", "[experiments]") {
  TempDir dir("ctbn_exp_analytic");
  ExperimentConfig config = small_config("ex51", dir.str());
  config.epsilons = {};

  ExperimentReport report = run_experiment(config);
  REQUIRE(fs::exists(dir.path / "ex51_effective.csv"));
  const std::string rates = slurp((dir.path / "ex51_rates.csv").string());
  int lines = 0;
  for (char ch : rates) lines += ch == '\n';
  REQUIRE(lines == 1);  // just the header: no simulation rows
  REQUIRE(report.summary["runs"].empty());
}

TEST_CASE("the sweep table ends with the analytic limit row", "[experiments]") {
  TempDir dir("ctbn_exp_table");
  ExperimentConfig config = small_config("ex52_table1", dir.str());
  config.epsilons = {0.5, 0.1};
  config.seeds = {1};
  config.stop = StopRule::at_transitions(40000);

  ExperimentReport report = run_experiment(config);
  const std::string table = slurp((dir.path / "ex52_table1.csv").string());
  REQUIRE(table.rfind("epsilon,q51_01_cond0,q51_01_cond1", 0) == 0);
  REQUIRE(table.find("\nlimit,1.8,2.2\n") != std::string::npos);

  // One cells row per (epsilon, x1, x2, x6) combination.
  const std::string cells = slurp((dir.path / "ex52_cells.csv").string());
  int lines = 0;
  for (char ch : cells) lines += ch == '\n';
  REQUIRE(lines == 1 + 2 * 8);

  REQUIRE(report.summary["limit"][0].get<double>() == Catch::Approx(1.8));
  REQUIRE(report.summary["limit"][1].get<double>() == Catch::Approx(2.2));
  REQUIRE(report.summary["sweep"].size() == 2);
}

TEST_CASE("the convergence experiment shows shrinking errors", "[experiments]") {
  TempDir dir("ctbn_exp_conv");
  ExperimentConfig config = small_config("convergence", dir.str());
  config.epsilons = {0.1, 0.01};
  config.times = {0.5, 1.0, 2.0};

  ExperimentReport report = run_experiment(config);
  REQUIRE(fs::exists(dir.path / "convergence_errors.csv"));

  const auto& rows = report.summary["rows"];
  REQUIRE(rows.size() == 6);
  // At each time the error at epsilon = 0.01 is well below the one at 0.1.
  for (int k = 0; k < 3; ++k) {
    const double coarse = rows[k]["l1_error"].get<double>();
    const double fine = rows[k + 3]["l1_error"].get<double>();
    CAPTURE(k, coarse, fine);
    REQUIRE(fine < coarse / 2.0);
  }
}

TEST_CASE("a slow-only model has no reduction error at all", "[experiments]") {
  // Write a purely slow model to disk and run the convergence comparison on
  // it: the effective generator coincides with the full one, so the gap is
  // numerical noise only.
  TempDir dir("ctbn_exp_slow");
  const std::string model_path = (dir.path / "slow_only.json").string();
  save_model(fixture_independent_pair(), model_path);

  ExperimentConfig config = small_config("convergence", dir.str());
  config.model_ref = model_path;
  config.epsilons = {0.5};
  config.times = {0.5};

  ExperimentReport report = run_experiment(config);
  REQUIRE(report.summary["rows"][0]["l1_error"].get<double>() < 1e-12);
}

TEST_CASE("unknown experiment names are rejected", "[experiments]") {
  ExperimentConfig config = small_config("nonsense", "/tmp");
  REQUIRE_THROWS_AS(run_experiment(config), std::invalid_argument);
}

TEST_CASE("the summary echoes the configuration", "[experiments]") {
  TempDir dir("ctbn_exp_echo");
  ExperimentConfig config = small_config("convergence", dir.str());
  config.epsilons = {0.25};
  config.times = {0.5};

  ExperimentReport report = run_experiment(config);
  const auto& echo = report.summary["config"];
  REQUIRE(echo["model"].get<std::string>() == "ex41");
  REQUIRE(echo["epsilons"].size() == 1);
  REQUIRE(echo["epsilons"][0].get<double>() == 0.25);
}
