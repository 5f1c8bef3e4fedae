#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <catch2/catch_amalgamated.hpp>

#include "ctbn/ctbn.hpp"
#include "support/fixtures.hpp"

// End-to-end checks of the command-line tool: each test runs the real binary
// and inspects exit status and output.

namespace {

namespace fs = std::filesystem;

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr combined
};

RunResult run_cli(const std::string& args) {
  const std::string cmd = std::string(CTBN_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult result;
  std::array<char, 4096> buf;
  size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) {
    result.output.append(buf.data(), n);
  }
  const int status = ::pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::string model_arg(const char* name) {
  return std::string("--models-dir ") + ctbn_test::models_dir() + " --model " + name;
}

int count_lines(const std::string& s) {
  int lines = 0;
  for (char ch : s) lines += ch == '\n';
  return lines;
}

fs::path temp_path(const char* stem) {
  return fs::temp_directory_path() /
         (std::string(stem) + "_" + std::to_string(::getpid()));
}

}  // namespace

TEST_CASE("validate accepts every shipped model", "[cli]") {
  for (const char* name : {"ex31", "ex41", "ex42", "ex43", "ex44", "ex51", "ex52"}) {
    RunResult r = run_cli("validate " + model_arg(name));
    CAPTURE(name, r.output);
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.output == "ok\n");
  }
}

TEST_CASE("validate rejects broken files with exit code 2", "[cli]") {
  fs::path bad = temp_path("ctbn_cli_bad");
  {
    std::ofstream os(bad);
    os << "{ not json";
  }
  RunResult r = run_cli("validate --model " + bad.string());
  REQUIRE(r.exit_code == 2);
  REQUIRE(r.output.find("error") != std::string::npos);
  fs::remove(bad);

  // A structurally invalid model also maps to 2, with the violation printed.
  fs::path invalid = temp_path("ctbn_cli_invalid");
  {
    std::ofstream os(invalid);
    os << R"({"components": [{"id": 1, "cardinality": 2, "parents": [], "scale": "slow",
         "rate_table": {"": [[-1.0, 2.0], [2.0, -2.0]]}}], "epsilon": 1.0})";
  }
  r = run_cli("validate --model " + invalid.string());
  REQUIRE(r.exit_code == 2);
  REQUIRE(r.output.find("invalid model") != std::string::npos);
  fs::remove(invalid);

  RunResult missing = run_cli("validate --model no_such_model_anywhere");
  REQUIRE(missing.exit_code == 2);
}

TEST_CASE("amalgamate prints the joint generator as csv", "[cli]") {
  RunResult r = run_cli("amalgamate " + model_arg("ex51") + " --epsilon 1");
  REQUIRE(r.exit_code == 0);
  REQUIRE(count_lines(r.output) == 8);

  // Spot-check one row against the library.
  ctbn::Matrix q = ctbn::amalgamate(ctbn_test::fixture_ex51(), 1.0);
  std::istringstream is(r.output);
  std::string first_line;
  std::getline(is, first_line);
  std::istringstream row(first_line);
  std::string field;
  std::getline(row, field, ',');
  REQUIRE(std::stod(field) == q(0, 0));
}

TEST_CASE("solve and stationary print distributions that sum to one", "[cli]") {
  for (const std::string sub : {std::string("solve --t 0.5"), std::string("stationary")}) {
    RunResult r = run_cli(sub + " " + model_arg("ex51"));
    CAPTURE(sub, r.output);
    REQUIRE(r.exit_code == 0);
    std::istringstream is(r.output);
    std::string line;
    REQUIRE(std::getline(is, line));
    REQUIRE(line == "x_1,x_2,x_3,probability");
    double total = 0.0;
    int rows = 0;
    while (std::getline(is, line)) {
      total += std::stod(line.substr(line.rfind(',') + 1));
      ++rows;
    }
    REQUIRE(rows == 8);
    REQUIRE(total == Catch::Approx(1.0).margin(1e-9));
  }
}

TEST_CASE("stationary reports non-ergodic models as runtime failures", "[cli]") {
  // Valid model whose single component has an absorbing state: validation
  // passes, the stationary computation must fail with exit code 1.
  fs::path path = temp_path("ctbn_cli_absorbing");
  {
    std::ofstream os(path);
    os << R"({"components": [{"id": 1, "cardinality": 2, "parents": [], "scale": "slow",
         "rate_table": {"": [[0.0, 0.0], [1.0, -1.0]]}}], "epsilon": 1.0})";
  }
  RunResult r = run_cli("stationary --model " + path.string());
  REQUIRE(r.exit_code == 1);
  REQUIRE(r.output.find("error") != std::string::npos);
  fs::remove(path);
}

TEST_CASE("simulate writes one csv row per visited state", "[cli]") {
  RunResult r = run_cli("simulate " + model_arg("ex51") +
                        " --seed 5 --max-transitions 40");
  REQUIRE(r.exit_code == 0);
  std::istringstream is(r.output);
  std::string header;
  REQUIRE(std::getline(is, header));
  REQUIRE(header == "entry_time,x_1,x_2,x_3");
  REQUIRE(count_lines(r.output) == 42);  // header + initial state + 40 jumps

  // The same seed reproduces the same path.
  RunResult again = run_cli("simulate " + model_arg("ex51") +
                            " --seed 5 --max-transitions 40");
  REQUIRE(again.output == r.output);

  // A stop rule is mandatory.
  RunResult r2 = run_cli("simulate " + model_arg("ex51") + " --seed 5");
  REQUIRE(r2.exit_code == 1);
}

TEST_CASE("estimate prints rate estimates for the chosen component", "[cli]") {
  RunResult r = run_cli("estimate " + model_arg("ex51") +
                        " --target 3 --conditioner 1 --slow-only" +
                        " --seed 1 --seed 2 --max-time 400");
  REQUIRE(r.exit_code == 0);
  std::istringstream is(r.output);
  std::string header;
  REQUIRE(std::getline(is, header));
  REQUIRE(header == "assignment,from,to,rate,stderr,count,residence");
  REQUIRE(count_lines(r.output) == 5);  // two assignments x two off-diagonals
}

TEST_CASE("reduce writes a loadable slow model", "[cli]") {
  fs::path out = temp_path("ctbn_cli_reduced");
  RunResult r = run_cli("reduce " + model_arg("ex51") + " --out " + out.string());
  REQUIRE(r.exit_code == 0);
  REQUIRE(r.output == out.string() + "\n");

  ctbn::CtbnModel reduced = ctbn::load_model(out.string());
  REQUIRE(ctbn::validate(reduced).empty());
  REQUIRE(reduced.component_count() == 2);
  REQUIRE(reduced.fast_ids().empty());
  const ctbn::Matrix& q = reduced.table(2, std::vector<int>{0});
  REQUIRE(q(0, 1) == Catch::Approx(3.8).epsilon(1e-12));
  REQUIRE(q(1, 0) == Catch::Approx(4.8).epsilon(1e-12));
  fs::remove(out);

  // Without --out the reduced model lands on stdout as JSON.
  RunResult dump = run_cli("reduce " + model_arg("ex51"));
  REQUIRE(dump.exit_code == 0);
  REQUIRE(dump.output.find("\"components\"") != std::string::npos);
}

TEST_CASE("closure queries print comma-joined component ids", "[cli]") {
  RunResult r = run_cli("closure " + model_arg("ex44") + " --fast-up 4");
  REQUIRE(r.exit_code == 0);
  REQUIRE(r.output == "3,4\n");

  r = run_cli("closure " + model_arg("ex44") + " --up 4");
  REQUIRE(r.output == "1,2,3,4\n");

  r = run_cli("closure " + model_arg("ex44") + " --slow-ancestors 3 4");
  REQUIRE(r.output == "1,2\n");

  // Requesting no query at all is a usage error.
  r = run_cli("closure " + model_arg("ex44"));
  REQUIRE(r.exit_code == 2);
}

TEST_CASE("experiment runs end to end and lists its outputs", "[cli]") {
  fs::path out = temp_path("ctbn_cli_exp");
  fs::remove_all(out);
  RunResult r = run_cli("experiment convergence --models-dir " +
                        ctbn_test::models_dir() + " --out " + out.string() +
                        " --epsilon 0.1 --epsilon 0.01");
  CAPTURE(r.output);
  REQUIRE(r.exit_code == 0);
  REQUIRE(r.output.find("convergence_errors.csv") != std::string::npos);
  REQUIRE(fs::exists(out / "convergence_errors.csv"));
  REQUIRE(fs::exists(out / "convergence_summary.json"));
  fs::remove_all(out);

  RunResult bad = run_cli("experiment nonsense");
  REQUIRE(bad.exit_code == 1);
}

TEST_CASE("usage errors come back from the parser", "[cli]") {
  RunResult r = run_cli("amalgamate");  // --model is required
  REQUIRE(r.exit_code != 0);
  RunResult unknown = run_cli("frobnicate --model ex51");
  REQUIRE(unknown.exit_code != 0);
}
