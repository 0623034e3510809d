#include <catch2/catch_amalgamated.hpp>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

using nlohmann::json;

namespace {

const std::string kCli = TSHIFT_CLI_PATH;
const std::string kDir = TSHIFT_PROBLEM_DIR;

struct RunResult {
  int exit_code = -1;
  std::string out;
};

RunResult run_cli(const std::string& args) {
  static int counter = 0;
  const std::string path = "cli_capture_" + std::to_string(counter++) + ".tmp";
  const std::string cmd = "\"" + kCli + "\" " + args + " > " + path + " 2>/dev/null";
  const int rc = std::system(cmd.c_str());
  RunResult res;
  res.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  res.out = ss.str();
  std::remove(path.c_str());
  return res;
}

std::string write_temp_problem(const std::string& body) {
  static int counter = 0;
  const std::string path = "cli_problem_" + std::to_string(counter++) + ".toml";
  std::ofstream out(path);
  out << body;
  return path;
}

}  // namespace

TEST_CASE("cli check reproduces the worked example's condition numbers") {
  const auto res = run_cli("check --problem " + kDir + "/paper_example.toml");
  REQUIRE(res.exit_code == 0);
  const json doc = json::parse(res.out);
  CHECK(doc["r"].get<double>() == 1.0);
  CHECK(doc["norm_A"].get<double>() == 1.0);
  CHECK(doc["alpha"].get<double>() == 0.125);
  CHECK(doc["beta"].get<double>() == 0.0);
  CHECK(doc["contraction_constant"].get<double>() == 0.375);
  CHECK(doc["J_min"].get<double>() == Catch::Approx(0.4).margin(1e-15));
  CHECK(doc["contraction_ok"].get<bool>());
}

TEST_CASE("cli solve emits the solution with residuals and diagnostics") {
  const auto res =
      run_cli("solve --problem " + kDir + "/paper_example.toml --format json");
  REQUIRE(res.exit_code == 0);
  const json doc = json::parse(res.out);
  CHECK(doc["diagnostics"]["converged"].get<bool>());
  CHECK(doc["diagnostics"]["iterations"].get<int>() <= 60);
  CHECK(doc["residuals"]["integral"].get<double>() <= 1e-10);
  CHECK(doc["residuals"]["differential"].get<double>() <= 1e-10);
  CHECK(doc["residuals"]["periodicity"].get<double>() <= 1e-10);
  CHECK(doc["solution"].is_array());

  SECTION("csv format lists the window values") {
    const auto csv =
        run_cli("solve --problem " + kDir + "/paper_example.toml --format csv");
    REQUIRE(csv.exit_code == 0);
    CHECK(csv.out.rfind("\"t\",\"x1\",\"x2\"\n", 0) == 0);
  }
}

TEST_CASE("cli floquet reports the doubling monodromy") {
  const auto res = run_cli("floquet --problem " + kDir + "/paper_example.toml");
  REQUIRE(res.exit_code == 0);
  const json doc = json::parse(res.out);
  CHECK(doc["monodromy"][0][0].get<double>() == 2.0);
  CHECK(doc["monodromy"][0][1].get<double>() == 0.0);
  CHECK(doc["monodromy"][1][1].get<double>() == 2.0);
  CHECK_FALSE(doc["eigenvalue_one"].get<bool>());
}

TEST_CASE("cli theta table matches the hand computation") {
  const auto res = run_cli("theta --problem " + kDir +
                           "/qlattice_example.toml --format csv --horizon-periods 1");
  REQUIRE(res.exit_code == 0);
  CHECK(res.out ==
        "\"t\",\"m\",\"G\",\"theta\"\n"
        "1,0,0,0\n"
        "2,1,-2,2\n"
        "4,1,0,4\n");
}

TEST_CASE("cli axioms passes on the bundled scales") {
  for (const char* name : {"paper_example", "qlattice_example", "critical_example"}) {
    const auto res =
        run_cli("axioms --problem " + kDir + "/" + name + ".toml");
    REQUIRE(res.exit_code == 0);
    const json doc = json::parse(res.out);
    CHECK(doc["all_passed"].get<bool>());
    CHECK(doc["period"]["ok"].get<bool>());
  }
}

TEST_CASE("cli exit codes are stable") {
  SECTION("missing problem file is a parse failure") {
    CHECK(run_cli("check --problem no_such_file.toml").exit_code == 2);
  }

  SECTION("malformed file is a parse failure") {
    const auto path = write_temp_problem("[timescale\nkind=\"power\"\n");
    CHECK(run_cli("check --problem " + path).exit_code == 2);
    std::remove(path.c_str());
  }

  SECTION("violated invariant") {
    const auto path = write_temp_problem(
        "[timescale]\nkind = \"power\"\nbase = 2.0\n"
        "[problem]\nn = 1\nT = 1.0\ns = 2.0\n"
        "A = [[\"1/t\"]]\nQ = [\"0\"]\nG = [\"0\"]\n");
    CHECK(run_cli("check --problem " + path).exit_code == 3);
    std::remove(path.c_str());
  }

  SECTION("critical system") {
    CHECK(run_cli("check --problem " + kDir + "/critical_example.toml").exit_code == 4);
  }

  SECTION("non-contractive problem without the force flag") {
    const auto path = write_temp_problem(
        "[timescale]\nkind = \"power\"\nbase = 2.0\n"
        "[problem]\nn = 1\nT = 2.0\ns = 2.0\n"
        "A = [[\"1/t\"]]\nQ = [\"0.9*u1 + 0.1\"]\nG = [\"0\"]\n"
        "[lipschitz]\nE1 = 0.9\nE2 = 0.0\nE3 = 0.0\n");
    CHECK(run_cli("solve --problem " + path).exit_code == 5);
    std::remove(path.c_str());
  }

  SECTION("iteration limit") {
    CHECK(run_cli("solve --problem " + kDir +
                  "/qlattice_example.toml --max-iter 1")
              .exit_code == 7);
  }
}

TEST_CASE("cli report bundles every section and is byte-stable") {
  const std::string cmd = "report --problem " + kDir + "/qlattice_example.toml";
  const auto first = run_cli(cmd);
  REQUIRE(first.exit_code == 0);
  const json doc = json::parse(first.out);
  for (const char* key : {"axioms", "transition", "theta", "floquet", "check", "solve"})
    CHECK(doc.contains(key));
  CHECK(doc["solve"]["residuals"]["integral"].get<double>() <= 1e-10);

  const auto second = run_cli(cmd);
  CHECK(first.out == second.out);
}

TEST_CASE("cli writes to --out") {
  const std::string out_path = "cli_out_file.json";
  const auto res = run_cli("check --problem " + kDir + "/paper_example.toml --out " +
                           out_path);
  REQUIRE(res.exit_code == 0);
  std::ifstream in(out_path);
  REQUIRE(in.good());
  json doc;
  in >> doc;
  CHECK(doc["r"].get<double>() == 1.0);
  std::remove(out_path.c_str());
}

TEST_CASE("cli report on a non-contractive problem records the skip") {
  const auto path = write_temp_problem(
      "[timescale]\nkind = \"power\"\nbase = 2.0\n"
      "[problem]\nn = 1\nT = 2.0\ns = 2.0\n"
      "A = [[\"1/t\"]]\nQ = [\"0.9*u1 + 0.1\"]\nG = [\"0\"]\n"
      "[lipschitz]\nE1 = 0.9\nE2 = 0.0\nE3 = 0.0\n");
  const auto res = run_cli("report --problem " + path);
  REQUIRE(res.exit_code == 0);
  const json doc = json::parse(res.out);
  CHECK(doc["solve"].is_null());
  CHECK(doc.contains("solve_skipped"));
  CHECK_FALSE(doc["check"]["contraction_ok"].get<bool>());
  std::remove(path.c_str());
}
