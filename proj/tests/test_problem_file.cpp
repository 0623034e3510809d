#include <catch2/catch_amalgamated.hpp>
#include <string>

#include "tshift/problem_file.hpp"

using namespace tshift;

namespace {

const std::string kProblemDir = TSHIFT_PROBLEM_DIR;

// a minimal well-formed file, patchable per test
std::string minimal_problem(const std::string& T = "2.0", const std::string& s = "2.0",
                            const std::string& a11 = "1/t") {
  return "[timescale]\n"
         "kind = \"power\"\n"
         "base = 2.0\n"
         "\n"
         "[problem]\n"
         "n = 1\n"
         "T = " + T + "\n"
         "s = " + s + "\n"
         "A = [[\"" + a11 + "\"]]\n"
         "Q = [\"0.1*u1\"]\n"
         "G = [\"0\"]\n";
}

}  // namespace

TEST_CASE("the bundled worked example loads and passes every hard check") {
  const auto loaded = load_problem(kProblemDir + "/paper_example.toml");
  CHECK(loaded.spec.dim == 2);
  CHECK(loaded.spec.T == 2.0);
  CHECK(loaded.spec.delay == 2.0);
  CHECK(loaded.problem.sys->t0() == 1.0);
  CHECK(loaded.problem.sys->period() == 2.0);
  CHECK(loaded.validation.hard_ok());
  REQUIRE(loaded.spec.lipschitz.has_value());
  CHECK(loaded.spec.lipschitz->E1 == 0.125);

  // A evaluates through the expression layer
  CHECK(loaded.problem.A(2.0)(0, 0) == 0.5);
  CHECK(loaded.problem.A(2.0)(0, 1) == 0.0);

  // Q at zero reproduces the constant forcing component
  CHECK(loaded.problem.Q(1.0, Eigen::VectorXd::Zero(2))(0) == 0.125);
}

TEST_CASE("the other bundled problems load") {
  const auto rich = load_problem(kProblemDir + "/qlattice_example.toml");
  CHECK(rich.validation.hard_ok());
  CHECK(rich.validation.nontrivial_forcing);

  const auto critical = load_problem(kProblemDir + "/critical_example.toml");
  CHECK(critical.validation.hard_ok());
  CHECK_FALSE(critical.validation.nontrivial_forcing);
  CHECK_FALSE(noncritical_check(critical.problem.A, critical.problem.T));
}

TEST_CASE("hard invariant violations refuse the problem") {
  SECTION("function period below the scale period") {
    try {
      load_problem_text(minimal_problem("1.0"));
      FAIL("expected InvariantError");
    } catch (const InvariantError& e) {
      CHECK(e.check == "function period");
    }
  }

  SECTION("delay off the scale") {
    try {
      load_problem_text(minimal_problem("2.0", "3.0"));
      FAIL("expected InvariantError");
    } catch (const InvariantError& e) {
      CHECK(e.check == "delay compatibility");
    }
  }

  SECTION("coefficient that is not delta-periodic") {
    try {
      load_problem_text(minimal_problem("2.0", "2.0", "0.25"));
      FAIL("expected InvariantError");
    } catch (const InvariantError& e) {
      CHECK(e.check == "A delta-periodic");
    }
  }
}

TEST_CASE("file diagnostics carry positions") {
  SECTION("syntax error in a value") {
    try {
      load_problem_text("[timescale]\nkind = @\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line == 2);
    }
  }

  SECTION("unknown key") {
    try {
      load_problem_text(minimal_problem() + "bogus = 1\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("bogus") != std::string::npos);
    }
  }

  SECTION("duplicate key") {
    CHECK_THROWS_AS(load_problem_text("[timescale]\nkind = \"power\"\nkind = \"power\"\n"),
                    ParseError);
  }

  SECTION("missing required key") {
    CHECK_THROWS_AS(load_problem_text("[timescale]\nkind = \"power\"\nbase = 2.0\n"),
                    FileError);
  }

  SECTION("expression error inside a matrix entry is re-anchored to the file") {
    try {
      load_problem_text(minimal_problem("2.0", "2.0", "1/++t"));
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line == 9);  // the A = ... line of the minimal file
    }
  }

  SECTION("undeclared variable in a vector field") {
    const std::string text =
        "[timescale]\nkind = \"power\"\nbase = 2.0\n"
        "[problem]\nn = 1\nT = 2.0\ns = 2.0\n"
        "A = [[\"1/t\"]]\nQ = [\"x1\"]\nG = [\"0\"]\n";
    try {
      load_problem_text(text);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("x1") != std::string::npos);
    }
  }

  SECTION("partial lipschitz section") {
    CHECK_THROWS_AS(load_problem_text(minimal_problem() + "[lipschitz]\nE1 = 0.1\n"),
                    FileError);
  }

  SECTION("wrong matrix shape") {
    const std::string text =
        "[timescale]\nkind = \"power\"\nbase = 2.0\n"
        "[problem]\nn = 2\nT = 2.0\ns = 2.0\n"
        "A = [[\"1/t\"]]\nQ = [\"0\", \"0\"]\nG = [\"0\", \"0\"]\n";
    CHECK_THROWS_AS(load_problem_text(text), ParseError);
  }
}

TEST_CASE("reader handles comments, multi-line arrays and escapes") {
  const std::string text =
      "# leading comment\n"
      "[timescale]\n"
      "kind = \"power\"   # trailing comment\n"
      "base = 2.0\n"
      "\n"
      "[problem]\n"
      "n = 2\n"
      "T = 2.0\n"
      "s = 2.0\n"
      "A = [[\"1/t\", \"0\"],\n"
      "     # a comment inside the array\n"
      "     [\"0\", \"1/t\"]]\n"
      "Q = [\"0.1*u1\",\n"
      "     \"0\"]\n"
      "G = [\"0\", \"0\"]\n";
  const auto loaded = load_problem_text(text);
  CHECK(loaded.spec.dim == 2);
  CHECK(loaded.problem.A(4.0)(1, 1) == 0.25);
}

TEST_CASE("solver options round through the file") {
  const std::string text = minimal_problem() +
                           "[solver]\ntol = 1e-10\nmax_iter = 77\nJ = 0.5\n";
  const auto loaded = load_problem_text(text);
  CHECK(loaded.problem.solver.tol == 1e-10);
  CHECK(loaded.problem.solver.max_iter == 77);
  CHECK(loaded.problem.solver.J == 0.5);
}

TEST_CASE("integer lattice problems with an offset anchor") {
  const std::string text =
      "[timescale]\nkind = \"integer\"\nstep = 1.0\noffset = 0.0\n"
      "[problem]\nn = 1\nT = 2.0\ns = 1.0\n"
      "A = [[\"0-2\"]]\nQ = [\"0\"]\nG = [\"0\"]\n";
  const auto loaded = load_problem_text(text);
  CHECK(loaded.problem.sys->t0() == 0.0);
  CHECK(loaded.problem.A(5.0)(0, 0) == -2.0);
}
