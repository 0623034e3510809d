#pragma once

#include <stdexcept>
#include <string>

namespace tshift {

// Stable exit codes reported by the CLI when an error escapes a command.
enum class ExitCode : int {
  ok = 0,
  parse_failure = 2,
  invariant_violation = 3,
  critical_system = 4,
  not_contractive = 5,
  numerical_failure = 6,
  max_iterations = 7,
};

class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ExitCode exit_code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

// --- scale / shift domain errors -------------------------------------------

struct NotInScaleError : Error {
  explicit NotInScaleError(double value)
      : Error(ExitCode::numerical_failure,
              "point " + std::to_string(value) + " is not a member of the time scale"),
        value(value) {}
  double value;
};

struct NoSuccessorError : Error {
  explicit NoSuccessorError(double value)
      : Error(ExitCode::numerical_failure,
              "point " + std::to_string(value) + " has no successor in the time scale"),
        value(value) {}
  double value;
};

struct NoPredecessorError : Error {
  explicit NoPredecessorError(double value)
      : Error(ExitCode::numerical_failure,
              "point " + std::to_string(value) + " has no predecessor in the time scale"),
        value(value) {}
  double value;
};

struct OutOfDomainError : Error {
  explicit OutOfDomainError(const std::string& what)
      : Error(ExitCode::numerical_failure, what) {}
};

// --- linear algebra errors --------------------------------------------------

struct NotRegressiveError : Error {
  explicit NotRegressiveError(double tau)
      : Error(ExitCode::numerical_failure,
              "I + mu(t)A(t) is singular at t = " + std::to_string(tau)),
        tau(tau) {}
  double tau;
};

struct SingularMatrixError : Error {
  explicit SingularMatrixError(const std::string& what)
      : Error(ExitCode::numerical_failure, what) {}
};

struct LogBranchError : Error {
  explicit LogBranchError(const std::string& what)
      : Error(ExitCode::numerical_failure, what) {}
};

// --- solver errors -----------------------------------------------------------

struct CriticalError : Error {
  explicit CriticalError(const std::string& what)
      : Error(ExitCode::critical_system, what) {}
};

struct NotContractiveError : Error {
  explicit NotContractiveError(const std::string& what)
      : Error(ExitCode::not_contractive, what) {}
};

struct MaxIterError : Error {
  MaxIterError(int iterations, double last_step)
      : Error(ExitCode::max_iterations,
              "iteration limit " + std::to_string(iterations) +
                  " reached, last step norm " + std::to_string(last_step)),
        iterations(iterations),
        last_step(last_step) {}
  int iterations;
  double last_step;
};

// --- expression / file errors ------------------------------------------------

struct ParseError : Error {
  ParseError(int line, int column, const std::string& what)
      : Error(ExitCode::parse_failure,
              std::to_string(line) + ":" + std::to_string(column) + ": " + what),
        line(line),
        column(column) {}
  int line;
  int column;
};

struct SyntaxError : ParseError {
  using ParseError::ParseError;
};

struct UnknownIdentifierError : ParseError {
  UnknownIdentifierError(int line, int column, const std::string& name)
      : ParseError(line, column, "unknown identifier '" + name + "'"), name(name) {}
  std::string name;
};

struct ArityError : ParseError {
  ArityError(int line, int column, const std::string& fn, int expected, int got)
      : ParseError(line, column,
                   "function '" + fn + "' expects " + std::to_string(expected) +
                       " argument(s), got " + std::to_string(got)) {}
};

struct FileError : Error {
  explicit FileError(const std::string& what) : Error(ExitCode::parse_failure, what) {}
};

struct EvalDomainError : Error {
  explicit EvalDomainError(const std::string& what)
      : Error(ExitCode::numerical_failure, what) {}
};

struct InvariantError : Error {
  InvariantError(const std::string& check, const std::string& detail)
      : Error(ExitCode::invariant_violation, check + ": " + detail), check(check) {}
  std::string check;
};

}  // namespace tshift
