#pragma once

#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "tshift/expression.hpp"
#include "tshift/solver.hpp"

namespace tshift {

// ---------------------------------------------------------------------------
// Minimal TOML-style reader: [section] headers, key = value lines, strings,
// numbers, booleans and (nested, possibly multi-line) arrays.  Every value
// remembers where it came from so diagnostics can point at the file.
// ---------------------------------------------------------------------------

struct TomlValue {
  std::variant<double, bool, std::string, std::vector<TomlValue>> data;
  int line = 1;
  int col = 1;

  bool is_number() const { return std::holds_alternative<double>(data); }
  bool is_string() const { return std::holds_alternative<std::string>(data); }
  bool is_array() const { return std::holds_alternative<std::vector<TomlValue>>(data); }

  double as_number() const {
    if (!is_number()) throw ParseError(line, col, "expected a number");
    return std::get<double>(data);
  }
  bool as_bool() const {
    if (!std::holds_alternative<bool>(data)) throw ParseError(line, col, "expected a boolean");
    return std::get<bool>(data);
  }
  const std::string& as_string() const {
    if (!is_string()) throw ParseError(line, col, "expected a string");
    return std::get<std::string>(data);
  }
  const std::vector<TomlValue>& as_array() const {
    if (!is_array()) throw ParseError(line, col, "expected an array");
    return std::get<std::vector<TomlValue>>(data);
  }
};

class TomlTable {
 public:
  static TomlTable parse(const std::string& text) {
    TomlTable table;
    Cursor cur{text};
    std::string section;
    while (!cur.at_end()) {
      cur.skip_ws_and_comments();
      if (cur.at_end()) break;
      if (cur.peek() == '[') {
        cur.get();
        section.clear();
        while (!cur.at_end() && cur.peek() != ']') section += cur.get();
        if (cur.at_end()) throw ParseError(cur.line, cur.col, "unterminated section header");
        cur.get();  // ']'
        section = trim(section);
        if (section.empty()) throw ParseError(cur.line, cur.col, "empty section name");
        cur.expect_line_end();
        continue;
      }
      const int kline = cur.line, kcol = cur.col;
      std::string key;
      while (!cur.at_end() && (std::isalnum(static_cast<unsigned char>(cur.peek())) ||
                               cur.peek() == '_' || cur.peek() == '-'))
        key += cur.get();
      if (key.empty())
        throw ParseError(cur.line, cur.col, "expected a key or a [section] header");
      cur.skip_spaces();
      if (cur.at_end() || cur.get() != '=')
        throw ParseError(cur.line, cur.col, "expected '=' after key '" + key + "'");
      cur.skip_spaces();
      TomlValue value = parse_value(cur);
      cur.expect_line_end();
      const std::string path = section.empty() ? key : section + "." + key;
      if (!table.entries_.emplace(path, std::move(value)).second)
        throw ParseError(kline, kcol, "duplicate key '" + path + "'");
    }
    return table;
  }

  static TomlTable parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileError("cannot open problem file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
  }

  const TomlValue* find(const std::string& key) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
  }

  const TomlValue& at(const std::string& key) const {
    if (const auto* v = find(key)) return *v;
    throw FileError("missing required key '" + key + "'");
  }

  std::vector<std::string> keys() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : entries_) out.push_back(k);
    return out;
  }

 private:
  struct Cursor {
    const std::string& text;
    std::size_t pos = 0;
    int line = 1;
    int col = 1;

    bool at_end() const { return pos >= text.size(); }
    char peek() const { return text[pos]; }
    char get() {
      const char c = text[pos++];
      if (c == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      return c;
    }
    void skip_spaces() {
      while (!at_end() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) get();
    }
    void skip_ws_and_comments() {
      for (;;) {
        skip_spaces();
        if (!at_end() && peek() == '#') {
          while (!at_end() && peek() != '\n') get();
        }
        if (!at_end() && peek() == '\n') {
          get();
          continue;
        }
        return;
      }
    }
    void expect_line_end() {
      skip_spaces();
      if (!at_end() && peek() == '#')
        while (!at_end() && peek() != '\n') get();
      if (at_end()) return;
      if (peek() != '\n')
        throw ParseError(line, col, "unexpected trailing characters on the line");
      get();
    }
  };

  static std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t");
    const auto b = s.find_last_not_of(" \t");
    return a == std::string::npos ? "" : s.substr(a, b - a + 1);
  }

  static TomlValue parse_value(Cursor& cur) {
    cur.skip_spaces();
    if (cur.at_end()) throw ParseError(cur.line, cur.col, "expected a value");
    TomlValue v;
    v.line = cur.line;
    v.col = cur.col;
    const char c = cur.peek();
    if (c == '"') {
      cur.get();
      std::string s;
      for (;;) {
        if (cur.at_end()) throw ParseError(v.line, v.col, "unterminated string");
        const char d = cur.get();
        if (d == '"') break;
        if (d == '\\') {
          if (cur.at_end()) throw ParseError(cur.line, cur.col, "dangling escape");
          const char e = cur.get();
          switch (e) {
            case '"': s += '"'; break;
            case '\\': s += '\\'; break;
            case 'n': s += '\n'; break;
            case 't': s += '\t'; break;
            default:
              throw ParseError(cur.line, cur.col, std::string("unknown escape '\\") + e + "'");
          }
        } else {
          s += d;
        }
      }
      v.data = std::move(s);
      return v;
    }
    if (c == '[') {
      cur.get();
      std::vector<TomlValue> items;
      for (;;) {
        cur.skip_ws_and_comments();
        if (cur.at_end()) throw ParseError(v.line, v.col, "unterminated array");
        if (cur.peek() == ']') {
          cur.get();
          break;
        }
        items.push_back(parse_value(cur));
        cur.skip_ws_and_comments();
        if (cur.at_end()) throw ParseError(v.line, v.col, "unterminated array");
        if (cur.peek() == ',') {
          cur.get();
          continue;
        }
        if (cur.peek() == ']') {
          cur.get();
          break;
        }
        throw ParseError(cur.line, cur.col, "expected ',' or ']' in array");
      }
      v.data = std::move(items);
      return v;
    }
    // bare word: number or boolean
    std::string word;
    while (!cur.at_end() && cur.peek() != ',' && cur.peek() != ']' && cur.peek() != '\n' &&
           cur.peek() != '#' && cur.peek() != ' ' && cur.peek() != '\t' && cur.peek() != '\r')
      word += cur.get();
    if (word == "true") {
      v.data = true;
      return v;
    }
    if (word == "false") {
      v.data = false;
      return v;
    }
    try {
      std::size_t used = 0;
      const double num = std::stod(word, &used);
      if (used != word.size()) throw std::invalid_argument(word);
      v.data = num;
    } catch (const std::exception&) {
      throw ParseError(v.line, v.col, "cannot parse value '" + word + "'");
    }
    return v;
  }

  std::map<std::string, TomlValue> entries_;
};

// ---------------------------------------------------------------------------
// Problem files
// ---------------------------------------------------------------------------

struct ProblemSpec {
  std::string scale_kind;
  std::map<std::string, double> scale_params;  // q / base / step / offset
  std::optional<double> t0;
  std::optional<double> P;
  int dim = 0;
  double T = 0.0;
  double delay = 0.0;
  std::vector<std::vector<Expression>> A;  // n x n
  std::vector<Expression> Q;               // n entries over t, u1..un
  std::vector<Expression> G;               // n entries over t, x1..xn, u1..un
  std::optional<LipschitzConstants> lipschitz;
  SolverOptions solver;
};

struct LoadedProblem {
  ProblemSpec spec;
  NeutralProblem problem;
  ValidationReport validation;
};

namespace problem_detail {

inline Expression parse_cell(const TomlValue& v) {
  try {
    return Expression::parse(v.as_string());
  } catch (const ParseError& e) {
    // re-anchor the diagnostic at the file position of the offending string
    throw ParseError(v.line, v.col, std::string("in expression: ") + e.what());
  }
}

inline void reject_unknown_keys(const TomlTable& t) {
  static const std::vector<std::string> known = {
      "timescale.kind", "timescale.q",      "timescale.base", "timescale.step",
      "timescale.offset", "timescale.t0",   "timescale.P",    "problem.n",
      "problem.T",      "problem.s",        "problem.A",      "problem.Q",
      "problem.G",      "lipschitz.E1",     "lipschitz.E2",   "lipschitz.E3",
      "solver.tol",     "solver.max_iter",  "solver.J",
  };
  for (const auto& k : t.keys()) {
    bool ok = false;
    for (const auto& known_key : known) ok = ok || known_key == k;
    if (!ok) {
      const auto* v = t.find(k);
      throw ParseError(v->line, v->col, "unknown key '" + k + "'");
    }
  }
}

inline ShiftSystemPtr build_system(const ProblemSpec& spec) {
  const auto param = [&spec](const std::string& name,
                             std::optional<double> fallback = std::nullopt) {
    const auto it = spec.scale_params.find(name);
    if (it != spec.scale_params.end()) return it->second;
    if (fallback) return *fallback;
    throw FileError("timescale kind '" + spec.scale_kind + "' needs parameter '" +
                    name + "'");
  };
  TimeScale scale = [&] {
    if (spec.scale_kind == "integer")
      return TimeScale::integer_lattice(param("step", 1.0), param("offset", 0.0));
    if (spec.scale_kind == "geometric") return TimeScale::geometric(param("q"));
    if (spec.scale_kind == "power") return TimeScale::power(param("base"));
    if (spec.scale_kind == "sqrt") return TimeScale::sqrt_naturals();
    if (spec.scale_kind == "signed_squares") return TimeScale::signed_squares();
    throw FileError("unknown timescale kind '" + spec.scale_kind + "'");
  }();
  return std::make_shared<ShiftSystem>(std::move(scale), spec.t0, spec.P);
}

inline std::vector<std::string> variable_names(int n, bool with_x, bool with_u) {
  std::vector<std::string> names = {"t"};
  if (with_x)
    for (int i = 1; i <= n; ++i) names.push_back("x" + std::to_string(i));
  if (with_u)
    for (int i = 1; i <= n; ++i) names.push_back("u" + std::to_string(i));
  return names;
}

}  // namespace problem_detail

inline ProblemSpec parse_problem_spec(const TomlTable& t) {
  problem_detail::reject_unknown_keys(t);
  ProblemSpec spec;
  spec.scale_kind = t.at("timescale.kind").as_string();
  for (const char* p : {"q", "base", "step", "offset"})
    if (const auto* v = t.find(std::string("timescale.") + p))
      spec.scale_params[p] = v->as_number();
  if (const auto* v = t.find("timescale.t0")) spec.t0 = v->as_number();
  if (const auto* v = t.find("timescale.P")) spec.P = v->as_number();

  const double nd = t.at("problem.n").as_number();
  spec.dim = static_cast<int>(nd);
  if (spec.dim < 1 || spec.dim != nd)
    throw ParseError(t.at("problem.n").line, t.at("problem.n").col,
                     "n must be a positive integer");
  spec.T = t.at("problem.T").as_number();
  spec.delay = t.at("problem.s").as_number();

  const auto& a_rows = t.at("problem.A").as_array();
  if (static_cast<int>(a_rows.size()) != spec.dim)
    throw ParseError(t.at("problem.A").line, t.at("problem.A").col,
                     "A must have n rows");
  for (const auto& row : a_rows) {
    const auto& cells = row.as_array();
    if (static_cast<int>(cells.size()) != spec.dim)
      throw ParseError(row.line, row.col, "A rows must have n entries");
    std::vector<Expression> exprs;
    for (const auto& cell : cells) {
      auto e = problem_detail::parse_cell(cell);
      try {
        e.check_variables(problem_detail::variable_names(spec.dim, false, false));
      } catch (const UnknownIdentifierError& err) {
        throw ParseError(cell.line, cell.col, std::string("in A: ") + err.what());
      }
      exprs.push_back(std::move(e));
    }
    spec.A.push_back(std::move(exprs));
  }

  auto read_vector_field = [&](const std::string& key, bool with_x,
                               std::vector<Expression>& out) {
    const auto& rows = t.at(key).as_array();
    if (static_cast<int>(rows.size()) != spec.dim)
      throw ParseError(t.at(key).line, t.at(key).col, key + " must have n entries");
    for (const auto& cell : rows) {
      auto e = problem_detail::parse_cell(cell);
      try {
        e.check_variables(problem_detail::variable_names(spec.dim, with_x, true));
      } catch (const UnknownIdentifierError& err) {
        throw ParseError(cell.line, cell.col, std::string("in ") + key + ": " + err.what());
      }
      out.push_back(std::move(e));
    }
  };
  read_vector_field("problem.Q", false, spec.Q);
  read_vector_field("problem.G", true, spec.G);

  const bool has_e1 = t.find("lipschitz.E1") != nullptr;
  const bool has_e2 = t.find("lipschitz.E2") != nullptr;
  const bool has_e3 = t.find("lipschitz.E3") != nullptr;
  if (has_e1 != has_e2 || has_e2 != has_e3)
    throw FileError("lipschitz section must declare E1, E2 and E3 together");
  if (has_e1)
    spec.lipschitz = LipschitzConstants{t.at("lipschitz.E1").as_number(),
                                        t.at("lipschitz.E2").as_number(),
                                        t.at("lipschitz.E3").as_number()};

  if (const auto* v = t.find("solver.tol")) spec.solver.tol = v->as_number();
  if (const auto* v = t.find("solver.max_iter"))
    spec.solver.max_iter = static_cast<int>(v->as_number());
  if (const auto* v = t.find("solver.J")) spec.solver.J = v->as_number();
  return spec;
}

// Assembles the runtime problem from a parsed spec.  The expression closures
// evaluate with exact canonical scale coordinates.
inline NeutralProblem build_problem(const ProblemSpec& spec) {
  NeutralProblem p;
  p.sys = problem_detail::build_system(spec);
  p.dim = spec.dim;
  p.T = spec.T;
  p.delay = spec.delay;
  p.lipschitz = spec.lipschitz;
  p.solver = spec.solver;

  const int n = spec.dim;
  auto A_entries = std::make_shared<std::vector<std::vector<Expression>>>(spec.A);
  p.A = MatrixFunction{
      p.sys, n,
      [A_entries, n](double t) {
        Eigen::MatrixXd m(n, n);
        const std::map<std::string, double> env = {{"t", t}};
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            m(i, j) = (*A_entries)[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]
                          .evaluate(env);
        return m;
      },
      spec.T};

  auto Q_entries = std::make_shared<std::vector<Expression>>(spec.Q);
  p.Q = [Q_entries, n](double t, const Eigen::VectorXd& u) {
    std::map<std::string, double> env = {{"t", t}};
    for (int i = 0; i < n; ++i) env["u" + std::to_string(i + 1)] = u(i);
    Eigen::VectorXd out(n);
    for (int i = 0; i < n; ++i)
      out(i) = (*Q_entries)[static_cast<std::size_t>(i)].evaluate(env);
    return out;
  };

  auto G_entries = std::make_shared<std::vector<Expression>>(spec.G);
  p.G = [G_entries, n](double t, const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    std::map<std::string, double> env = {{"t", t}};
    for (int i = 0; i < n; ++i) {
      env["x" + std::to_string(i + 1)] = x(i);
      env["u" + std::to_string(i + 1)] = u(i);
    }
    Eigen::VectorXd out(n);
    for (int i = 0; i < n; ++i)
      out(i) = (*G_entries)[static_cast<std::size_t>(i)].evaluate(env);
    return out;
  };
  return p;
}

// Parses, builds and validates a problem file.  Hard validation failures are
// refused with the name of the failed check; the forcing nontriviality flag
// stays informational.
inline LoadedProblem load_problem(const std::string& path,
                                  std::uint64_t seed = kDefaultSeed) {
  LoadedProblem out;
  out.spec = parse_problem_spec(TomlTable::parse_file(path));
  out.problem = build_problem(out.spec);
  out.validation = validate_problem(out.problem, 4, seed);
  if (const auto* failed = out.validation.failed_hard())
    throw InvariantError(failed->name, failed->detail);
  return out;
}

inline LoadedProblem load_problem_text(const std::string& text,
                                       std::uint64_t seed = kDefaultSeed) {
  LoadedProblem out;
  out.spec = parse_problem_spec(TomlTable::parse(text));
  out.problem = build_problem(out.spec);
  out.validation = validate_problem(out.problem, 4, seed);
  if (const auto* failed = out.validation.failed_hard())
    throw InvariantError(failed->name, failed->detail);
  return out;
}

}  // namespace tshift
