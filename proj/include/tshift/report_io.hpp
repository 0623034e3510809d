#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include <json.hpp>

#include "tshift/axioms.hpp"
#include "tshift/floquet.hpp"
#include "tshift/solver.hpp"

namespace tshift {

using nlohmann::json;

// --- number formatting ----------------------------------------------------------

// 17 significant digits round-trip doubles exactly
inline std::string format17(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// json value for a double; non-finite values become strings
inline json jnum(double v) {
  if (std::isfinite(v)) return v;
  return format17(v);
}

// Serializes a json tree with every finite double printed via %.17g.  Object
// keys come out sorted (nlohmann keeps them ordered), so output is byte-stable.
inline void dump_json17(const json& j, std::ostream& os, int indent = 0) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string pad_in(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ",\n";
        first = false;
        os << pad_in << json(it.key()).dump() << ": ";
        dump_json17(it.value(), os, indent + 1);
      }
      os << "\n" << pad << "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      os << "[\n";
      bool first = true;
      for (const auto& item : j) {
        if (!first) os << ",\n";
        first = false;
        os << pad_in;
        dump_json17(item, os, indent + 1);
      }
      os << "\n" << pad << "]";
      return;
    }
    case json::value_t::number_float:
      os << format17(j.get<double>());
      return;
    default:
      os << j.dump();
      return;
  }
}

// --- matrices --------------------------------------------------------------------

inline json to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(jnum(m(i, j)));
    rows.push_back(row);
  }
  return rows;
}

inline json to_json(const Eigen::MatrixXcd& m) {
  json out;
  json re = json::array(), im = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json rrow = json::array(), irow = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      rrow.push_back(jnum(m(i, j).real()));
      irow.push_back(jnum(m(i, j).imag()));
    }
    re.push_back(rrow);
    im.push_back(irow);
  }
  out["re"] = re;
  out["im"] = im;
  return out;
}

inline json to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(jnum(v(i)));
  return out;
}

inline json spectrum_json(const Eigen::VectorXcd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i)
    out.push_back(json{{"re", jnum(v(i).real())}, {"im", jnum(v(i).imag())}});
  return out;
}

// --- reports ----------------------------------------------------------------------

inline json to_json(const AxiomReport& rep) {
  json checks = json::array();
  for (const auto& c : rep.checks) {
    json item{{"id", c.id},
              {"summary", c.summary},
              {"checked", c.checked},
              {"passed", c.passed}};
    if (!c.passed) {
      json witness = json::array();
      for (double w : c.counterexample) witness.push_back(jnum(w));
      item["counterexample"] = witness;
      item["note"] = c.note;
    }
    checks.push_back(item);
  }
  return json{{"axioms", checks}, {"all_passed", rep.all_passed()}};
}

inline json to_json(const PeriodReport& rep) {
  json out{{"P", jnum(rep.P)}, {"ok", rep.ok}, {"checked", rep.checked}};
  if (!rep.ok) {
    out["failure"] = rep.failure;
    json witness = json::array();
    for (double w : rep.counterexample) witness.push_back(jnum(w));
    out["counterexample"] = witness;
  }
  return out;
}

inline json to_json(const ValidationReport& rep) {
  json items = json::array();
  for (const auto& it : rep.items)
    items.push_back(json{{"name", it.name},
                         {"passed", it.passed},
                         {"hard", it.hard},
                         {"detail", it.detail}});
  return json{{"checks", items}, {"nontrivial_forcing", rep.nontrivial_forcing}};
}

inline json to_json(const ConditionReport& c) {
  json windows = json::array();
  for (double w : c.norm_A_windows) windows.push_back(jnum(w));
  return json{{"r", jnum(c.r)},
              {"norm_A", jnum(c.norm_A)},
              {"norm_A_windows", windows},
              {"norm_horizon_warning", c.norm_horizon_warning},
              {"E1", jnum(c.E1)},
              {"E2", jnum(c.E2)},
              {"E3", jnum(c.E3)},
              {"alpha", jnum(c.alpha)},
              {"beta", jnum(c.beta)},
              {"window_length", jnum(c.window_length)},
              {"N", jnum(c.N)},
              {"contraction_constant", jnum(c.contraction_constant)},
              {"J_min", jnum(c.J_min)},
              {"unit_gap", jnum(c.unit_gap)},
              {"noncritical", c.noncritical},
              {"contraction_ok", c.contraction_ok},
              {"krasnoselskii_ok", c.krasnoselskii_ok},
              {"lipschitz_estimated", c.lipschitz_estimated},
              {"nontrivial_forcing", c.nontrivial_forcing}};
}

inline json to_json(const SolveDiagnostics& d) {
  json steps = json::array(), ratios = json::array();
  for (double s : d.step_norms) steps.push_back(jnum(s));
  for (double r : d.ratios) ratios.push_back(jnum(r));
  return json{{"iterations", d.iterations},
              {"converged", d.converged},
              {"forced", d.forced},
              {"final_step", jnum(d.final_step)},
              {"contraction_constant", jnum(d.contraction_constant)},
              {"max_ratio", jnum(d.max_ratio)},
              {"ratio_bound_ok", d.ratio_bound_ok},
              {"step_norms", steps},
              {"ratios", ratios}};
}

inline json to_json(const ResidualReport& r) {
  return json{{"integral", jnum(r.integral)},
              {"differential", jnum(r.differential)},
              {"periodicity", jnum(r.periodicity)}};
}

inline json solution_json(const PeriodicVectorFunction& x) {
  json rows = json::array();
  for (std::size_t j = 0; j < x.size(); ++j)
    rows.push_back(json{{"t", jnum(x.points()[j])}, {"x", to_json(x.value_at(j))}});
  return rows;
}

inline json to_json(const FloquetData& fd) {
  json rows = json::array();
  for (std::size_t j = 0; j < fd.points.size(); ++j) {
    json row{{"t", jnum(fd.points[j])},
             {"e_R", to_json(fd.e_R[j])},
             {"L", to_json(fd.L[j])}};
    if (j < fd.R.size()) row["R"] = to_json(fd.R[j]);
    rows.push_back(row);
  }
  return json{{"t0", jnum(fd.t0)},
              {"T", jnum(fd.T)},
              {"monodromy", to_json(fd.M)},
              {"spectrum", spectrum_json(fd.spectrum)},
              {"rows", rows}};
}

// --- CSV --------------------------------------------------------------------------

inline std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    out += c;
  }
  out += "\"";
  return out;
}

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}

  CsvWriter& field(const std::string& s) {
    sep();
    os_ << csv_quote(s);
    return *this;
  }
  CsvWriter& field(double v) {
    sep();
    os_ << format17(v);
    return *this;
  }
  CsvWriter& field(bool b) {
    sep();
    os_ << (b ? "true" : "false");
    return *this;
  }
  CsvWriter& field(long v) {
    sep();
    os_ << v;
    return *this;
  }
  void endrow() {
    os_ << "\n";
    first_ = true;
  }

 private:
  void sep() {
    if (!first_) os_ << ",";
    first_ = false;
  }
  std::ostream& os_;
  bool first_ = true;
};

// flat key,value CSV rendering of any json object (arrays inline as json text)
inline void csv_key_values(const json& j, std::ostream& os, const std::string& prefix = "") {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    const json& v = it.value();
    if (v.is_object()) {
      csv_key_values(v, os, key);
      continue;
    }
    CsvWriter w(os);
    w.field(key);
    if (v.is_number_float())
      w.field(v.get<double>());
    else if (v.is_boolean())
      w.field(v.get<bool>());
    else if (v.is_string())
      w.field(v.get<std::string>());
    else
      w.field(v.dump());
    w.endrow();
  }
}

}  // namespace tshift
