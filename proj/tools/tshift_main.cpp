// Command line driver: periodic solutions of neutral delay dynamic systems on
// isolated time scales.  See README.md for the problem file format.

#include <CLI11.hpp>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "tshift/problem_file.hpp"
#include "tshift/report_io.hpp"

namespace {

using namespace tshift;

struct Options {
  std::string problem_path;
  std::string out_path;
  std::string format = "json";
  std::optional<double> tol;
  std::optional<int> max_iter;
  std::optional<double> ball;
  std::uint64_t seed = kDefaultSeed;
  int horizon_periods = 4;
  bool force = false;
};

LoadedProblem load(const Options& opt) {
  auto loaded = load_problem(opt.problem_path, opt.seed);
  if (opt.tol) loaded.problem.solver.tol = *opt.tol;
  if (opt.max_iter) loaded.problem.solver.max_iter = *opt.max_iter;
  if (opt.ball) loaded.problem.solver.J = *opt.ball;
  loaded.problem.solver.force_noncontractive = opt.force;
  return loaded;
}

void emit(const Options& opt, const json& doc,
          const std::function<void(std::ostream&)>& csv) {
  std::ofstream file;
  std::ostream* os = &std::cout;
  if (!opt.out_path.empty()) {
    file.open(opt.out_path);
    if (!file) throw FileError("cannot open output file '" + opt.out_path + "'");
    os = &file;
  }
  if (opt.format == "csv") {
    csv(*os);
  } else {
    dump_json17(doc, *os);
    *os << "\n";
  }
}

json system_json(const ShiftSystem& sys) {
  json out{{"kind", to_string(sys.scale().kind())}, {"t0", jnum(sys.t0())}};
  if (sys.period()) out["P"] = jnum(*sys.period());
  return out;
}

// ---- subcommand bodies ------------------------------------------------------

void run_axioms(const Options& opt) {
  const auto loaded = load(opt);
  const ShiftSystem& sys = *loaded.problem.sys;
  const auto sample = ShiftSample::deterministic(sys, 3, 64, opt.seed);
  const auto rep = verify_shift_axioms(sys, sample);

  json doc = to_json(rep);
  doc["system"] = system_json(sys);
  doc["sample_pairs"] = sample.pairs.size();
  if (sys.period()) {
    const auto period =
        verify_period(sys, *sys.period(), period_sample_points(sys, 3, 64, opt.seed));
    doc["period"] = to_json(period);
  }

  emit(opt, doc, [&](std::ostream& os) {
    CsvWriter head(os);
    head.field(std::string("id"))
        .field(std::string("passed"))
        .field(std::string("checked"))
        .field(std::string("note"));
    head.endrow();
    for (const auto& c : rep.checks) {
      CsvWriter w(os);
      w.field(c.id).field(c.passed).field(static_cast<long>(c.checked)).field(c.note);
      w.endrow();
    }
  });
}

void run_transition(const Options& opt) {
  const auto loaded = load(opt);
  const NeutralProblem& p = loaded.problem;
  TransitionTable table(p.A, p.sys->t0());
  auto pts = p.window();
  pts.push_back(p.window_end());

  json rows = json::array();
  for (double t : pts)
    rows.push_back(json{{"t", jnum(t)}, {"phi", to_json(table.phi(t))}});
  const Eigen::MatrixXd M = table.phi(p.window_end());
  json doc{{"t0", jnum(p.sys->t0())},
           {"T", jnum(p.T)},
           {"rows", rows},
           {"monodromy", to_json(M)},
           {"spectrum", spectrum_json(spectrum_of(M))}};

  emit(opt, doc, [&](std::ostream& os) {
    CsvWriter head(os);
    head.field(std::string("t"));
    for (int i = 0; i < p.dim; ++i)
      for (int j = 0; j < p.dim; ++j)
        head.field("phi_" + std::to_string(i + 1) + std::to_string(j + 1));
    head.endrow();
    for (double t : pts) {
      CsvWriter w(os);
      w.field(t);
      const Eigen::MatrixXd& phi = table.phi(t);
      for (int i = 0; i < p.dim; ++i)
        for (int j = 0; j < p.dim; ++j) w.field(phi(i, j));
      w.endrow();
    }
  });
}

void run_floquet(const Options& opt) {
  const auto loaded = load(opt);
  const NeutralProblem& p = loaded.problem;
  const FloquetData fd = floquet_decompose(p.A, p.T);
  const auto hp = periodic_solution_exists_homogeneous(p.A, p.T, p.solver.spectral_tol);

  json doc = to_json(fd);
  doc["eigenvalue_one"] = hp.periodic_solution_exists;
  doc["unit_gap"] = jnum(hp.unit_gap);

  emit(opt, doc, [&](std::ostream& os) {
    CsvWriter head(os);
    head.field(std::string("t"));
    auto block = [&head, &p](const std::string& name) {
      for (const char* part : {"re", "im"})
        for (int i = 0; i < p.dim; ++i)
          for (int j = 0; j < p.dim; ++j)
            head.field(name + "_" + part + "_" + std::to_string(i + 1) +
                       std::to_string(j + 1));
    };
    block("R");
    block("e_R");
    block("L");
    head.endrow();
    for (std::size_t k = 0; k < fd.points.size(); ++k) {
      CsvWriter w(os);
      w.field(fd.points[k]);
      auto emit_matrix = [&w, &p](const Eigen::MatrixXcd* m) {
        for (int pass = 0; pass < 2; ++pass)
          for (int i = 0; i < p.dim; ++i)
            for (int j = 0; j < p.dim; ++j)
              w.field(m ? (pass == 0 ? (*m)(i, j).real() : (*m)(i, j).imag()) : 0.0);
      };
      emit_matrix(k < fd.R.size() ? &fd.R[k] : nullptr);
      emit_matrix(&fd.e_R[k]);
      emit_matrix(&fd.L[k]);
      w.endrow();
    }
  });
}

void run_theta(const Options& opt) {
  const auto loaded = load(opt);
  const NeutralProblem& p = loaded.problem;
  const ShiftSystem& sys = *p.sys;
  const TimeScale& ts = sys.scale();

  double end = sys.t0();
  for (int k = 0; k < std::max(1, opt.horizon_periods); ++k)
    end = sys.shift_plus(p.T, end);
  json rows = json::array();
  std::vector<std::array<double, 4>> table;
  for (Index i = sys.t0_index(); i <= ts.index_of(end); ++i) {
    const double t = ts.point(i);
    const auto bk = theta_breakdown(sys, p.T, t);
    rows.push_back(json{{"t", jnum(t)},
                        {"m", bk.m},
                        {"G", jnum(bk.G)},
                        {"theta", jnum(bk.theta)},
                        {"on_orbit", bk.on_orbit}});
    table.push_back({t, static_cast<double>(bk.m), bk.G, bk.theta});
  }
  json doc{{"t0", jnum(sys.t0())}, {"T", jnum(p.T)}, {"rows", rows}};

  emit(opt, doc, [&](std::ostream& os) {
    CsvWriter head(os);
    head.field(std::string("t"))
        .field(std::string("m"))
        .field(std::string("G"))
        .field(std::string("theta"));
    head.endrow();
    for (const auto& row : table) {
      CsvWriter w(os);
      w.field(row[0]).field(static_cast<long>(row[1])).field(row[2]).field(row[3]);
      w.endrow();
    }
  });
}

json check_json(const LoadedProblem& loaded, const Options& opt,
                ConditionReport* out = nullptr) {
  const auto rep =
      check_conditions(loaded.problem, std::nullopt, opt.horizon_periods, 64, opt.seed);
  if (out) *out = rep;
  json doc = to_json(rep);
  doc["validation"] = to_json(loaded.validation);
  return doc;
}

void run_check(const Options& opt) {
  const auto loaded = load(opt);
  const json doc = check_json(loaded, opt);
  emit(opt, doc, [&](std::ostream& os) { csv_key_values(doc, os); });
}

json solve_json(const Options& opt, const LoadedProblem& loaded,
                PeriodicVectorFunction* solution_out = nullptr) {
  ConditionReport rep;
  json condition = check_json(loaded, opt, &rep);
  const auto [x, diag] = solve_picard(loaded.problem, std::nullopt, rep);
  const auto residuals = verify_solution(loaded.problem, x);
  if (solution_out) *solution_out = x;
  return json{{"condition", condition},
              {"diagnostics", to_json(diag)},
              {"solution", solution_json(x)},
              {"solution_norm", jnum(x.norm())},
              {"residuals", to_json(residuals)}};
}

void run_solve(const Options& opt) {
  const auto loaded = load(opt);
  auto x = zero_function(loaded.problem);
  const json doc = solve_json(opt, loaded, &x);
  emit(opt, doc, [&](std::ostream& os) {
    CsvWriter head(os);
    head.field(std::string("t"));
    for (int i = 0; i < loaded.problem.dim; ++i) head.field("x" + std::to_string(i + 1));
    head.endrow();
    for (std::size_t j = 0; j < x.size(); ++j) {
      CsvWriter w(os);
      w.field(x.points()[j]);
      for (int i = 0; i < loaded.problem.dim; ++i) w.field(x.value_at(j)(i));
      w.endrow();
    }
  });
}

void run_verify(const Options& opt) {
  const auto loaded = load(opt);
  ConditionReport rep =
      check_conditions(loaded.problem, std::nullopt, opt.horizon_periods, 64, opt.seed);
  const auto [x, diag] = solve_picard(loaded.problem, std::nullopt, rep);
  const auto residuals = verify_solution(loaded.problem, x);
  json doc{{"residuals", to_json(residuals)},
           {"solution_norm", jnum(x.norm())},
           {"iterations", diag.iterations},
           {"converged", diag.converged}};
  emit(opt, doc, [&](std::ostream& os) { csv_key_values(doc, os); });
}

void run_report(const Options& opt) {
  const auto loaded = load(opt);
  const NeutralProblem& p = loaded.problem;
  json doc;

  {  // axioms + period
    const ShiftSystem& sys = *p.sys;
    const auto sample = ShiftSample::deterministic(sys, 3, 64, opt.seed);
    json ax = to_json(verify_shift_axioms(sys, sample));
    ax["system"] = system_json(sys);
    if (sys.period())
      ax["period"] = to_json(
          verify_period(sys, *sys.period(), period_sample_points(sys, 3, 64, opt.seed)));
    doc["axioms"] = ax;
  }

  {  // transition table over the closed window
    TransitionTable table(p.A, p.sys->t0());
    auto pts = p.window();
    pts.push_back(p.window_end());
    json rows = json::array();
    for (double t : pts)
      rows.push_back(json{{"t", jnum(t)}, {"phi", to_json(table.phi(t))}});
    const Eigen::MatrixXd M = table.phi(p.window_end());
    doc["transition"] = json{{"rows", rows},
                             {"monodromy", to_json(M)},
                             {"spectrum", spectrum_json(spectrum_of(M))}};
  }

  {  // theta over one window
    json rows = json::array();
    const TimeScale& ts = p.sys->scale();
    for (Index i = p.sys->t0_index(); i <= ts.index_of(p.window_end()); ++i) {
      const double t = ts.point(i);
      const auto bk = theta_breakdown(*p.sys, p.T, t);
      rows.push_back(json{{"t", jnum(t)},
                          {"m", bk.m},
                          {"G", jnum(bk.G)},
                          {"theta", jnum(bk.theta)},
                          {"on_orbit", bk.on_orbit}});
    }
    doc["theta"] = json{{"rows", rows}};
  }

  doc["floquet"] = to_json(floquet_decompose(p.A, p.T));
  doc["check"] = check_json(loaded, opt);

  try {
    doc["solve"] = solve_json(opt, loaded);
  } catch (const NotContractiveError& e) {
    // existence may still be certified via the ball condition; say so instead
    // of failing the whole report
    doc["solve"] = nullptr;
    doc["solve_skipped"] = e.what();
  }

  emit(opt, doc, [&](std::ostream& os) {
    json flat{{"check", doc["check"]}, {"axioms_all_passed", doc["axioms"]["all_passed"]}};
    if (doc.contains("solve_skipped")) {
      flat["solve"] = json{{"skipped", doc["solve_skipped"]}};
    } else if (!doc["solve"].is_null()) {
      flat["solve"] = json{{"residuals", doc["solve"]["residuals"]},
                           {"solution_norm", doc["solve"]["solution_norm"]}};
    }
    csv_key_values(flat, os);
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Periodic solutions in shifts for neutral delay dynamic systems on "
      "isolated time scales"};
  app.require_subcommand(1);

  Options opt;
  auto add_common = [&opt](CLI::App* cmd, bool solver_opts) {
    cmd->add_option("--problem", opt.problem_path, "problem file (TOML)")->required();
    cmd->add_option("--out", opt.out_path, "write output to this path (default stdout)");
    cmd->add_option("--format", opt.format, "output format")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
    cmd->add_option("--seed", opt.seed, "seed for sampled checks and estimators")
        ->capture_default_str();
    cmd->add_option("--horizon-periods", opt.horizon_periods,
                    "windows inspected by norm/theta horizons")
        ->capture_default_str();
    if (solver_opts) {
      cmd->add_option("--tol", opt.tol, "step-norm tolerance override");
      cmd->add_option("--max-iter", opt.max_iter, "iteration limit override");
      cmd->add_option("--ball", opt.ball, "ball radius override for estimators");
      cmd->add_flag("--force-noncontractive", opt.force,
                    "damped best-effort iteration when the contraction test fails");
    }
  };

  add_common(app.add_subcommand("axioms", "verify the shift-operator axioms"), false);
  add_common(app.add_subcommand("transition", "transition matrix table"), false);
  add_common(app.add_subcommand("floquet", "Floquet decomposition data"), false);
  add_common(app.add_subcommand("theta", "Theta / m / G table"), false);
  add_common(app.add_subcommand("check", "existence and uniqueness conditions"), true);
  add_common(app.add_subcommand("solve", "Picard iteration to the periodic solution"),
             true);
  add_common(app.add_subcommand("verify", "solve and report residuals"), true);
  add_common(app.add_subcommand("report", "everything in one document"), true);

  CLI11_PARSE(app, argc, argv);

  try {
    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "axioms")
      run_axioms(opt);
    else if (cmd == "transition")
      run_transition(opt);
    else if (cmd == "floquet")
      run_floquet(opt);
    else if (cmd == "theta")
      run_theta(opt);
    else if (cmd == "check")
      run_check(opt);
    else if (cmd == "solve")
      run_solve(opt);
    else if (cmd == "verify")
      run_verify(opt);
    else if (cmd == "report")
      run_report(opt);
  } catch (const tshift::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.exit_code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
