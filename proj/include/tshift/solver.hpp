#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "tshift/floquet.hpp"
#include "tshift/random.hpp"

namespace tshift {

struct LipschitzConstants {
  double E1 = 0.0;
  double E2 = 0.0;
  double E3 = 0.0;
};

struct SolverOptions {
  double tol = 1e-12;
  int max_iter = 10000;
  std::optional<double> J;          // ball radius for estimators / certificates
  bool force_noncontractive = false;
  double spectral_tol = 1e-8;       // |lambda - 1| threshold for criticality
};

using VectorMap2 = std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>;
using VectorMap3 =
    std::function<Eigen::VectorXd(double, const Eigen::VectorXd&, const Eigen::VectorXd&)>;

// The full datum of the neutral delay system
//   x^D(t) = A(t) x(t) + [Q(t, x(delta_-(s,t)))]^D + G(t, x(t), x(delta_-(s,t))).
struct NeutralProblem {
  ShiftSystemPtr sys;
  int dim = 0;
  MatrixFunction A;
  VectorMap2 Q;      // (t, u) with u = x(delta_-(s, t))
  VectorMap3 G;      // (t, x, u)
  double delay = 0.0;  // the fixed shift amount s
  double T = 0.0;      // function period
  std::optional<LipschitzConstants> lipschitz;
  SolverOptions solver;

  std::vector<double> window() const { return sys->window_points(T); }
  double window_end() const { return sys->window_end(T); }
  double window_length() const { return window_end() - sys->t0(); }
  double delayed(double t) const { return sys->shift_minus(delay, t); }
};

using PeriodicVectorFunction = VectorGridFunction;

inline PeriodicVectorFunction zero_function(const NeutralProblem& p) {
  std::vector<Eigen::VectorXd> vals(p.window().size(), Eigen::VectorXd::Zero(p.dim));
  return {p.sys, p.T, std::move(vals), Extension::periodic};
}

inline PeriodicVectorFunction random_ball_function(const NeutralProblem& p, double J,
                                                   Rng& rng) {
  std::vector<Eigen::VectorXd> vals;
  for (std::size_t j = 0; j < p.window().size(); ++j) {
    Eigen::VectorXd v(p.dim);
    for (int i = 0; i < p.dim; ++i) v(i) = rng.uniform(-J, J);
    vals.push_back(v);
  }
  return {p.sys, p.T, std::move(vals), Extension::periodic};
}

inline double function_distance(const PeriodicVectorFunction& a,
                                const PeriodicVectorFunction& b) {
  double m = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j)
    m = std::max(m, max_abs(Eigen::VectorXd(a.value_at(j) - b.value_at(j))));
  return m;
}

// --- problem validation -------------------------------------------------------

struct ValidationItem {
  std::string name;
  bool passed = true;
  bool hard = true;  // hard failures refuse the problem; soft ones are flags
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationItem> items;
  bool nontrivial_forcing = false;

  bool hard_ok() const {
    for (const auto& it : items)
      if (it.hard && !it.passed) return false;
    return true;
  }
  const ValidationItem* failed_hard() const {
    for (const auto& it : items)
      if (it.hard && !it.passed) return &it;
    return nullptr;
  }
};

// Samples the standing periodicity assumptions on the coefficient data: A
// delta-periodic, Q periodic, G delta-periodic (each along both shift
// directions at every window point, for a few random periodic arguments), the
// delay landing on scale points, and T at or above the scale period.  The
// forcing nontriviality Q^D(t,0) + G(t,0,0) != 0 is recorded as a soft flag:
// a vanishing forcing only means the unique periodic solution is zero.
inline ValidationReport validate_problem(const NeutralProblem& p, int x_samples = 4,
                                         std::uint64_t seed = kDefaultSeed,
                                         double tol = 1e-10) {
  ValidationReport rep;
  const ShiftSystem& sys = *p.sys;
  auto push = [&rep](std::string name, bool ok, bool hard, std::string detail) {
    rep.items.push_back({std::move(name), ok, hard, std::move(detail)});
  };

  // the solver path needs the catalog shifts and a scale periodic in shifts
  {
    push("shift operators", sys.canonical_shifts(), true,
         sys.canonical_shifts() ? "" : "custom operator maps are outside the solver path");
    push("scale period", sys.period().has_value(), true,
         sys.period() ? "" : "scale is not periodic in shifts");
    if (!rep.hard_ok()) return rep;
  }

  // function period above the scale period
  {
    bool ok = sys.scale().contains(p.T);
    std::string why = ok ? "" : "T is not a scale point";
    if (ok && sys.period() && p.T < *sys.period() - 1e-15) {
      ok = false;
      why = "function period below scale period";
    }
    if (ok) {
      try {
        sys.window_span(p.T);
      } catch (const Error& e) {
        ok = false;
        why = e.what();
      }
    }
    push("function period", ok, true, why);
    if (!ok) return rep;
  }

  // delay compatibility: s in [t0, infinity) and delta_-(s, .) stays on scale
  {
    bool ok = sys.scale().contains(p.delay) && p.delay >= sys.t0();
    std::string why = ok ? "" : "s must be a scale point at or above t0";
    if (ok)
      for (double t : p.window())
        if (!sys.in_domain_minus(p.delay, t)) {
          ok = false;
          why = "delta_-(s, t) leaves the scale at t = " + std::to_string(t);
          break;
        }
    push("delay compatibility", ok, true, why);
    if (!ok) return rep;
  }

  const auto window = p.window();

  {  // A delta-periodic in shifts
    double worst = 0.0;
    for (double t : window)
      for (ShiftDir d : {ShiftDir::plus, ShiftDir::minus}) {
        if (!sys.in_domain(d, p.T, t)) continue;
        const double w = sys.delta_shift_derivative(d, p.T, t);
        worst = std::max(
            worst, max_abs(Eigen::MatrixXd(p.A(sys.shift(d, p.T, t)) * w - p.A(t))));
      }
    push("A delta-periodic", worst <= tol, true,
         worst <= tol ? "" : "deviation " + std::to_string(worst));
  }

  Rng rng(seed);
  const double ball = p.solver.J.value_or(1.0);

  {  // Q periodicity along shifted arguments
    double worst = 0.0;
    for (int k = 0; k < x_samples; ++k) {
      const auto x = random_ball_function(p, ball, rng);
      for (double t : window)
        for (ShiftDir d : {ShiftDir::plus, ShiftDir::minus}) {
          if (!sys.in_domain(d, p.T, t)) continue;
          const double ts = sys.shift(d, p.T, t);
          const Eigen::VectorXd lhs = p.Q(ts, x(p.delayed(ts)));
          const Eigen::VectorXd rhs = p.Q(t, x(p.delayed(t)));
          worst = std::max(worst, max_abs(Eigen::VectorXd(lhs - rhs)));
        }
    }
    push("Q periodic", worst <= tol, true,
         worst <= tol ? "" : "deviation " + std::to_string(worst));
  }

  {  // G delta-periodicity along shifted arguments
    double worst = 0.0;
    for (int k = 0; k < x_samples; ++k) {
      const auto x = random_ball_function(p, ball, rng);
      for (double t : window)
        for (ShiftDir d : {ShiftDir::plus, ShiftDir::minus}) {
          if (!sys.in_domain(d, p.T, t)) continue;
          const double ts = sys.shift(d, p.T, t);
          const double w = sys.delta_shift_derivative(d, p.T, t);
          const Eigen::VectorXd lhs = p.G(ts, x(ts), x(p.delayed(ts))) * w;
          const Eigen::VectorXd rhs = p.G(t, x(t), x(p.delayed(t)));
          worst = std::max(worst, max_abs(Eigen::VectorXd(lhs - rhs)));
        }
    }
    push("G delta-periodic", worst <= tol, true,
         worst <= tol ? "" : "deviation " + std::to_string(worst));
  }

  {  // forcing nontriviality (soft)
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(p.dim);
    double peak = 0.0;
    for (double t : window) {
      const Eigen::VectorXd qd =
          (p.Q(sys.sigma(t), zero) - p.Q(t, zero)) / sys.mu(t);
      peak = std::max(peak, max_abs(Eigen::VectorXd(qd + p.G(t, zero, zero))));
    }
    rep.nontrivial_forcing = peak > 1e-12;
    push("nontrivial forcing", rep.nontrivial_forcing, false,
         rep.nontrivial_forcing ? "" : "Q^D(t,0) + G(t,0,0) vanishes on the window");
  }

  return rep;
}

// --- operators ---------------------------------------------------------------

// B, C and H = B + C of the fixed-point formulation, sharing one transition
// table and the (Phi^{-1}(end) - I)^{-1} prefactor.  Construction fails on
// critical systems, where the prefactor does not exist.
class HOperator {
 public:
  explicit HOperator(const NeutralProblem& p)
      : p_(p), table_(p.A, p.sys->t0()) {
    const double wend = p_.window_end();
    M_ = table_.phi(wend);
    const Eigen::VectorXcd evs = spectrum_of(M_);
    double gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < evs.size(); ++i)
      gap = std::min(gap, std::abs(evs(i) - std::complex<double>(1.0, 0.0)));
    if (gap <= p_.solver.spectral_tol)
      throw CriticalError("homogeneous system admits a periodic solution "
                          "(monodromy eigenvalue within " +
                          std::to_string(p_.solver.spectral_tol) + " of 1)");
    const Eigen::MatrixXd mid =
        table_.phi_inv(wend) - Eigen::MatrixXd::Identity(p_.dim, p_.dim);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(mid);
    if (!lu.isInvertible())
      throw CriticalError("Phi^{-1}(end) - I is numerically singular");
    K_ = lu.inverse();
  }

  const NeutralProblem& problem() const { return p_; }
  const Eigen::MatrixXd& monodromy() const { return M_; }

  PeriodicVectorFunction apply_B(const PeriodicVectorFunction& x) const {
    std::vector<Eigen::VectorXd> vals;
    for (double t : p_.window()) vals.push_back(p_.Q(t, x(p_.delayed(t))));
    return {p_.sys, p_.T, std::move(vals), Extension::periodic};
  }

  PeriodicVectorFunction apply_C(const PeriodicVectorFunction& x) {
    const TimeScale& ts = p_.sys->scale();
    std::vector<Eigen::VectorXd> vals;
    for (double t : p_.window()) {
      const Index lo = ts.index_of(t);
      const Index hi = ts.index_of(p_.sys->shift_plus(p_.T, t));
      Eigen::VectorXd integral = Eigen::VectorXd::Zero(p_.dim);
      for (Index i = lo; i < hi; ++i) {
        const double u = ts.point(i);
        const double mu = ts.point(i + 1) - u;
        const Eigen::VectorXd load =
            p_.A(u) * p_.Q(u, x(p_.delayed(u))) + p_.G(u, x(u), x(p_.delayed(u)));
        integral += table_.phi_inv(ts.point(i + 1)) * load * mu;
      }
      vals.push_back(table_.phi(t) * (K_ * integral));
    }
    return {p_.sys, p_.T, std::move(vals), Extension::periodic};
  }

  PeriodicVectorFunction apply(const PeriodicVectorFunction& x) {
    const auto b = apply_B(x);
    auto c = apply_C(x);
    std::vector<Eigen::VectorXd> vals;
    for (std::size_t j = 0; j < b.size(); ++j)
      vals.push_back(b.value_at(j) + c.value_at(j));
    return {p_.sys, p_.T, std::move(vals), Extension::periodic};
  }

 private:
  NeutralProblem p_;
  TransitionTable table_;
  Eigen::MatrixXd M_;
  Eigen::MatrixXd K_;
};

inline PeriodicVectorFunction operator_B(const NeutralProblem& p,
                                         const PeriodicVectorFunction& x) {
  return HOperator(p).apply_B(x);
}

inline PeriodicVectorFunction operator_C(const NeutralProblem& p,
                                         const PeriodicVectorFunction& x) {
  return HOperator(p).apply_C(x);
}

inline PeriodicVectorFunction operator_H(const NeutralProblem& p,
                                         const PeriodicVectorFunction& x) {
  return HOperator(p).apply(x);
}

// --- condition machinery -------------------------------------------------------

// sup of |A(t)| over the first horizon_periods windows; per-window maxima let
// callers confirm decay beyond the first window
inline double sup_norm_A(const NeutralProblem& p, int horizon_periods,
                         std::vector<double>* per_window = nullptr) {
  if (horizon_periods < 1)
    throw OutOfDomainError("sup_norm_A needs at least one window");
  const TimeScale& ts = p.sys->scale();
  if (per_window) per_window->clear();
  double total = 0.0;
  double start = p.sys->t0();
  for (int k = 0; k < horizon_periods; ++k) {
    const double end = p.sys->shift_plus(p.T, start);
    double wmax = 0.0;
    for (Index i = ts.index_of(start); i < ts.index_of(end); ++i)
      wmax = std::max(wmax, max_abs(p.A(ts.point(i))));
    if (per_window) per_window->push_back(wmax);
    total = std::max(total, wmax);
    start = end;
  }
  return total;
}

// r of the inversion lemma: the exact double maximization of
// |[Phi(sigma(u), t0) (Phi^{-1}(end, t0) - I) Phi^{-1}(t, t0)]^{-1}| over
// t in the closed window and u in [t, delta_+^T(t)].
inline double compute_r(const NeutralProblem& p) {
  const ShiftSystem& sys = *p.sys;
  const TimeScale& ts = sys.scale();
  TransitionTable table(p.A, sys.t0());
  const double wend = p.window_end();
  const Eigen::MatrixXd M = table.phi(wend);

  const Eigen::VectorXcd evs = spectrum_of(M);
  double gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < evs.size(); ++i)
    gap = std::min(gap, std::abs(evs(i) - std::complex<double>(1.0, 0.0)));
  if (gap <= p.solver.spectral_tol)
    throw CriticalError("r is undefined: monodromy has an eigenvalue at 1");

  const Eigen::MatrixXd mid =
      table.phi_inv(wend) - Eigen::MatrixXd::Identity(p.dim, p.dim);
  double r = 0.0;
  auto closed_window = p.window();
  closed_window.push_back(wend);
  for (double t : closed_window) {
    const Eigen::MatrixXd right = table.phi_inv(t);
    const Index u_lo = ts.index_of(t);
    const Index u_hi = ts.index_of(sys.shift_plus(p.T, t));
    for (Index i = u_lo; i <= u_hi; ++i) {
      const double su = ts.point(i + 1);  // sigma(u)
      const Eigen::MatrixXd bracket = table.phi(su) * mid * right;
      Eigen::FullPivLU<Eigen::MatrixXd> lu(bracket);
      if (!lu.isInvertible())
        throw CriticalError("inversion bracket is singular inside the window");
      r = std::max(r, max_abs(Eigen::MatrixXd(lu.inverse())));
    }
  }
  return r;
}

struct ConditionReport {
  double r = 0.0;
  double norm_A = 0.0;
  double E1 = 0.0, E2 = 0.0, E3 = 0.0;
  double alpha = 0.0;  // ||Q(., 0)||
  double beta = 0.0;   // ||G(., 0, 0)||
  double window_length = 0.0;
  double N = 0.0;  // r w (||A|| E1 + E2 + E3)
  double contraction_constant = 0.0;
  double J_min = std::numeric_limits<double>::infinity();
  double unit_gap = 0.0;
  bool noncritical = false;
  bool contraction_ok = false;
  bool krasnoselskii_ok = false;
  bool lipschitz_estimated = false;
  bool nontrivial_forcing = false;
  std::vector<double> norm_A_windows;
  bool norm_horizon_warning = false;
};

// Empirical Lipschitz surrogates for Q and G over the J-ball of periodic
// functions: the largest observed difference quotients times a 1.2 safety
// factor.  Non-rigorous by construction.
inline LipschitzConstants estimate_lipschitz(const NeutralProblem& p, double J,
                                             int samples = 64,
                                             std::uint64_t seed = kDefaultSeed) {
  if (!(J > 0)) throw OutOfDomainError("estimate_lipschitz needs J > 0");
  Rng rng(seed);
  double e1 = 0.0, e2 = 0.0, e3 = 0.0;
  const auto window = p.window();
  for (int k = 0; k < samples; ++k) {
    const auto phi = random_ball_function(p, J, rng);
    const auto psi = random_ball_function(p, J, rng);
    const auto chi = random_ball_function(p, J, rng);
    const double d = function_distance(phi, psi);
    if (d < 1e-13) continue;
    for (double t : window) {
      const double td = p.delayed(t);
      e1 = std::max(
          e1, max_abs(Eigen::VectorXd(p.Q(t, phi(td)) - p.Q(t, psi(td)))) / d);
      e2 = std::max(e2, max_abs(Eigen::VectorXd(p.G(t, phi(t), chi(td)) -
                                                p.G(t, psi(t), chi(td)))) /
                            d);
      e3 = std::max(e3, max_abs(Eigen::VectorXd(p.G(t, chi(t), phi(td)) -
                                                p.G(t, chi(t), psi(td)))) /
                            d);
    }
  }
  return {1.2 * e1, 1.2 * e2, 1.2 * e3};
}

// Evaluates every hypothesis of the existence/uniqueness theorems: r, the
// coefficient norms, the Lipschitz data, the contraction constant
// E1 + r w (||A|| E1 + E2 + E3) and the least admissible ball radius
//   J_min = (alpha + r w (||A|| alpha + beta)) / (1 - contraction constant),
// infinite when the denominator is not positive.
inline ConditionReport check_conditions(
    const NeutralProblem& p,
    std::optional<LipschitzConstants> constants = std::nullopt,
    int horizon_periods = 4, int estimate_samples = 64,
    std::uint64_t seed = kDefaultSeed) {
  ConditionReport rep;

  const auto hp = periodic_solution_exists_homogeneous(p.A, p.T, p.solver.spectral_tol);
  rep.unit_gap = hp.unit_gap;
  rep.noncritical = !hp.periodic_solution_exists;
  if (!rep.noncritical)
    throw CriticalError("homogeneous system is critical; conditions are undefined");

  rep.r = compute_r(p);
  rep.norm_A = sup_norm_A(p, horizon_periods, &rep.norm_A_windows);
  if (!rep.norm_A_windows.empty()) {
    const double first = rep.norm_A_windows.front();
    rep.norm_A = first;
    for (std::size_t k = 1; k < rep.norm_A_windows.size(); ++k)
      if (rep.norm_A_windows[k] > first + 1e-15) rep.norm_horizon_warning = true;
  }

  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(p.dim);
  auto closed_window = p.window();
  closed_window.push_back(p.window_end());
  for (double t : closed_window) {
    rep.alpha = std::max(rep.alpha, max_abs(p.Q(t, zero)));
    rep.beta = std::max(rep.beta, max_abs(p.G(t, zero, zero)));
  }

  if (constants) {
    rep.E1 = constants->E1;
    rep.E2 = constants->E2;
    rep.E3 = constants->E3;
  } else if (p.lipschitz) {
    rep.E1 = p.lipschitz->E1;
    rep.E2 = p.lipschitz->E2;
    rep.E3 = p.lipschitz->E3;
  } else {
    const auto est =
        estimate_lipschitz(p, p.solver.J.value_or(1.0), estimate_samples, seed);
    rep.E1 = est.E1;
    rep.E2 = est.E2;
    rep.E3 = est.E3;
    rep.lipschitz_estimated = true;
  }

  rep.window_length = p.window_length();
  const double rw = rep.r * rep.window_length;
  rep.N = rw * (rep.norm_A * rep.E1 + rep.E2 + rep.E3);
  rep.contraction_constant = rep.E1 + rep.N;
  rep.contraction_ok = rep.contraction_constant < 1.0;

  const double numerator = rep.alpha + rw * (rep.norm_A * rep.alpha + rep.beta);
  const double denominator = 1.0 - rep.contraction_constant;
  rep.J_min = denominator > 0.0 ? numerator / denominator
                                : std::numeric_limits<double>::infinity();
  rep.krasnoselskii_ok = rep.E1 < 1.0 && std::isfinite(rep.J_min);

  const auto validation = validate_problem(p, 1, seed);
  rep.nontrivial_forcing = validation.nontrivial_forcing;
  return rep;
}

// --- Picard iteration ----------------------------------------------------------

struct SolveDiagnostics {
  int iterations = 0;
  bool converged = false;
  bool forced = false;  // damped iteration on a non-contractive problem
  double final_step = 0.0;
  double contraction_constant = 0.0;
  double max_ratio = 0.0;
  bool ratio_bound_ok = true;  // every observed ratio <= constant + 1e-6
  std::vector<double> step_norms;
  std::vector<double> ratios;
};

inline std::pair<PeriodicVectorFunction, SolveDiagnostics> solve_picard(
    const NeutralProblem& p,
    std::optional<PeriodicVectorFunction> x0 = std::nullopt,
    std::optional<ConditionReport> conditions = std::nullopt) {
  const ConditionReport rep = conditions ? *conditions : check_conditions(p);
  SolveDiagnostics diag;
  diag.contraction_constant = rep.contraction_constant;

  if (!rep.contraction_ok) {
    if (!p.solver.force_noncontractive)
      throw NotContractiveError(
          "contraction constant " + std::to_string(rep.contraction_constant) +
          " is not below 1; rerun with the force flag for best-effort damping");
    diag.forced = true;
  }

  HOperator H(p);
  PeriodicVectorFunction x = x0 ? *x0 : zero_function(p);
  double prev_step = -1.0;
  for (int k = 0; k < p.solver.max_iter; ++k) {
    const PeriodicVectorFunction hx = H.apply(x);
    PeriodicVectorFunction next = hx;
    if (diag.forced) {
      std::vector<Eigen::VectorXd> vals;
      for (std::size_t j = 0; j < hx.size(); ++j)
        vals.push_back(0.5 * x.value_at(j) + 0.5 * hx.value_at(j));
      next = PeriodicVectorFunction(p.sys, p.T, std::move(vals), Extension::periodic);
    }
    const double step = function_distance(next, x);
    diag.step_norms.push_back(step);
    if (prev_step > 0.0) {
      const double ratio = step / prev_step;
      diag.ratios.push_back(ratio);
      diag.max_ratio = std::max(diag.max_ratio, ratio);
      if (!diag.forced && ratio > rep.contraction_constant + 1e-6)
        diag.ratio_bound_ok = false;
    }
    prev_step = step;
    x = next;
    ++diag.iterations;
    if (step <= p.solver.tol) {
      diag.converged = true;
      diag.final_step = step;
      return {x, diag};
    }
  }
  throw MaxIterError(p.solver.max_iter,
                     diag.step_norms.empty() ? 0.0 : diag.step_norms.back());
}

// --- residual verification -------------------------------------------------------

struct ResidualReport {
  double integral = 0.0;      // max |x - Hx| over the window
  double differential = 0.0;  // max |x^D - A x - [Q]^D - G|
  double periodicity = 0.0;   // max |x(delta_+^T(t)) - x(t)|
};

inline ResidualReport verify_solution(const NeutralProblem& p,
                                      const PeriodicVectorFunction& x) {
  ResidualReport rep;
  const ShiftSystem& sys = *p.sys;

  for (double t : p.window()) {
    const double st = sys.sigma(t);
    const double mu = sys.mu(t);
    const Eigen::VectorXd xd = (x(st) - x(t)) / mu;
    const Eigen::VectorXd qd =
        (p.Q(st, x(p.delayed(st))) - p.Q(t, x(p.delayed(t)))) / mu;
    const Eigen::VectorXd res =
        xd - p.A(t) * x(t) - qd - p.G(t, x(t), x(p.delayed(t)));
    rep.differential = std::max(rep.differential, max_abs(res));

    const double ts = sys.shift_plus(p.T, t);
    rep.periodicity =
        std::max(rep.periodicity, max_abs(Eigen::VectorXd(x(ts) - x(t))));
  }

  HOperator H(p);
  const PeriodicVectorFunction hx = H.apply(x);
  rep.integral = function_distance(x, hx);
  return rep;
}

}  // namespace tshift
