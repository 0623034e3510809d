#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "tshift/delta_calculus.hpp"
#include "tshift/grid_function.hpp"
#include "tshift/matrix_power.hpp"
#include "tshift/shift_system.hpp"

namespace tshift {

// A matrix-valued coefficient t -> A(t).  When delta_period is set the
// function is declared delta-periodic in shifts with that period; problem
// loading verifies the declaration on the window.
struct MatrixFunction {
  ShiftSystemPtr sys;
  Eigen::Index dim = 0;
  std::function<Eigen::MatrixXd(double)> eval;
  std::optional<double> delta_period;

  Eigen::MatrixXd operator()(double t) const { return eval(t); }

  static MatrixFunction constant(ShiftSystemPtr sys, const Eigen::MatrixXd& M) {
    return {std::move(sys), M.rows(), [M](double) { return M; }, std::nullopt};
  }

  // extends window values delta-periodically (assumption (A delta-periodic))
  static MatrixFunction from_window(ShiftSystemPtr sys, double T,
                                    std::vector<Eigen::MatrixXd> values) {
    const Eigen::Index n = values.empty() ? 0 : values.front().rows();
    auto grid = std::make_shared<MatrixGridFunction>(sys, T, std::move(values),
                                                     Extension::delta_periodic);
    return {std::move(sys), n, [grid](double t) { return (*grid)(t); }, T};
  }
};

// Cumulative products Phi(t, t0) = prod_{tau in [t0, t)} (I + mu(tau) A(tau)),
// extended lazily to the right of t0 together with their inverses.
class TransitionTable {
 public:
  TransitionTable(const MatrixFunction& A, double t0)
      : A_(A), t0_idx_(A.sys->scale().index_of(t0)) {
    fwd_.push_back(Eigen::MatrixXd::Identity(A_.dim, A_.dim));
    inv_.push_back(Eigen::MatrixXd::Identity(A_.dim, A_.dim));
  }

  double t0() const { return A_.sys->scale().point(t0_idx_); }

  const Eigen::MatrixXd& phi(double t) { return fwd_[slot(t)]; }
  const Eigen::MatrixXd& phi_inv(double t) { return inv_[slot(t)]; }

 private:
  std::size_t slot(double t) {
    const Index k = A_.sys->scale().index_of(t) - t0_idx_;
    if (k < 0)
      throw OutOfDomainError("transition table covers [t0, infinity) only");
    while (static_cast<Index>(fwd_.size()) <= k) {
      const Index i = t0_idx_ + static_cast<Index>(fwd_.size()) - 1;
      const double tau = A_.sys->scale().point(i);
      const double mu = A_.sys->scale().point(i + 1) - tau;
      const Eigen::MatrixXd F =
          Eigen::MatrixXd::Identity(A_.dim, A_.dim) + mu * A_(tau);
      Eigen::FullPivLU<Eigen::MatrixXd> lu(F);
      if (!lu.isInvertible()) throw NotRegressiveError(tau);
      fwd_.push_back(F * fwd_.back());
      inv_.push_back(inv_.back() * lu.inverse());
    }
    return static_cast<std::size_t>(k);
  }

  MatrixFunction A_;
  Index t0_idx_;
  std::vector<Eigen::MatrixXd> fwd_;
  std::vector<Eigen::MatrixXd> inv_;
};

// Phi_A(t, t0).  Forward windows are ascending ordered products; the backward
// direction is the inverse of the forward product over [t, t0).
inline Eigen::MatrixXd transition_matrix(const MatrixFunction& A, double t, double t0) {
  const TimeScale& ts = A.sys->scale();
  const Index i1 = ts.index_of(t);
  const Index i0 = ts.index_of(t0);
  const Index lo = std::min(i0, i1);
  const Index hi = std::max(i0, i1);
  Eigen::MatrixXd phi = Eigen::MatrixXd::Identity(A.dim, A.dim);
  for (Index i = lo; i < hi; ++i) {
    const double tau = ts.point(i);
    const double mu = ts.point(i + 1) - tau;
    const Eigen::MatrixXd F = Eigen::MatrixXd::Identity(A.dim, A.dim) + mu * A(tau);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(F);
    if (!lu.isInvertible()) throw NotRegressiveError(tau);
    phi = F * phi;
  }
  if (i1 >= i0) return phi;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(phi);
  if (!lu.isInvertible()) throw NotRegressiveError(t);
  return lu.inverse();
}

// Truncated Peano-Baker series: I + int A + int A int A + ...; every iterated
// integral is an exact delta sum, so the series terminates at the window's
// step count and then agrees with the transition product.  Serves as the
// independent oracle for transition_matrix.
inline Eigen::MatrixXd peano_baker(const MatrixFunction& A, double t, double t0,
                                   int order) {
  const TimeScale& ts = A.sys->scale();
  const Index i0 = ts.index_of(t0);
  const Index i1 = ts.index_of(t);
  if (i1 < i0) throw OutOfDomainError("peano_baker needs t >= t0");
  if (order < 0) throw OutOfDomainError("peano_baker needs order >= 0");
  const Index steps = i1 - i0;
  const Eigen::Index n = A.dim;

  std::vector<Eigen::MatrixXd> coef(static_cast<std::size_t>(steps));
  for (Index j = 0; j < steps; ++j) {
    const double tau = ts.point(i0 + j);
    coef[static_cast<std::size_t>(j)] = (ts.point(i0 + j + 1) - tau) * A(tau);
  }

  Eigen::MatrixXd total = Eigen::MatrixXd::Identity(n, n);
  // prev[j] = V_{k-1}(tau_j) for j < steps, prev[steps] = V_{k-1}(t)
  std::vector<Eigen::MatrixXd> prev(static_cast<std::size_t>(steps) + 1,
                                    Eigen::MatrixXd::Identity(n, n));
  for (int k = 1; k <= order && k <= steps; ++k) {
    std::vector<Eigen::MatrixXd> cur(prev.size(), Eigen::MatrixXd::Zero(n, n));
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
    for (Index j = 0; j < steps; ++j) {
      cur[static_cast<std::size_t>(j)] = acc;
      acc += coef[static_cast<std::size_t>(j)] * prev[static_cast<std::size_t>(j)];
    }
    cur.back() = acc;
    total += acc;
    prev = std::move(cur);
  }
  return total;
}

// The piecewise clock of the monodromy exponent: Theta(t) accumulates the
// backward-shift gaps between consecutive orbit points of t0 under the
// T-shift, plus the partial correction G for points off that orbit.
struct ThetaBreakdown {
  long m = 0;        // least k with the k-th orbit point at or beyond t
  double G = 0.0;    // 0 on the orbit, else -delta_-(t, orbit point m)
  double theta = 0.0;
  bool on_orbit = true;
};

inline ThetaBreakdown theta_breakdown(const ShiftSystem& sys, double T, double t) {
  const TimeScale& ts = sys.scale();
  const Index it = ts.index_of(t);
  const Index i0 = sys.t0_index();
  if (it < i0) throw OutOfDomainError("Theta is defined on [t0, infinity)");
  ThetaBreakdown out;
  out.on_orbit = it == i0;
  double cur = sys.t0();
  double sum = 0.0;
  long guard = 0;
  while (ts.index_of(cur) < it) {
    const double prev = cur;
    cur = sys.shift_plus(T, cur);
    sum += sys.shift_minus(prev, cur);
    ++out.m;
    if (ts.index_of(cur) == it) out.on_orbit = true;
    if (++guard > 1'000'000)
      throw OutOfDomainError("Theta iteration did not reach t");
  }
  out.G = out.on_orbit ? 0.0 : -sys.shift_minus(t, cur);
  out.theta = sum + out.G;
  return out;
}

inline double theta(const ShiftSystem& sys, double T, double t) {
  return theta_breakdown(sys, T, t).theta;
}

// R(t) = (M^{[Theta(sigma(t)) - Theta(t)]/T} - I) / mu(t); on isolated scales
// the defining limit is attained at s = t.  All values are powers of the same
// matrix and therefore commute.
inline Eigen::MatrixXcd solve_R(const MatrixPower& M, const ShiftSystem& sys, double T,
                                double t) {
  const double expo = (theta(sys, T, sys.sigma(t)) - theta(sys, T, t)) / T;
  const Eigen::MatrixXcd num =
      M.pow(expo) - Eigen::MatrixXcd::Identity(M.dim(), M.dim());
  return num / sys.mu(t);
}

inline Eigen::MatrixXcd solve_R(const Eigen::MatrixXd& M, const ShiftSystem& sys,
                                double T, double t) {
  return solve_R(MatrixPower(M), sys, T, t);
}

// ordered product of (I + mu R) over [t0, t); the time-scale exponential of R
template <class RFn>
Eigen::MatrixXcd exp_R(const ShiftSystem& sys, RFn&& R, double t, double t0) {
  const TimeScale& ts = sys.scale();
  const Index i0 = ts.index_of(t0);
  const Index i1 = ts.index_of(t);
  if (i1 < i0) throw OutOfDomainError("exp_R needs t >= t0");
  Eigen::MatrixXcd acc;
  bool first = true;
  for (Index i = i0; i < i1; ++i) {
    const double tau = ts.point(i);
    const double mu = ts.point(i + 1) - tau;
    const Eigen::MatrixXcd Rv = R(tau);
    const Eigen::MatrixXcd F =
        Eigen::MatrixXcd::Identity(Rv.rows(), Rv.cols()) + mu * Rv;
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(F);
    if (!lu.isInvertible()) throw NotRegressiveError(tau);
    acc = first ? F : Eigen::MatrixXcd(F * acc);
    first = false;
  }
  if (first) {
    const Eigen::MatrixXcd R0 = R(ts.point(i0));
    return Eigen::MatrixXcd::Identity(R0.rows(), R0.cols());
  }
  return acc;
}

// Floquet data over one fundamental window: the monodromy M, the R-matrix
// table, the exponential e_R(., t0) and the periodic similarity L with
// Phi_A(t, t0) = L(t) e_R(t, t0), L(t0) = I.
struct FloquetData {
  double t0 = 0.0;
  double T = 0.0;
  Eigen::MatrixXd M;
  Eigen::VectorXcd spectrum;
  std::vector<double> points;             // window points plus the window end
  std::vector<Eigen::MatrixXcd> R;        // at window points
  std::vector<Eigen::MatrixXcd> e_R;      // e_R(points[j], t0)
  std::vector<Eigen::MatrixXcd> L;        // Phi(points[j], t0) e_R(points[j], t0)^{-1}
};

inline FloquetData floquet_decompose(const MatrixFunction& A, double T) {
  const ShiftSystem& sys = *A.sys;
  FloquetData out;
  out.t0 = sys.t0();
  out.T = T;

  TransitionTable table(A, out.t0);
  const double wend = sys.window_end(T);
  out.M = table.phi(wend);
  MatrixPower mp(out.M);
  out.spectrum = mp.eigenvalues();

  out.points = sys.window_points(T);
  out.points.push_back(wend);

  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(A.dim, A.dim);
  Eigen::MatrixXcd acc = I;
  for (std::size_t j = 0; j < out.points.size(); ++j) {
    const double t = out.points[j];
    out.e_R.push_back(acc);
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(acc);
    if (!lu.isInvertible())
      throw SingularMatrixError("e_R lost invertibility inside the window");
    out.L.push_back(table.phi(t).cast<std::complex<double>>() * lu.inverse());
    if (j + 1 < out.points.size()) {
      const Eigen::MatrixXcd Rv = solve_R(mp, sys, T, t);
      out.R.push_back(Rv);
      acc = (I + sys.mu(t) * Rv) * acc;
    }
  }
  return out;
}

struct HomogeneousPeriodicity {
  bool periodic_solution_exists = false;
  double unit_gap = 0.0;  // min |lambda - 1| over the monodromy spectrum
  Eigen::MatrixXd monodromy;
  Eigen::VectorXcd spectrum;
};

// Criterion for x^Delta = A x to admit a nonzero T-periodic solution in
// shifts: some eigenvalue of the monodromy matrix equals 1.
inline HomogeneousPeriodicity periodic_solution_exists_homogeneous(
    const MatrixFunction& A, double T, double spectral_tol = 1e-8) {
  HomogeneousPeriodicity out;
  out.monodromy = transition_matrix(A, A.sys->window_end(T), A.sys->t0());
  out.spectrum = spectrum_of(out.monodromy);
  double gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < out.spectrum.size(); ++i)
    gap = std::min(gap, std::abs(out.spectrum(i) - std::complex<double>(1.0, 0.0)));
  out.unit_gap = gap;
  out.periodic_solution_exists = gap <= spectral_tol;
  return out;
}

inline bool noncritical_check(const MatrixFunction& A, double T,
                              double spectral_tol = 1e-8) {
  return !periodic_solution_exists_homogeneous(A, T, spectral_tol)
              .periodic_solution_exists;
}

}  // namespace tshift
