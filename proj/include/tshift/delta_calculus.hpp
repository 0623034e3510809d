#pragma once

#include <algorithm>
#include <cmath>
#include <type_traits>
#include <vector>

#include "tshift/grid_function.hpp"

namespace tshift {

// Hilger derivative on an isolated scale: the forward difference quotient.
template <class F>
auto delta_derivative(const ShiftSystem& sys, F&& f, double t) {
  using V = std::decay_t<decltype(f(t))>;
  const double st = sys.sigma(t);
  const V hi = f(st);
  const V lo = f(t);
  return V((hi - lo) / sys.mu(t));
}

template <class V>
V delta_derivative(const GridFunction<V>& f, double t) {
  return delta_derivative(*f.system(), [&f](double u) { return f(u); }, t);
}

// Cauchy delta integral over [a, b)_T: the exact sum of f(tau) mu(tau).
template <class F>
auto delta_integral(const ShiftSystem& sys, F&& f, double a, double b) {
  using V = std::decay_t<decltype(f(a))>;
  const TimeScale& ts = sys.scale();
  const Index ia = ts.index_of(a);
  const Index ib = ts.index_of(b);
  if (ia > ib) throw OutOfDomainError("delta integral needs a <= b");
  V acc = f(a) * 0.0;  // zero shaped like f's output
  for (Index i = ia; i < ib; ++i) {
    const double tau = ts.point(i);
    acc = acc + f(tau) * (ts.point(i + 1) - tau);
  }
  return acc;
}

template <class V>
V delta_integral(const GridFunction<V>& f, double a, double b) {
  return delta_integral(*f.system(), [&f](double t) { return f(t); }, a, b);
}

struct PeriodicityCheck {
  bool holds = true;
  double worst = 0.0;        // largest deviation encountered
  double worst_point = 0.0;  // where it happened
};

// Def. of a periodic function in shifts: f(delta_+/-^T(t)) = f(t).
template <class F>
PeriodicityCheck check_periodic_in_shifts(const ShiftSystem& sys, F&& f, double T,
                                          const std::vector<double>& sample,
                                          double tol = 1e-10) {
  PeriodicityCheck res;
  for (double t : sample) {
    for (ShiftDir d : {ShiftDir::plus, ShiftDir::minus}) {
      if (!sys.in_domain(d, T, t)) {
        res.holds = false;
        res.worst_point = t;
        return res;
      }
      const double dev = max_abs(f(sys.shift(d, T, t)) - f(t));
      if (dev > res.worst) {
        res.worst = dev;
        res.worst_point = t;
      }
    }
  }
  res.holds = res.worst <= tol;
  return res;
}

// Delta-periodicity in shifts: f(delta_+/-^T(t)) delta_+/-^{Delta T}(t) = f(t),
// the correct invariance for integrands.
template <class F>
PeriodicityCheck check_delta_periodic_in_shifts(const ShiftSystem& sys, F&& f, double T,
                                                const std::vector<double>& sample,
                                                double tol = 1e-10) {
  PeriodicityCheck res;
  for (double t : sample) {
    for (ShiftDir d : {ShiftDir::plus, ShiftDir::minus}) {
      if (!sys.in_domain(d, T, t)) {
        res.holds = false;
        res.worst_point = t;
        return res;
      }
      const double w = sys.delta_shift_derivative(d, T, t);
      const double dev = max_abs(f(sys.shift(d, T, t)) * w - f(t));
      if (dev > res.worst) {
        res.worst = dev;
        res.worst_point = t;
      }
    }
  }
  res.holds = res.worst <= tol;
  return res;
}

template <class V>
bool is_periodic_in_shifts(const GridFunction<V>& f, double T,
                           const std::vector<double>& sample, double tol = 1e-10) {
  return check_periodic_in_shifts(*f.system(), [&f](double t) { return f(t); }, T, sample,
                                  tol)
      .holds;
}

template <class V>
bool is_delta_periodic_in_shifts(const GridFunction<V>& f, double T,
                                 const std::vector<double>& sample, double tol = 1e-10) {
  return check_delta_periodic_in_shifts(*f.system(), [&f](double t) { return f(t); }, T,
                                        sample, tol)
      .holds;
}

// sample points covering `periods` windows on each side of the fundamental one
inline std::vector<double> periodicity_sample(const ShiftSystem& sys, double T,
                                              int periods = 2) {
  std::vector<double> pts;
  for (double w : sys.window_points(T))
    for (int k = -periods; k <= periods; ++k) pts.push_back(sys.iterate_shift(T, w, k));
  std::sort(pts.begin(), pts.end());
  return pts;
}

}  // namespace tshift
