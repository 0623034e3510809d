#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "tshift/shift_system.hpp"
#include "tshift/values.hpp"

namespace tshift {

// how values outside the fundamental window are produced
enum class Extension {
  none,            // finite support: evaluation outside the window is an error
  periodic,        // f(delta_+/-^T(t)) = f(t)
  delta_periodic,  // f(delta_+/-^T(t)) delta_+/-^{Delta T}(t) = f(t)
};

// Values on the fundamental window [t0, delta_+^T(t0))_T, extended everywhere
// by the chosen rule.  The computational stand-in for elements of P_T.
template <class V>
class GridFunction {
 public:
  GridFunction(ShiftSystemPtr sys, double T, std::vector<V> values, Extension ext)
      : sys_(std::move(sys)),
        T_(T),
        points_(sys_->window_points(T)),
        values_(std::move(values)),
        ext_(ext) {
    if (values_.size() != points_.size())
      throw InvariantError("grid function",
                           "value count does not match the window point count");
  }

  template <class F>
  static GridFunction sample(ShiftSystemPtr sys, double T, F&& fn, Extension ext) {
    std::vector<V> vals;
    auto pts = sys->window_points(T);
    vals.reserve(pts.size());
    for (double t : pts) vals.push_back(fn(t));
    return GridFunction(std::move(sys), T, std::move(vals), ext);
  }

  const ShiftSystemPtr& system() const { return sys_; }
  double period() const { return T_; }
  Extension extension() const { return ext_; }
  const std::vector<double>& points() const { return points_; }
  const std::vector<V>& values() const { return values_; }
  std::vector<V>& values() { return values_; }
  std::size_t size() const { return points_.size(); }

  const V& value_at(std::size_t slot) const { return values_.at(slot); }

  V operator()(double t) const {
    const auto [hat, k] = sys_->canonicalize(T_, t);
    const std::size_t slot = slot_of(hat);
    if (k == 0) return values_[slot];
    switch (ext_) {
      case Extension::none:
        throw OutOfDomainError("grid function has no extension beyond its window");
      case Extension::periodic:
        return values_[slot];
      case Extension::delta_periodic: {
        V v = values_[slot];
        double cur = hat;
        const ShiftDir dir = k > 0 ? ShiftDir::plus : ShiftDir::minus;
        for (long i = 0; i < (k > 0 ? k : -k); ++i) {
          v = v / sys_->delta_shift_derivative(dir, T_, cur);
          cur = sys_->shift(dir, T_, cur);
        }
        return v;
      }
    }
    throw OutOfDomainError("unreachable extension rule");
  }

  // the P_T norm: max over the (closed, by periodicity) window of |.|
  double norm() const {
    double m = 0.0;
    for (const auto& v : values_) m = std::max(m, max_abs(v));
    return m;
  }

 private:
  std::size_t slot_of(double hat) const {
    const Index i = sys_->scale().index_of(hat) - sys_->t0_index();
    if (i < 0 || static_cast<std::size_t>(i) >= points_.size())
      throw OutOfDomainError("canonicalized point escaped the window");
    return static_cast<std::size_t>(i);
  }

  ShiftSystemPtr sys_;
  double T_;
  std::vector<double> points_;
  std::vector<V> values_;
  Extension ext_;
};

using ScalarGridFunction = GridFunction<double>;
using VectorGridFunction = GridFunction<Eigen::VectorXd>;
using MatrixGridFunction = GridFunction<Eigen::MatrixXd>;

}  // namespace tshift
