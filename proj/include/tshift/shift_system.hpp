#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tshift/errors.hpp"
#include "tshift/timescale.hpp"

namespace tshift {

enum class ShiftDir { plus, minus };

// A time scale together with its forward/backward shift operators.
//
// The catalog scales all carry canonical shifts: shifting by the amount
// s = point(k) translates indices by k.  This reproduces the usual closed
// forms (t +/- s on lattices, s^{+/-1} t on geometric scales,
// (t^2 +/- s^2)^{1/2} on sqrt(N), index translation on {+/- n^2}) and keeps
// every shifted point exact.  Custom operator maps can be supplied instead;
// their outputs are snapped onto the scale, and a pair is outside D+/- when
// the raw output is not a scale point (or a user domain predicate rejects it).
//
// The initial point t0 defaults to the shift anchor point(0) but may be any
// scale point: the window, canonicalization and Theta machinery are anchored
// at t0 while the shift operators themselves stay those of the scale.
class ShiftSystem {
 public:
  struct CustomMaps {
    std::function<double(double, double)> plus;   // (s, t) -> raw coordinate
    std::function<double(double, double)> minus;
    std::function<bool(double, double)> plus_domain;   // optional extra domain cut
    std::function<bool(double, double)> minus_domain;
  };

  explicit ShiftSystem(TimeScale scale, std::optional<double> t0 = std::nullopt,
                       std::optional<double> period = std::nullopt)
      : scale_(std::move(scale)) {
    init(t0, period);
  }

  ShiftSystem(TimeScale scale, CustomMaps maps, std::optional<double> t0 = std::nullopt,
              std::optional<double> period = std::nullopt)
      : scale_(std::move(scale)), custom_(std::move(maps)) {
    init(t0, period);
  }

  const TimeScale& scale() const { return scale_; }
  double t0() const { return t0_; }
  Index t0_index() const { return t0_idx_; }
  std::optional<double> period() const { return period_; }
  bool canonical_shifts() const { return !custom_.has_value(); }

  double sigma(double t) const { return scale_.sigma(t); }
  double rho(double t) const { return scale_.rho(t); }
  double mu(double t) const { return scale_.mu(t); }

  bool in_domain(ShiftDir dir, double s, double t) const {
    return try_shift(dir, s, t).has_value();
  }
  bool in_domain_plus(double s, double t) const { return in_domain(ShiftDir::plus, s, t); }
  bool in_domain_minus(double s, double t) const { return in_domain(ShiftDir::minus, s, t); }

  double shift(ShiftDir dir, double s, double t) const {
    if (auto v = try_shift(dir, s, t)) return *v;
    throw OutOfDomainError("(" + std::to_string(s) + ", " + std::to_string(t) + ") is not in D" +
                           (dir == ShiftDir::plus ? "+" : "-"));
  }
  double shift_plus(double s, double t) const { return shift(ShiftDir::plus, s, t); }
  double shift_minus(double s, double t) const { return shift(ShiftDir::minus, s, t); }

  std::optional<double> try_shift(ShiftDir dir, double s, double t) const {
    const auto s_idx = scale_.find_index(s);
    const auto t_idx = scale_.find_index(t);
    if (!s_idx || !t_idx) return std::nullopt;
    if (*s_idx < 0) return std::nullopt;  // shift amounts live in [anchor, infinity)
    if (custom_) {
      const auto& dom = dir == ShiftDir::plus ? custom_->plus_domain : custom_->minus_domain;
      if (dom && !dom(s, t)) return std::nullopt;
      const auto& map = dir == ShiftDir::plus ? custom_->plus : custom_->minus;
      const double raw = map(s, t);
      const auto out = scale_.find_index(raw);
      if (!out) return std::nullopt;
      return scale_.point(*out);
    }
    const Index target = dir == ShiftDir::plus ? *t_idx + *s_idx : *t_idx - *s_idx;
    if (!scale_.has_index(target)) return std::nullopt;
    return scale_.point(target);
  }

  // delta_+^{(k)}(T, t) for k >= 0, delta_-^{(|k|)}(T, t) for k < 0
  double iterate_shift(double T, double t, long k) const {
    const ShiftDir dir = k >= 0 ? ShiftDir::plus : ShiftDir::minus;
    double cur = scale_.canonical(t);
    for (long i = 0; i < std::labs(k); ++i) cur = shift(dir, T, cur);
    return cur;
  }

  // Reduces t into the fundamental window [t0, delta_+^T(t0)) and reports the
  // winding count k with t = delta_+^{(k)}(T, t_hat).
  std::pair<double, long> canonicalize(double T, double t) const {
    const Index i = scale_.index_of(t);
    const Index i0 = t0_idx_;
    if (canonical_shifts()) {
      const Index beta = window_span(T);
      Index d = i - i0;
      Index k = d >= 0 ? d / beta : -((-d + beta - 1) / beta);
      return {scale_.point(i0 + (d - k * beta)), static_cast<long>(k)};
    }
    const double end = shift_plus(T, t0_);
    const Index end_idx = scale_.index_of(end);
    double cur = scale_.point(i);
    long k = 0;
    long guard = 0;
    while (scale_.index_of(cur) >= end_idx) {
      cur = shift_minus(T, cur);
      ++k;
      if (++guard > kWindingGuard) throw OutOfDomainError("canonicalize did not terminate");
    }
    while (scale_.index_of(cur) < i0) {
      cur = shift_plus(T, cur);
      --k;
      if (++guard > kWindingGuard) throw OutOfDomainError("canonicalize did not terminate");
    }
    return {cur, k};
  }

  // delta_+^T(t0), the right end of the fundamental window
  double window_end(double T) const { return shift_plus(T, t0_); }

  // index span of one T-shift (number of isolated steps per window)
  Index window_span(double T) const {
    const Index span = scale_.index_of(window_end(T)) - t0_idx_;
    if (span < 1)
      throw InvariantError("function period",
                           "delta_+^T(t0) must exceed t0 (T = " + std::to_string(T) + ")");
    return span;
  }

  // the points of [t0, delta_+^T(t0))_T in ascending order
  std::vector<double> window_points(double T) const {
    const Index span = window_span(T);
    std::vector<double> pts;
    pts.reserve(static_cast<std::size_t>(span));
    for (Index j = 0; j < span; ++j) pts.push_back(scale_.point(t0_idx_ + j));
    return pts;
  }

  // delta_{+/-}^{Delta T}(t) = (delta^T(sigma(t)) - delta^T(t)) / mu(t)
  double delta_shift_derivative(ShiftDir dir, double T, double t) const {
    const double st = sigma(t);
    return (shift(dir, T, st) - shift(dir, T, t)) / mu(t);
  }

 private:
  static constexpr long kWindingGuard = 1'000'000;

  void init(std::optional<double> t0, std::optional<double> period) {
    t0_idx_ = t0 ? scale_.index_of(*t0) : (scale_.has_index(0) ? 0 : scale_.min_index());
    t0_ = scale_.point(t0_idx_);
    if (period) {
      period_ = scale_.canonical(*period);
      if (!(*period_ > t0_))
        throw InvariantError("scale period", "P must lie in (t0, infinity)");
    } else if (!custom_ && scale_.two_sided() && scale_.has_index(1) &&
               scale_.point(1) > t0_) {
      period_ = scale_.point(1);  // smallest shift admissible for every point
    }
  }

  TimeScale scale_;
  std::optional<CustomMaps> custom_;
  Index t0_idx_ = 0;
  double t0_ = 0.0;
  std::optional<double> period_;
};

using ShiftSystemPtr = std::shared_ptr<const ShiftSystem>;

// catalog constructors with their table shifts and default periods

inline ShiftSystemPtr make_integer_system(double step = 1.0, double offset = 0.0,
                                          std::optional<double> t0 = std::nullopt) {
  return std::make_shared<ShiftSystem>(TimeScale::integer_lattice(step, offset), t0);
}

inline ShiftSystemPtr make_geometric_system(double q,
                                            std::optional<double> t0 = std::nullopt) {
  return std::make_shared<ShiftSystem>(TimeScale::geometric(q), t0);
}

inline ShiftSystemPtr make_power_system(double base,
                                        std::optional<double> t0 = std::nullopt) {
  return std::make_shared<ShiftSystem>(TimeScale::power(base), t0);
}

inline ShiftSystemPtr make_sqrt_system() {
  return std::make_shared<ShiftSystem>(TimeScale::sqrt_naturals());
}

inline ShiftSystemPtr make_signed_squares_system() {
  return std::make_shared<ShiftSystem>(TimeScale::signed_squares(), std::nullopt, 1.0);
}

// The bounded scale {q^n / (1 + q^n)} with the closed-form log shifts; only
// the shift-axiom machinery uses it.
inline ShiftSystemPtr make_bounded_ratio_system(double q) {
  if (!(q > 1)) throw InvariantError("timescale", "bounded ratio scale needs q > 1");
  auto point = [q](Index n) { return 1.0 / (1.0 + std::pow(q, -static_cast<double>(n))); };
  const double lq = std::log(q);
  auto shifted = [q, lq](double s, double t, double sign) {
    const double e = (std::log(t / (1.0 - t)) + sign * std::log(s / (1.0 - s))) / lq;
    return 1.0 / (1.0 + std::pow(q, -e));
  };
  ShiftSystem::CustomMaps maps;
  maps.plus = [shifted](double s, double t) { return shifted(s, t, +1.0); };
  maps.minus = [shifted](double s, double t) { return shifted(s, t, -1.0); };
  return std::make_shared<ShiftSystem>(TimeScale::custom(point), std::move(maps), std::nullopt,
                                       q / (1.0 + q));
}

}  // namespace tshift
