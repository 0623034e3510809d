#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>

#include "tshift/errors.hpp"

namespace tshift {

using Index = std::int64_t;

inline constexpr double kPointRelTol = 1e-12;

inline bool approx_equal(double a, double b, double tol = kPointRelTol) {
  const double scale = std::max({1.0, std::abs(a), std::abs(b)});
  return std::abs(a - b) <= tol * scale;
}

enum class ScaleKind {
  integer_lattice,   // {offset + n h : n}
  geometric,         // {q^n : n}, q > 1
  power,             // {b^n : n}, b > 1 (0 is a cluster point, not represented)
  sqrt_naturals,     // {sqrt(n) : n >= 0}
  signed_squares,    // {sign(n) n^2 : n}
  custom_monotone,   // caller-supplied strictly increasing index -> point map
};

std::string to_string(ScaleKind kind);

// An isolated time scale addressed by integer index.  Index 0 is the scale's
// anchor point (the t0 of the catalog shift operators); all arithmetic on
// points goes through the index map so sigma, mu and the shifts are exact.
class TimeScale {
 public:
  static constexpr Index kUnboundedLo = std::numeric_limits<Index>::min() / 4;
  static constexpr Index kUnboundedHi = std::numeric_limits<Index>::max() / 4;

  static TimeScale integer_lattice(double step = 1.0, double offset = 0.0) {
    if (!(step > 0)) throw InvariantError("timescale", "integer lattice step must be > 0");
    TimeScale ts(ScaleKind::integer_lattice);
    ts.p0_ = offset;
    ts.p1_ = step;
    return ts;
  }

  static TimeScale geometric(double q) {
    if (!(q > 1)) throw InvariantError("timescale", "geometric ratio must be > 1");
    TimeScale ts(ScaleKind::geometric);
    ts.p1_ = q;
    return ts;
  }

  static TimeScale power(double base) {
    if (!(base > 1)) throw InvariantError("timescale", "power base must be > 1");
    TimeScale ts(ScaleKind::power);
    ts.p1_ = base;
    return ts;
  }

  static TimeScale sqrt_naturals() {
    TimeScale ts(ScaleKind::sqrt_naturals);
    ts.lo_ = 0;
    return ts;
  }

  static TimeScale signed_squares() { return TimeScale(ScaleKind::signed_squares); }

  static TimeScale custom(std::function<double(Index)> point_fn,
                          Index lo = kUnboundedLo, Index hi = kUnboundedHi) {
    TimeScale ts(ScaleKind::custom_monotone);
    ts.point_fn_ = std::move(point_fn);
    ts.lo_ = lo;
    ts.hi_ = hi;
    return ts;
  }

  ScaleKind kind() const { return kind_; }
  Index min_index() const { return lo_; }
  Index max_index() const { return hi_; }
  bool has_index(Index n) const { return n >= lo_ && n <= hi_; }
  bool two_sided() const { return lo_ == kUnboundedLo && hi_ == kUnboundedHi; }

  // integer lattice parameters (offset, step); geometric/power ratio
  double offset() const { return p0_; }
  double step_or_ratio() const { return p1_; }

  double point(Index n) const {
    if (!has_index(n))
      throw OutOfDomainError("index " + std::to_string(n) + " outside the scale's index range");
    switch (kind_) {
      case ScaleKind::integer_lattice:
        return p0_ + static_cast<double>(n) * p1_;
      case ScaleKind::geometric:
      case ScaleKind::power:
        return std::pow(p1_, static_cast<double>(n));
      case ScaleKind::sqrt_naturals:
        return std::sqrt(static_cast<double>(n));
      case ScaleKind::signed_squares: {
        const double m = static_cast<double>(n < 0 ? -n : n);
        return n < 0 ? -m * m : m * m;
      }
      case ScaleKind::custom_monotone:
        return point_fn_(n);
    }
    throw OutOfDomainError("unreachable scale kind");
  }

  // Resolves a coordinate to its index, nullopt when the value is not a scale
  // point (relative tolerance kPointRelTol against the canonical coordinate).
  std::optional<Index> find_index(double value) const {
    if (!std::isfinite(value)) return std::nullopt;
    Index cand = 0;
    switch (kind_) {
      case ScaleKind::integer_lattice:
        cand = llround_checked((value - p0_) / p1_);
        break;
      case ScaleKind::geometric:
      case ScaleKind::power:
        if (!(value > 0)) return std::nullopt;
        cand = llround_checked(std::log(value) / std::log(p1_));
        break;
      case ScaleKind::sqrt_naturals:
        if (value < 0) return std::nullopt;
        cand = llround_checked(value * value);
        break;
      case ScaleKind::signed_squares: {
        const Index m = llround_checked(std::sqrt(std::abs(value)));
        cand = value < 0 ? -m : m;
        break;
      }
      case ScaleKind::custom_monotone:
        return find_index_monotone(value);
    }
    for (Index n = cand - 1; n <= cand + 1; ++n)
      if (has_index(n) && approx_equal(point(n), value)) return n;
    return std::nullopt;
  }

  bool contains(double value) const { return find_index(value).has_value(); }

  Index index_of(double value) const {
    if (auto n = find_index(value)) return *n;
    throw NotInScaleError(value);
  }

  // Snaps a coordinate to the canonical value of the point it designates.
  double canonical(double value) const { return point(index_of(value)); }

  double sigma(double t) const {
    const Index n = index_of(t);
    if (!has_index(n + 1)) throw NoSuccessorError(t);
    return point(n + 1);
  }

  double rho(double t) const {
    const Index n = index_of(t);
    if (!has_index(n - 1)) throw NoPredecessorError(t);
    return point(n - 1);
  }

  double mu(double t) const {
    const Index n = index_of(t);
    if (!has_index(n + 1)) throw NoSuccessorError(t);
    return point(n + 1) - point(n);
  }

 private:
  explicit TimeScale(ScaleKind kind) : kind_(kind) {}

  static Index llround_checked(double x) {
    if (!(std::abs(x) < 9.0e18)) return 0;  // far outside any usable index range
    return static_cast<Index>(std::llround(x));
  }

  std::optional<Index> find_index_monotone(double value) const {
    // gallop out from 0 until the value is bracketed, then bisect
    Index lo = lo_ > 0 ? lo_ : (hi_ < 0 ? hi_ : 0);
    Index hi = lo;
    Index step = 1;
    while (lo > lo_ && point_fn_(lo) > value) {
      lo = (lo - lo_ > step) ? lo - step : lo_;
      if (step < (Index(1) << 40)) step *= 2;
    }
    step = 1;
    while (hi < hi_ && point_fn_(hi) < value) {
      hi = (hi_ - hi > step) ? hi + step : hi_;
      if (step < (Index(1) << 40)) step *= 2;
    }
    while (lo < hi) {
      const Index mid = lo + (hi - lo) / 2;
      if (point_fn_(mid) < value)
        lo = mid + 1;
      else
        hi = mid;
    }
    for (Index n = lo - 1; n <= lo + 1; ++n)
      if (has_index(n) && approx_equal(point_fn_(n), value)) return n;
    return std::nullopt;
  }

  ScaleKind kind_;
  double p0_ = 0.0;
  double p1_ = 1.0;
  Index lo_ = kUnboundedLo;
  Index hi_ = kUnboundedHi;
  std::function<double(Index)> point_fn_;
};

inline std::string to_string(ScaleKind kind) {
  switch (kind) {
    case ScaleKind::integer_lattice: return "integer";
    case ScaleKind::geometric: return "geometric";
    case ScaleKind::power: return "power";
    case ScaleKind::sqrt_naturals: return "sqrt";
    case ScaleKind::signed_squares: return "signed_squares";
    case ScaleKind::custom_monotone: return "custom";
  }
  return "?";
}

}  // namespace tshift
