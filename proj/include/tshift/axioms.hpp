#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tshift/random.hpp"
#include "tshift/shift_system.hpp"

namespace tshift {

// Sampled (s, t) pairs fed to the axiom checker.  The deterministic default
// covers a lattice of index pairs spanning a few periods around the initial
// point plus a fixed-seed batch of random pairs.
struct ShiftSample {
  std::vector<std::pair<double, double>> pairs;

  static ShiftSample deterministic(const ShiftSystem& sys, int periods = 3,
                                   int random_pairs = 64,
                                   std::uint64_t seed = kDefaultSeed) {
    const TimeScale& ts = sys.scale();
    Index beta = 1;
    if (auto P = sys.period()) beta = std::max<Index>(1, ts.index_of(*P));
    const Index span = beta * periods;
    const Index s_lo = 0;
    const Index s_hi = span;
    const Index t_lo = std::max(ts.min_index(), sys.t0_index() - span);
    const Index t_hi = std::min(ts.max_index(), sys.t0_index() + span);

    ShiftSample sample;
    for (Index si = s_lo; si <= s_hi; ++si)
      for (Index ti = t_lo; ti <= t_hi; ++ti)
        sample.pairs.emplace_back(ts.point(si), ts.point(ti));

    Rng rng(seed);
    const Index rs_hi = 2 * span;
    const Index rt_lo = std::max(ts.min_index(), sys.t0_index() - 2 * span);
    const Index rt_hi = std::min(ts.max_index(), sys.t0_index() + 2 * span);
    for (int i = 0; i < random_pairs; ++i) {
      const Index si = rng.uniform_int(0, rs_hi);
      const Index ti = rng.uniform_int(rt_lo, rt_hi);
      sample.pairs.emplace_back(ts.point(si), ts.point(ti));
    }
    return sample;
  }
};

struct AxiomCheck {
  std::string id;
  std::string summary;
  std::size_t checked = 0;
  bool passed = true;
  std::vector<double> counterexample;  // the (s, t[, u]) instance that failed
  std::string note;

  void fail(std::initializer_list<double> witness, const std::string& why) {
    if (passed) {
      passed = false;
      counterexample.assign(witness);
      note = why;
    }
  }
};

struct AxiomReport {
  std::vector<AxiomCheck> checks;

  bool all_passed() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const AxiomCheck& c) { return c.passed; });
  }
  const AxiomCheck& operator[](const std::string& id) const {
    for (const auto& c : checks)
      if (c.id == id) return c;
    throw std::out_of_range("no axiom check named " + id);
  }
};

namespace detail {

inline bool points_equal(double a, double b) { return approx_equal(a, b); }

}  // namespace detail

// Checks the defining shift-operator properties P1-P5 and the derived
// identities L1-L10 on the sampled pairs.  Failures are data: each check
// records the first counterexample.  L8 is verified as discrete positivity of
// the delta derivative of delta_+ in its second slot.
inline AxiomReport verify_shift_axioms(const ShiftSystem& sys, const ShiftSample& sample,
                                       std::size_t max_triples = 40000) {
  const double t0 = sys.t0();
  AxiomReport rep;
  auto add = [&rep](const std::string& id, const std::string& summary) -> AxiomCheck& {
    rep.checks.push_back({id, summary});
    return rep.checks.back();
  };

  auto in_dom = [&sys](ShiftDir d, double s, double t) { return sys.in_domain(d, s, t); };
  auto sh = [&sys](ShiftDir d, double s, double t) { return sys.shift(d, s, t); };

  // group sample by shift amount and by point for the monotonicity checks
  std::map<double, std::vector<double>> by_s, by_t;
  for (const auto& [s, t] : sample.pairs) {
    by_s[s].push_back(t);
    by_t[t].push_back(s);
  }
  for (auto& [s, ts] : by_s) {
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  }
  for (auto& [t, ss] : by_t) {
    std::sort(ss.begin(), ss.end());
    ss.erase(std::unique(ss.begin(), ss.end()), ss.end());
  }

  {  // P1: strict monotonicity in the second argument
    auto& c = add("P1", "delta_+/- strictly increasing in t");
    for (const auto& [s, ts] : by_s) {
      for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
        const double t = ts[i], u = ts[i + 1];
        if (s > t) continue;
        for (ShiftDir d : {ShiftDir::plus, ShiftDir::minus}) {
          if (!in_dom(d, s, t) || !in_dom(d, s, u)) continue;
          ++c.checked;
          if (!(sh(d, s, t) < sh(d, s, u)))
            c.fail({s, t, u}, "delta(s,t) >= delta(s,u) although t < u");
        }
      }
    }
  }

  {  // P2: monotonicity in the shift amount
    auto& c = add("P2", "delta_- decreasing / delta_+ increasing in s");
    for (const auto& [t, ss] : by_t) {
      for (std::size_t i = 0; i + 1 < ss.size(); ++i) {
        const double s1 = ss[i], s2 = ss[i + 1];
        if (in_dom(ShiftDir::minus, s1, t) && in_dom(ShiftDir::minus, s2, t)) {
          ++c.checked;
          if (!(sh(ShiftDir::minus, s1, t) > sh(ShiftDir::minus, s2, t)))
            c.fail({s1, s2, t}, "delta_-(s1,t) <= delta_-(s2,t) although s1 < s2");
        }
        if (in_dom(ShiftDir::plus, s1, t) && in_dom(ShiftDir::plus, s2, t)) {
          ++c.checked;
          if (!(sh(ShiftDir::plus, s1, t) < sh(ShiftDir::plus, s2, t)))
            c.fail({s1, s2, t}, "delta_+(s1,t) >= delta_+(s2,t) although s1 < s2");
        }
      }
    }
  }

  {  // P3: delta_+(t, t0) = t and delta_+(t0, t) = t
    auto& c = add("P3", "t0 is neutral: delta_+(t,t0) = t, delta_+(t0,t) = t");
    for (const auto& [s, t] : sample.pairs) {
      if (s >= t0) {
        ++c.checked;
        if (!in_dom(ShiftDir::plus, s, t0) || !detail::points_equal(sh(ShiftDir::plus, s, t0), s))
          c.fail({s, t0}, "delta_+(t,t0) != t");
      }
      ++c.checked;
      if (!in_dom(ShiftDir::plus, t0, t) || !detail::points_equal(sh(ShiftDir::plus, t0, t), t))
        c.fail({t0, t}, "delta_+(t0,t) != t");
    }
  }

  {  // P4: delta_-(s, delta_+(s,t)) = t and vice versa
    auto& c = add("P4", "delta_-/+ (s, .) invert each other");
    for (const auto& [s, t] : sample.pairs) {
      for (ShiftDir d : {ShiftDir::plus, ShiftDir::minus}) {
        if (!in_dom(d, s, t)) continue;
        const ShiftDir od = d == ShiftDir::plus ? ShiftDir::minus : ShiftDir::plus;
        const double v = sh(d, s, t);
        ++c.checked;
        if (!in_dom(od, s, v) || !detail::points_equal(sh(od, s, v), t))
          c.fail({s, t}, "delta_{-/+}(s, delta_{+/-}(s,t)) != t");
      }
    }
  }

  // triples for P5 and L9, capped
  std::vector<std::array<double, 3>> triples;  // (s, u, t)
  {
    std::vector<double> amounts;
    for (const auto& [s, ts] : by_s) amounts.push_back(s);
    for (const auto& s : amounts) {
      for (const auto& u : amounts) {
        for (const auto& [t, ss] : by_t) {
          if (triples.size() >= max_triples) break;
          triples.push_back({s, u, t});
        }
      }
    }
  }

  {  // P5: delta_-(u, delta_+(s,t)) = delta_+(s, delta_-(u,t)) and the mirror
    auto& c = add("P5", "shifts in opposite directions commute");
    for (const auto& [s, u, t] : triples) {
      for (ShiftDir d : {ShiftDir::plus, ShiftDir::minus}) {
        const ShiftDir od = d == ShiftDir::plus ? ShiftDir::minus : ShiftDir::plus;
        if (!in_dom(d, s, t)) continue;
        const double v = sh(d, s, t);
        if (!in_dom(od, u, v) || !in_dom(od, u, t)) continue;
        ++c.checked;
        const double lhs = sh(od, u, v);
        if (!in_dom(d, s, sh(od, u, t)) ||
            !detail::points_equal(lhs, sh(d, s, sh(od, u, t))))
          c.fail({s, u, t}, "delta_{-/+}(u, delta_{+/-}(s,t)) != delta_{+/-}(s, delta_{-/+}(u,t))");
      }
    }
  }

  {  // L1: delta_-(t, t) = t0
    auto& c = add("L1", "delta_-(t,t) = t0 on [t0, infinity)");
    for (const auto& [t, ss] : by_t) {
      (void)ss;
      if (t < t0) continue;
      ++c.checked;
      if (!in_dom(ShiftDir::minus, t, t) || !detail::points_equal(sh(ShiftDir::minus, t, t), t0))
        c.fail({t, t}, "delta_-(t,t) != t0");
    }
  }

  {  // L2: delta_-(t0, t) = t
    auto& c = add("L2", "delta_-(t0,t) = t");
    for (const auto& [t, ss] : by_t) {
      (void)ss;
      ++c.checked;
      if (!in_dom(ShiftDir::minus, t0, t) || !detail::points_equal(sh(ShiftDir::minus, t0, t), t))
        c.fail({t0, t}, "delta_-(t0,t) != t");
    }
  }

  {  // L3: delta_+(s,t) = u  <=>  delta_-(s,u) = t
    auto& c = add("L3", "forward and backward images correspond");
    for (const auto& [s, t] : sample.pairs) {
      if (in_dom(ShiftDir::plus, s, t)) {
        const double u = sh(ShiftDir::plus, s, t);
        ++c.checked;
        if (!in_dom(ShiftDir::minus, s, u) || !detail::points_equal(sh(ShiftDir::minus, s, u), t))
          c.fail({s, t}, "delta_+(s,t)=u but delta_-(s,u) != t");
      }
      if (in_dom(ShiftDir::minus, s, t)) {
        const double v = sh(ShiftDir::minus, s, t);
        ++c.checked;
        if (!in_dom(ShiftDir::plus, s, v) || !detail::points_equal(sh(ShiftDir::plus, s, v), t))
          c.fail({s, t}, "delta_-(s,u)=t but delta_+(s,t) != u");
      }
    }
  }

  {  // L4: delta_+(t, delta_-(s,t0)) = delta_-(s,t)
    auto& c = add("L4", "delta_+(t, delta_-(s,t0)) = delta_-(s,t)");
    for (const auto& [s, t] : sample.pairs) {
      if (t < t0) continue;
      if (!in_dom(ShiftDir::plus, s, t) || !in_dom(ShiftDir::minus, s, t0) ||
          !in_dom(ShiftDir::minus, s, t))
        continue;
      const double w = sh(ShiftDir::minus, s, t0);
      if (!in_dom(ShiftDir::plus, t, w)) continue;
      ++c.checked;
      if (!detail::points_equal(sh(ShiftDir::plus, t, w), sh(ShiftDir::minus, s, t)))
        c.fail({s, t}, "delta_+(t, delta_-(s,t0)) != delta_-(s,t)");
    }
  }

  {  // L5: delta_+ is symmetric on [t0, infinity)^2
    auto& c = add("L5", "delta_+(u,t) = delta_+(t,u)");
    for (const auto& [s, t] : sample.pairs) {
      if (s < t0 || t < t0) continue;
      if (!in_dom(ShiftDir::plus, s, t)) continue;
      ++c.checked;
      if (!in_dom(ShiftDir::plus, t, s) ||
          !detail::points_equal(sh(ShiftDir::plus, s, t), sh(ShiftDir::plus, t, s)))
        c.fail({s, t}, "delta_+(u,t) != delta_+(t,u)");
    }
  }

  {  // L6: delta_+ maps [t0, infinity) into itself
    auto& c = add("L6", "delta_+(s,t) >= t0 for t >= t0");
    for (const auto& [s, t] : sample.pairs) {
      if (t < t0 || !in_dom(ShiftDir::plus, s, t)) continue;
      ++c.checked;
      if (sh(ShiftDir::plus, s, t) < t0) c.fail({s, t}, "delta_+(s,t) < t0");
    }
  }

  {  // L7: delta_-(s,t) >= t0 whenever t >= s
    auto& c = add("L7", "delta_-(s,t) >= t0 for t >= s");
    for (const auto& [s, t] : sample.pairs) {
      if (t < s || !in_dom(ShiftDir::minus, s, t)) continue;
      ++c.checked;
      if (sh(ShiftDir::minus, s, t) < t0) c.fail({s, t}, "delta_-(s,t) < t0");
    }
  }

  {  // L8: discrete positivity of the delta derivative of delta_+(s, .)
    auto& c = add("L8", "delta_+^{Delta_t}(s,.) > 0 (discrete quotient)");
    for (const auto& [s, t] : sample.pairs) {
      if (!sys.scale().has_index(sys.scale().index_of(t) + 1)) continue;
      const double st = sys.sigma(t);
      if (!in_dom(ShiftDir::plus, s, t) || !in_dom(ShiftDir::plus, s, st)) continue;
      ++c.checked;
      const double q = (sh(ShiftDir::plus, s, st) - sh(ShiftDir::plus, s, t)) / sys.mu(t);
      if (!(q > 0)) c.fail({s, t}, "difference quotient of delta_+(s,.) not positive");
    }
  }

  {  // L9: delta_+(delta_-(u,s), delta_-(s,v)) = delta_-(u,v)
    auto& c = add("L9", "backward shifts compose through delta_+");
    for (const auto& [s, u, v] : triples) {
      if (v < s || s < u) continue;
      if (!in_dom(ShiftDir::minus, s, v) || !in_dom(ShiftDir::minus, u, s) ||
          !in_dom(ShiftDir::minus, u, v))
        continue;
      const double a = sh(ShiftDir::minus, u, s);
      const double b = sh(ShiftDir::minus, s, v);
      if (a < t0 || !in_dom(ShiftDir::plus, a, b)) continue;
      ++c.checked;
      if (!detail::points_equal(sh(ShiftDir::plus, a, b), sh(ShiftDir::minus, u, v)))
        c.fail({s, u, v}, "delta_+(delta_-(u,s), delta_-(s,v)) != delta_-(u,v)");
    }
  }

  {  // L10: delta_-(s,t) = t0 forces s = t
    auto& c = add("L10", "delta_-(s,t) = t0 only when s = t");
    for (const auto& [s, t] : sample.pairs) {
      if (!in_dom(ShiftDir::minus, s, t)) continue;
      ++c.checked;
      if (detail::points_equal(sh(ShiftDir::minus, s, t), t0) && !detail::points_equal(s, t))
        c.fail({s, t}, "delta_-(s,t) = t0 with s != t");
    }
  }

  return rep;
}

struct PeriodReport {
  double P = 0.0;
  bool ok = false;
  std::size_t checked = 0;
  std::string failure;  // empty when ok
  std::vector<double> counterexample;
};

// Def-3.2 style verification of a declared scale period: (P,t) must lie in
// both domains for every sampled t and the sigma-commutation identity
// delta_{+/-}(P, sigma(t)) = sigma(delta_{+/-}(P, t)) must hold exactly.
inline PeriodReport verify_period(const ShiftSystem& sys, double P,
                                  const std::vector<double>& sample_points) {
  PeriodReport rep;
  rep.P = P;
  if (!sys.scale().contains(P) || !(P > sys.t0())) {
    rep.failure = "P must be a scale point in (t0, infinity)";
    return rep;
  }
  for (double t : sample_points) {
    ++rep.checked;
    if (!sys.in_domain_minus(P, t) || !sys.in_domain_plus(P, t)) {
      rep.failure = "(P,t) outside D-/D+";
      rep.counterexample = {P, t};
      return rep;
    }
    const Index n = sys.scale().index_of(t);
    if (!sys.scale().has_index(n + 1)) continue;
    const double st = sys.sigma(t);
    for (ShiftDir d : {ShiftDir::plus, ShiftDir::minus}) {
      if (!sys.in_domain(d, P, st)) {
        rep.failure = "(P, sigma(t)) outside domain";
        rep.counterexample = {P, st};
        return rep;
      }
      const double lhs = sys.shift(d, P, st);
      const double shifted = sys.shift(d, P, t);
      if (!sys.scale().has_index(sys.scale().index_of(shifted) + 1)) continue;
      if (!approx_equal(lhs, sys.sigma(shifted))) {
        rep.failure = "delta(P, sigma(t)) != sigma(delta(P, t))";
        rep.counterexample = {P, t};
        return rep;
      }
    }
  }
  rep.ok = true;
  return rep;
}

// default sample points for verify_period: the t-components of the pair sample
inline std::vector<double> period_sample_points(const ShiftSystem& sys, int periods = 3,
                                                int random_points = 64,
                                                std::uint64_t seed = kDefaultSeed) {
  auto sample = ShiftSample::deterministic(sys, periods, random_points, seed);
  std::vector<double> pts;
  pts.reserve(sample.pairs.size());
  for (const auto& [s, t] : sample.pairs) {
    (void)s;
    pts.push_back(t);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

}  // namespace tshift
