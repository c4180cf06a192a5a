#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nfl/errors.hpp"
#include "nfl/ifs.hpp"
#include "nfl/noise.hpp"
#include "nfl/rational.hpp"
#include "nfl/rng.hpp"
#include "nfl/simulate.hpp"

namespace nfl {

// Orbit state of the tent map. The position is exact rational on purpose:
// iterating x -> 2x in binary floating point is exact arithmetic on a dyadic
// value, so every double orbit drains to 0 within ~53 steps and the map only
// looks ergodic. Rational state has no such horizon, and the tent map never
// grows a denominator.
struct TentState {
  Rational x;
  int iterate_index = 0;
};

inline TentState tent_step(const TentState& state) {
  return TentState{tent_step(state.x), state.iterate_index + 1};
}

// Diagnostic-only floating iterate. Both branches are exact in binary
// floating point, which is precisely the problem: the orbit is dyadic
// arithmetic that absorbs at 0 within the mantissa width. Anything that
// matters runs on the rational form above.
inline double tent_step(double x) { return x < 0.5 ? 2.0 * x : 2.0 * (1.0 - x); }

// Window length and trigger interval of the forced-kick argument: once the
// orbit lands in (0, a) with a = 2^-(n0+1), the next n0 positions stay below
// 1/2 and every kick is the negative one.
struct TruncationBounds {
  int n0 = 0;
  Rational a;
  ConditionReport condition;
};

namespace detail {

// Integer part with a guard: log-ratio values within 1e-12 of an integer are
// snapped to it before flooring, so "sufficient" window lengths never come
// out one short through rounding.
inline int guarded_integer_part(double value) {
  const double rounded = std::round(value);
  if (std::abs(value - rounded) <= 1e-12) return static_cast<int>(rounded);
  return static_cast<int>(std::floor(value));
}

inline void require_tent_condition(double xi_max, double epsilon) {
  const double lhs = xi_max + epsilon / (1.0 - xi_max);
  if (!(lhs < 1.0)) {
    throw ChaosConditionViolated(
        "xi_max + epsilon/(1 - xi_max) = " + std::to_string(lhs) +
        " is not below 1");
  }
}

}  // namespace detail

inline TruncationBounds compute_n0(double xi_max, double epsilon) {
  if (!(xi_max > 0.0) || !(xi_max < 1.0)) throw BadParameters("xi_max must lie in (0,1)");
  if (!(epsilon > 0.0) || !(epsilon < 1.0)) throw BadParameters("epsilon must lie in (0,1)");
  detail::require_tent_condition(xi_max, epsilon);

  const double ratio = std::log(1.0 + (1.0 / xi_max - 1.0) / epsilon) / std::log(1.0 / xi_max);
  TruncationBounds bounds;
  bounds.n0 = detail::guarded_integer_part(ratio) + 1;
  if (bounds.n0 < 1 || bounds.n0 + 1 >= 62) {
    throw BadParameters("window length n0 = " + std::to_string(bounds.n0) +
                        " outside the supported range");
  }
  bounds.a = Rational(1, std::int64_t(1) << (bounds.n0 + 1));
  bounds.condition.holds = true;
  bounds.condition.lhs = xi_max + epsilon / (1.0 - xi_max);
  bounds.condition.rhs = 1.0;
  bounds.condition.description = "xi_max + epsilon/(1 - xi_max) < 1";
  return bounds;
}

// Kicks needed after the orbit enters the trigger interval, as a function of
// the surviving diameter prod_k + N_k at the hitting time. Always below n0
// for noise terms the dynamics can actually produce.
inline int compute_l(double prod_k, double n_k, double xi_max, double epsilon) {
  const double survivor = prod_k + n_k;
  if (!(survivor > 0.0) || !(survivor < 1.0)) {
    throw InvalidState("compute_l needs prod_k + N_k in (0,1), got " +
                       std::to_string(survivor));
  }
  detail::require_tent_condition(xi_max, epsilon);
  const double ratio =
      std::log(1.0 + (1.0 / xi_max - 1.0) / epsilon * survivor) / std::log(1.0 / xi_max);
  return detail::guarded_integer_part(ratio) + 1;
}

enum class TruncationStatus {
  Truncated,         // collapse (or merge, per variant) at a finite stage
  SurvivedNoHit,     // orbit never entered (0,a); excluded from bound stats
  SurvivedAfterHit,  // entered (0,a) but did not truncate: bound violation
};

struct ChaosTraceRow {
  int stage = 0;
  Rational x;  // orbit position whose sign decision produced this stage's kick
  double delta = 0.0;
  double diameter = 0.0;
  double noise_term = 0.0;
  double product = 0.0;
};

struct TruncationReport {
  Rational x0;
  TentVariant variant = TentVariant::Collapse;
  int n0 = 0;
  Rational a;
  std::optional<int> hit_stage;       // k: first index n >= 0 with x_n in (0,a)
  std::optional<int> collapse_stage;  // truncation stage (collapse or merge)
  std::optional<int> l_used;          // collapse_stage - hit_stage when both exist
  bool bound_satisfied = false;
  TruncationStatus status = TruncationStatus::SurvivedNoHit;
  std::vector<ChaosTraceRow> trace;  // filled only on request
};

struct ChaosRunOptions {
  AddressPolicy policy = AddressPolicy::cyclic();
  int max_stage = 10000;
  std::uint64_t seed = 0;  // only consumed by the uniform-random policy
  bool want_trace = false;
  // Sweeps collect violations instead of aborting on the first one.
  bool throw_on_exceed = true;
};

// Couples the diameter recursion with the exact tent orbit and reports the
// truncation against the k + n0 bound. Truncation before the orbit ever
// reaches (0,a) satisfies the bound vacuously and is reported with the
// hitting time absent.
inline TruncationReport run_until_truncation(const SystemDescriptor& sys,
                                             const TentNoise& noise,
                                             const ChaosRunOptions& options = {}) {
  if (options.max_stage < 1) throw BadParameters("max_stage must be at least 1");
  const ConditionReport condition = validate_tent(sys, noise);
  if (!condition.holds) {
    throw ChaosConditionViolated("xi_max + epsilon/(1 - xi_max) = " +
                                 std::to_string(condition.lhs) + " is not below 1");
  }
  const TruncationBounds bounds = compute_n0(sys.xi_max, noise.epsilon);
  const Rational zero(0, 1);

  TruncationReport report;
  report.x0 = noise.x0;
  report.variant = noise.variant;
  report.n0 = bounds.n0;
  report.a = bounds.a;

  SplitMix64 rng(options.seed, 0);
  Rational x = noise.x0;
  if (zero < x && x < bounds.a) report.hit_stage = 0;

  double diameter = 1.0;
  double noise_term = 0.0;
  double product = 1.0;
  const bool merge_directed = noise.variant == TentVariant::Merge;

  for (int stage = 1; stage <= options.max_stage; ++stage) {
    const int symbol = options.policy.symbol_at(stage, sys.symbol_count(), rng);
    const double ratio = sys.ratio(symbol);
    x = tent_step(x);
    if (!report.hit_stage && zero < x && x < bounds.a) report.hit_stage = stage;
    const double delta = tent_delta(x, noise);
    diameter = ratio * (diameter + delta);
    noise_term = ratio * (noise_term + delta);
    product *= ratio;
    if (options.want_trace) {
      report.trace.push_back(ChaosTraceRow{stage, x, delta, diameter, noise_term, product});
    }

    const bool truncated = merge_directed ? noise_term >= product : diameter <= 0.0;
    if (truncated) {
      report.collapse_stage = stage;
      report.status = TruncationStatus::Truncated;
      if (report.hit_stage) {
        report.l_used = stage - *report.hit_stage;
        report.bound_satisfied = stage <= *report.hit_stage + bounds.n0;
      } else {
        report.bound_satisfied = true;  // truncated before the window opened
      }
      return report;
    }
  }

  if (report.hit_stage) {
    report.status = TruncationStatus::SurvivedAfterHit;
    report.bound_satisfied = false;
    if (options.throw_on_exceed && *report.hit_stage + bounds.n0 <= options.max_stage) {
      throw MaxStageExceeded("orbit entered (0,a) at stage " +
                             std::to_string(*report.hit_stage) +
                             " but no truncation occurred by stage " +
                             std::to_string(options.max_stage));
    }
    return report;
  }
  report.status = TruncationStatus::SurvivedNoHit;
  report.bound_satisfied = true;  // no violation; excluded from bound statistics
  return report;
}

struct TruncationSummary {
  std::size_t total = 0;
  std::size_t truncated = 0;
  std::size_t truncated_with_hit = 0;
  std::size_t truncated_without_hit = 0;
  std::size_t no_hit_survivors = 0;
  std::vector<TruncationReport> violators;
  bool all_ok = false;
};

// Aggregates reports sharing one (xi, epsilon): every orbit that reached the
// trigger interval must have truncated within its k + n0 window. An empty
// batch passes vacuously.
inline TruncationSummary verify_truncation_bound(std::span<const TruncationReport> reports) {
  TruncationSummary summary;
  summary.total = reports.size();
  for (const TruncationReport& report : reports) {
    switch (report.status) {
      case TruncationStatus::Truncated:
        ++summary.truncated;
        if (report.hit_stage) {
          ++summary.truncated_with_hit;
          if (!report.bound_satisfied ||
              *report.collapse_stage > *report.hit_stage + report.n0) {
            summary.violators.push_back(report);
          }
        } else {
          ++summary.truncated_without_hit;
        }
        break;
      case TruncationStatus::SurvivedNoHit:
        ++summary.no_hit_survivors;
        break;
      case TruncationStatus::SurvivedAfterHit:
        summary.violators.push_back(report);
        break;
    }
  }
  summary.all_ok = summary.violators.empty();
  return summary;
}

// Every reduced fraction p/q with 0 < p < q <= max_q, ordered by (q, p).
inline std::vector<Rational> enumerate_reduced_rationals(int max_q) {
  if (max_q < 2) throw BadParameters("max_q must be at least 2");
  std::vector<Rational> out;
  for (int q = 2; q <= max_q; ++q) {
    for (int p = 1; p < q; ++p) {
      if (std::gcd(p, q) == 1) out.push_back(Rational(p, q));
    }
  }
  return out;
}

struct GeneralizedConditionReport {
  bool delta_constant_negative = false;  // one negative value across the interval
  bool orbits_reach_interval = false;    // sampled orbits enter it in time
  bool forced_window_holds = false;      // the kick persists for the whole window
  std::size_t orbit_failures = 0;
  std::string note;
};

// Fraction of sampled orbits allowed to miss the interval. Double-precision
// orbits of piecewise-doubling maps are exact dyadic arithmetic: they shed a
// denominator bit per step and absorb at a fixed point within the mantissa
// width, so a sizable minority of starts never arrives even though the
// underlying map is ergodic (~17% for the tent map and a 1/16 interval).
inline constexpr double kOrbitMissTolerance = 0.25;

// Empirical screening of an arbitrary interval map on [0,1] for the same
// truncation mechanism: a trigger interval on which the disturbance is one
// constant negative value, orbits that actually visit it, and enough
// consecutive negative kicks after entry. All three checks are sampled
// evidence, not proofs; the exact analysis exists only for the tent map.
inline GeneralizedConditionReport check_generalized_conditions(
    const std::function<double(double)>& map, const std::function<double(double)>& delta_rule,
    double lo, double hi, int sample_count, int forced_steps, int max_stage = 10000,
    std::uint64_t seed = 0) {
  if (!(0.0 <= lo) || !(lo < hi) || !(hi <= 1.0)) {
    throw BadParameters("trigger interval must satisfy 0 <= lo < hi <= 1");
  }
  if (sample_count < 2) throw BadParameters("sample_count must be at least 2");
  GeneralizedConditionReport report;

  // (i) the disturbance is a single negative constant on the interval
  const double reference = delta_rule(0.5 * (lo + hi));
  report.delta_constant_negative = reference < 0.0;
  for (int i = 0; i < sample_count && report.delta_constant_negative; ++i) {
    const double x = lo + (hi - lo) * (static_cast<double>(i) + 0.5) /
                              static_cast<double>(sample_count);
    if (delta_rule(x) != reference) report.delta_constant_negative = false;
  }

  // (ii) sampled orbits visit the interval within the stage budget
  SplitMix64 rng(seed, 0);
  for (int i = 0; i < sample_count; ++i) {
    double x = rng.uniform01();
    bool entered = x > lo && x < hi;
    for (int n = 0; n < max_stage && !entered; ++n) {
      x = map(x);
      entered = x > lo && x < hi;
    }
    if (!entered) ++report.orbit_failures;
  }
  report.orbits_reach_interval =
      static_cast<double>(report.orbit_failures) <=
      kOrbitMissTolerance * static_cast<double>(sample_count);

  // (iii) after entering, the kick stays the same negative constant for the
  // whole forced window
  report.forced_window_holds = report.delta_constant_negative;
  for (int i = 0; i < sample_count && report.forced_window_holds; ++i) {
    double x = lo + (hi - lo) * (static_cast<double>(i) + 0.5) /
                        static_cast<double>(sample_count);
    for (int n = 1; n < forced_steps && report.forced_window_holds; ++n) {
      x = map(x);
      if (delta_rule(x) != reference) report.forced_window_holds = false;
    }
  }
  return report;
}

}  // namespace nfl
