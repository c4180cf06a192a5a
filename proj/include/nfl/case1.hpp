#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "nfl/errors.hpp"
#include "nfl/ifs.hpp"
#include "nfl/noise.hpp"

namespace nfl {

// Stage classification for tri-valued noise against the noise-term envelope
// B = xi*dmax/(1-xi). With prod_n the noiseless diameter at stage n:
//   prod_n   > B            collapse cannot happen yet
//   prod_n-1 > B >= prod_n  the envelope straddles the threshold
//   prod_n-1 <= B           every surviving lineage collapses iff the latest
//                           kick was negative (needs validate_case1 to hold)
enum class Regime { NoCollapsePossible, Transitional, Deep };

inline const char* regime_name(Regime regime) {
  switch (regime) {
    case Regime::NoCollapsePossible: return "no-collapse-possible";
    case Regime::Transitional: return "transitional";
    default: return "deep";
  }
}

inline double case1_bound(const SystemDescriptor& sys, const TriValuedNoise& noise) {
  return sys.xi_max * noise.delta_max / (1.0 - sys.xi_max);
}

namespace detail {

inline Regime classify_products(double prod_prev, double prod_now, double bound) {
  if (prod_now > bound) return Regime::NoCollapsePossible;
  if (prod_prev > bound) return Regime::Transitional;
  return Regime::Deep;
}

inline void require_case1(const SystemDescriptor& sys, const TriValuedNoise& noise) {
  const ConditionReport report = validate_case1(sys, noise);
  if (!report.holds) {
    throw Case1ConditionViolated(
        "deep regime reached but the amplitude condition fails: xi_max = " +
        std::to_string(report.lhs) + " > delta_min/(2*delta_max + delta_min) = " +
        std::to_string(report.rhs));
  }
}

inline double prefix_product(const SystemDescriptor& sys, const Address& address,
                             int stage) {
  if (stage > address.stage()) {
    throw BadParameters("address has only " + std::to_string(address.stage()) +
                        " symbols, stage " + std::to_string(stage) + " requested");
  }
  double prod = 1.0;
  for (int i = 0; i < stage; ++i) {
    prod *= sys.ratio(address.symbols[static_cast<std::size_t>(i)]);
  }
  return prod;
}

}  // namespace detail

inline Regime classify_regime(const SystemDescriptor& sys, const TriValuedNoise& noise,
                              const Address& address, int stage) {
  if (stage < 1) throw BadParameters("stage must be at least 1");
  const double bound = case1_bound(sys, noise);
  const double prod_prev = detail::prefix_product(sys, address, stage - 1);
  const double prod_now = prod_prev * sys.ratio(address.symbols[static_cast<std::size_t>(stage - 1)]);
  const Regime regime = detail::classify_products(prod_prev, prod_now, bound);
  if (regime == Regime::Deep) detail::require_case1(sys, noise);
  return regime;
}

// Probability that the stage-n noise term sits at or below -prod_n, given the
// lineage survived so far. Zero while the envelope cannot reach the
// threshold; 1/3 once it fully covers it; in between, proportional to the
// covered fraction of the envelope (clamped into [0,1]).
inline double le_case1(const SystemDescriptor& sys, const TriValuedNoise& noise,
                       const Address& address, int stage) {
  const Regime regime = classify_regime(sys, noise, address, stage);
  switch (regime) {
    case Regime::NoCollapsePossible:
      return 0.0;
    case Regime::Transitional: {
      const double prod_now = detail::prefix_product(sys, address, stage);
      const double xi = sys.xi_max;
      const double dmax = noise.delta_max;
      const double value = (xi * dmax - (1.0 - xi) * prod_now) / (2.0 * xi * dmax);
      return std::clamp(value, 0.0, 1.0);
    }
    default:
      return 1.0 / 3.0;
  }
}

struct Case1Row {
  int stage = 0;
  double le = 0.0;
  double nt = 0.0;
  double c = 0.0;
  double ge = 0.0;  // equals le: the tri-valued noise is symmetric
  Regime regime = Regime::NoCollapsePossible;
};

struct Case1Table {
  std::vector<Case1Row> rows;

  double cumulative_collapse() const {
    double sum = 0.0;
    for (const Case1Row& row : rows) sum += row.c;
    return sum;
  }
};

// The full recursion: NT_n = 1 - sum_{i<n} C_i starting from NT_1 = 1, and
// C_n = NT_n * LE_n.
inline Case1Table distribution_case1(const SystemDescriptor& sys,
                                     const TriValuedNoise& noise, const Address& address,
                                     int max_stage) {
  if (max_stage < 1) throw BadParameters("max_stage must be at least 1");
  Case1Table table;
  double collapsed_so_far = 0.0;
  for (int stage = 1; stage <= max_stage; ++stage) {
    Case1Row row;
    row.stage = stage;
    row.regime = classify_regime(sys, noise, address, stage);
    row.le = le_case1(sys, noise, address, stage);
    row.ge = row.le;
    row.nt = 1.0 - collapsed_so_far;
    row.c = row.nt * row.le;
    collapsed_so_far += row.c;
    table.rows.push_back(row);
  }
  return table;
}

inline constexpr int kEnumerationMaxStage = 14;

// Ground truth by brute force: every disturbance sequence over the ternary
// alphabet {-amp, 0, +amp} is equiprobable, so exact probabilities are
// integer counts over 3^n sequences. A lineage leaves the count the first
// time it collapses.
struct EnumerationResult {
  std::vector<std::uint64_t> first_collapse;  // [stage] sequences collapsing there first
  std::vector<std::uint64_t> survivors;       // [stage] surviving prefixes, survivors[0] = 1
  Case1Table table;                           // le here is conditional on survival
};

inline EnumerationResult exact_enumeration(const SystemDescriptor& sys,
                                           const TriValuedNoise& noise,
                                           const Address& address, int max_stage) {
  if (max_stage < 1) throw BadParameters("max_stage must be at least 1");
  if (max_stage > kEnumerationMaxStage) {
    throw BudgetExceeded("exact enumeration capped at max_stage " +
                         std::to_string(kEnumerationMaxStage));
  }
  if (address.stage() < max_stage) {
    throw BadParameters("address shorter than max_stage");
  }

  EnumerationResult result;
  result.first_collapse.assign(static_cast<std::size_t>(max_stage) + 1, 0);
  result.survivors.assign(static_cast<std::size_t>(max_stage) + 1, 0);
  result.survivors[0] = 1;

  std::vector<double> ratios(static_cast<std::size_t>(max_stage));
  std::vector<double> amps(static_cast<std::size_t>(max_stage));
  std::vector<double> products(static_cast<std::size_t>(max_stage));
  double prod = 1.0;
  for (int i = 0; i < max_stage; ++i) {
    const int sym = address.symbols[static_cast<std::size_t>(i)];
    ratios[static_cast<std::size_t>(i)] = sys.ratio(sym);
    amps[static_cast<std::size_t>(i)] = noise.amplitude(sym);
    prod *= sys.ratio(sym);
    products[static_cast<std::size_t>(i)] = prod;
  }

  // Depth-first over surviving prefixes only.
  const auto recurse = [&](auto&& self, int stage, double noise_term) -> void {
    const std::size_t i = static_cast<std::size_t>(stage - 1);
    for (int branch = -1; branch <= 1; ++branch) {
      const double next = ratios[i] * (noise_term + branch * amps[i]);
      if (next <= -products[i]) {
        ++result.first_collapse[static_cast<std::size_t>(stage)];
      } else if (stage < max_stage) {
        self(self, stage + 1, next);
      }
    }
  };
  recurse(recurse, 1, 0.0);

  for (int stage = 1; stage <= max_stage; ++stage) {
    const std::size_t s = static_cast<std::size_t>(stage);
    result.survivors[s] = 3 * result.survivors[s - 1] - result.first_collapse[s];
  }

  double pow3 = 1.0;
  const double bound = case1_bound(sys, noise);
  double prod_prev = 1.0;
  for (int stage = 1; stage <= max_stage; ++stage) {
    const std::size_t s = static_cast<std::size_t>(stage);
    pow3 *= 3.0;
    Case1Row row;
    row.stage = stage;
    const double nt_count = static_cast<double>(result.survivors[s - 1]);
    row.nt = nt_count * 3.0 / pow3;
    row.c = static_cast<double>(result.first_collapse[s]) / pow3;
    row.le = nt_count > 0.0
                 ? static_cast<double>(result.first_collapse[s]) / (3.0 * nt_count)
                 : 0.0;
    row.ge = row.le;
    const double prod_now = products[s - 1];
    row.regime = detail::classify_products(prod_prev, prod_now, bound);
    prod_prev = prod_now;
    result.table.rows.push_back(row);
  }
  return result;
}

// Constant-symbol address, the default path for uniform configurations.
inline Address repeated_address(int symbol, int length) {
  Address addr;
  addr.symbols.assign(static_cast<std::size_t>(length), symbol);
  return addr;
}

inline Address cyclic_address(int symbol_count, int length) {
  Address addr;
  for (int i = 0; i < length; ++i) addr.symbols.push_back(1 + i % symbol_count);
  return addr;
}

}  // namespace nfl
