#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "nfl/errors.hpp"
#include "nfl/ifs.hpp"
#include "nfl/rational.hpp"
#include "nfl/rng.hpp"

namespace nfl {

// ---------------------------------------------------------------------------
// Tri-valued noise: per-symbol amplitudes; each draw is -amp, 0 or +amp with
// probability 1/3 each. Zero amplitudes are accepted as the degenerate
// noiseless configuration; the case-1 closed forms additionally need every
// amplitude positive, which validate_case1 reports.
// ---------------------------------------------------------------------------
struct TriValuedNoise {
  std::vector<double> deltas;
  double delta_max = 0.0;
  double delta_min = 0.0;

  double amplitude(int symbol) const { return deltas[static_cast<std::size_t>(symbol - 1)]; }
};

inline TriValuedNoise make_trivalued(const std::vector<double>& deltas, int symbol_count) {
  if (static_cast<int>(deltas.size()) != symbol_count) {
    throw BadParameters("noise.deltas needs exactly " + std::to_string(symbol_count) +
                        " entries, got " + std::to_string(deltas.size()));
  }
  TriValuedNoise noise;
  noise.deltas = deltas;
  noise.delta_max = 0.0;
  noise.delta_min = deltas.empty() ? 0.0 : deltas[0];
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    const double d = deltas[i];
    if (!(d >= 0.0) || !(d < 1.0)) {
      throw BadParameters("noise.deltas[" + std::to_string(i) + "] = " +
                          std::to_string(d) + " is outside [0,1)");
    }
    noise.delta_max = std::max(noise.delta_max, d);
    noise.delta_min = std::min(noise.delta_min, d);
  }
  return noise;
}

inline double sample_trivalued(const TriValuedNoise& noise, int symbol, SplitMix64& rng) {
  const double amp = noise.amplitude(symbol);
  switch (rng.trit()) {
    case 0: return -amp;
    case 1: return 0.0;
    default: return amp;
  }
}

// Verdict of a closed-form applicability test; lhs/rhs are the two sides of
// the inequality actually evaluated, kept for reporting.
struct ConditionReport {
  bool holds = false;
  double lhs = 0.0;
  double rhs = 0.0;
  std::string description;
};

// Worst-case admissibility of the deep-regime law: xi <= dmin/(2*dmax+dmin),
// evaluated with xi = max ratio. Equality counts as holding.
inline ConditionReport validate_case1(const SystemDescriptor& sys,
                                      const TriValuedNoise& noise) {
  ConditionReport report;
  report.lhs = sys.xi_max;
  if (noise.delta_max <= 0.0) {
    report.rhs = 0.0;
    report.holds = false;
    report.description = "degenerate zero-amplitude noise";
    return report;
  }
  report.rhs = noise.delta_min / (2.0 * noise.delta_max + noise.delta_min);
  report.holds = report.lhs <= report.rhs;
  report.description = "xi_max <= delta_min/(2*delta_max + delta_min)";
  return report;
}

// ---------------------------------------------------------------------------
// Density noise: a probability density tabulated on a uniform grid.
// values[i] sits at lower + i*spacing; mass is always the trapezoid rule.
// ---------------------------------------------------------------------------
struct DensityGrid {
  double lower = 0.0;
  double spacing = 0.0;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double upper() const { return lower + spacing * static_cast<double>(size() - 1); }
  double point(std::size_t i) const { return lower + spacing * static_cast<double>(i); }

  // Linear interpolation, zero outside the support.
  double value_at(double x) const {
    if (values.empty() || x < lower || x > upper()) return 0.0;
    const double t = (x - lower) / spacing;
    const std::size_t i = std::min(static_cast<std::size_t>(t), size() - 2);
    const double frac = t - static_cast<double>(i);
    return values[i] + frac * (values[i + 1] - values[i]);
  }
};

inline double trapezoid_mass(const DensityGrid& grid) {
  if (grid.values.size() < 2) return 0.0;
  double sum = 0.0;
  for (double v : grid.values) sum += v;
  sum -= 0.5 * (grid.values.front() + grid.values.back());
  return sum * grid.spacing;
}

inline void renormalize(DensityGrid& grid) {
  const double mass = trapezoid_mass(grid);
  if (!(mass > 1e-300)) {
    throw DegenerateDensity("density grid carries no mass to renormalize");
  }
  for (double& v : grid.values) v /= mass;
}

inline DensityGrid make_grid(double lower, double spacing, std::vector<double> values) {
  if (values.size() < 2) throw BadParameters("density grid needs at least 2 points");
  if (!(spacing > 0.0)) throw BadParameters("density grid spacing must be positive");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] >= 0.0)) {
      throw BadParameters("density values[" + std::to_string(i) + "] is negative");
    }
  }
  DensityGrid grid;
  grid.lower = lower;
  grid.spacing = spacing;
  grid.values = std::move(values);
  return grid;
}

// Named density families. "tabulated" covers arbitrary shapes; the synthetic
// families exist because concrete inputs are needed to run anything.
struct DensitySpec {
  std::string family;  // "uniform" | "triangular" | "gaussian" | "tabulated"
  double beta = 0.0;   // uniform/triangular half-width
  double sigma = 0.0;  // gaussian std dev
  double cut = 0.0;    // gaussian truncation half-width
  double x_min = 0.0;  // tabulated support
  double x_max = 0.0;
  std::vector<double> values;  // tabulated ordinates (renormalized on build)
};

inline constexpr int kMinDensityResolution = 64;

namespace detail {

inline DensityGrid sampled_density(double lo, double hi, std::size_t count,
                                   double (*f)(double, const DensitySpec&),
                                   const DensitySpec& spec) {
  DensityGrid grid;
  grid.lower = lo;
  grid.spacing = (hi - lo) / static_cast<double>(count - 1);
  grid.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) grid.values[i] = f(grid.point(i), spec);
  renormalize(grid);
  return grid;
}

inline double uniform_pdf(double, const DensitySpec& spec) { return 1.0 / (2.0 * spec.beta); }

inline double triangular_pdf(double x, const DensitySpec& spec) {
  const double t = 1.0 - std::abs(x) / spec.beta;
  return t > 0.0 ? t / spec.beta : 0.0;
}

inline double gaussian_pdf(double x, const DensitySpec& spec) {
  const double z = x / spec.sigma;
  return std::exp(-0.5 * z * z);
}

}  // namespace detail

inline DensityGrid build_density(const DensitySpec& spec, int resolution = 1 << 14) {
  if (spec.family != "tabulated" && resolution < kMinDensityResolution) {
    throw BadParameters("density resolution must be at least " +
                        std::to_string(kMinDensityResolution));
  }
  const auto count = static_cast<std::size_t>(resolution);
  if (spec.family == "uniform") {
    if (!(spec.beta > 0.0)) throw BadParameters("uniform density needs beta > 0");
    return detail::sampled_density(-spec.beta, spec.beta, count, detail::uniform_pdf, spec);
  }
  if (spec.family == "triangular") {
    if (!(spec.beta > 0.0)) throw BadParameters("triangular density needs beta > 0");
    return detail::sampled_density(-spec.beta, spec.beta, count, detail::triangular_pdf, spec);
  }
  if (spec.family == "gaussian") {
    if (!(spec.sigma > 0.0) || !(spec.cut > 0.0)) {
      throw BadParameters("gaussian density needs sigma > 0 and cut > 0");
    }
    return detail::sampled_density(-spec.cut, spec.cut, count, detail::gaussian_pdf, spec);
  }
  if (spec.family == "tabulated") {
    if (!(spec.x_max > spec.x_min)) throw BadParameters("tabulated density needs x_max > x_min");
    DensityGrid grid = make_grid(spec.x_min,
                                 (spec.x_max - spec.x_min) /
                                     static_cast<double>(spec.values.size() - 1),
                                 spec.values);
    renormalize(grid);
    return grid;
  }
  throw UnknownFamily("unknown density family: " + spec.family);
}

// Same family, but on a caller-chosen spacing so two grids can be convolved
// without resampling. The support end is snapped inward to the grid; the
// sliver it loses is restored by renormalization.
inline DensityGrid build_density_spaced(const DensitySpec& spec, double spacing) {
  if (!(spacing > 0.0)) throw BadParameters("density spacing must be positive");
  double lo = 0.0, hi = 0.0;
  double (*pdf)(double, const DensitySpec&) = nullptr;
  if (spec.family == "uniform") {
    lo = -spec.beta; hi = spec.beta; pdf = detail::uniform_pdf;
  } else if (spec.family == "triangular") {
    lo = -spec.beta; hi = spec.beta; pdf = detail::triangular_pdf;
  } else if (spec.family == "gaussian") {
    lo = -spec.cut; hi = spec.cut; pdf = detail::gaussian_pdf;
  } else if (spec.family == "tabulated") {
    DensityGrid base = build_density(spec);
    lo = base.lower; hi = base.upper();
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / spacing)) + 1;
    if (count < 2) throw BadParameters("spacing too coarse for tabulated support");
    DensityGrid grid;
    grid.lower = lo;
    grid.spacing = spacing;
    grid.values.resize(count);
    for (std::size_t i = 0; i < count; ++i) grid.values[i] = base.value_at(grid.point(i));
    renormalize(grid);
    return grid;
  } else {
    throw UnknownFamily("unknown density family: " + spec.family);
  }
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / spacing)) + 1;
  if (count < 2) throw BadParameters("spacing too coarse for density support");
  DensityGrid grid;
  grid.lower = lo;
  grid.spacing = spacing;
  grid.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) grid.values[i] = pdf(grid.point(i), spec);
  renormalize(grid);
  return grid;
}

// Inverse-CDF sampler. The cumulative is the trapezoid rule, so within a cell
// the CDF is quadratic; draws invert it exactly.
class DensitySampler {
 public:
  explicit DensitySampler(DensityGrid grid) : grid_(std::move(grid)) {
    cumulative_.resize(grid_.size());
    cumulative_[0] = 0.0;
    for (std::size_t i = 1; i < grid_.size(); ++i) {
      cumulative_[i] = cumulative_[i - 1] +
                       0.5 * grid_.spacing * (grid_.values[i - 1] + grid_.values[i]);
    }
    if (!(cumulative_.back() > 1e-300)) {
      throw DegenerateDensity("cannot sample from a massless density");
    }
  }

  const DensityGrid& grid() const { return grid_; }

  double sample(SplitMix64& rng) const {
    const double target = rng.uniform01() * cumulative_.back();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
    std::size_t i = static_cast<std::size_t>(it - cumulative_.begin());
    if (i == 0) i = 1;
    if (i >= grid_.size()) i = grid_.size() - 1;
    const std::size_t cell = i - 1;
    const double need = target - cumulative_[cell];
    const double v0 = grid_.values[cell];
    const double v1 = grid_.values[cell + 1];
    const double h = grid_.spacing;
    const double slope = (v1 - v0) / h;
    double t;
    if (std::abs(slope) * h < 1e-14 * std::max(v0, 1e-300)) {
      t = v0 > 0.0 ? need / v0 : 0.0;
    } else {
      // Solve v0*t + slope*t^2/2 = need for t in [0,h], stable branch.
      const double disc = v0 * v0 + 2.0 * slope * need;
      t = disc > 0.0 ? (2.0 * need) / (v0 + std::sqrt(disc)) : 0.0;
    }
    t = std::clamp(t, 0.0, h);
    return grid_.point(cell) + t;
  }

 private:
  DensityGrid grid_;
  std::vector<double> cumulative_;
};

inline double sample_density(const DensitySampler& sampler, SplitMix64& rng) {
  return sampler.sample(rng);
}

// One-shot convenience; hot loops should hold a DensitySampler instead of
// rebuilding the cumulative table per draw.
inline double sample_density(const DensityGrid& grid, SplitMix64& rng) {
  return DensitySampler(grid).sample(rng);
}

// Per-symbol densities; a single grid is shared by every symbol.
struct DensityNoise {
  std::vector<DensityGrid> grids;  // size 1 or K
  std::vector<DensitySpec> specs;  // matching specs, kept for re-gridding

  const DensityGrid& grid_for(int symbol) const {
    return grids.size() == 1 ? grids[0] : grids[static_cast<std::size_t>(symbol - 1)];
  }
  const DensitySpec& spec_for(int symbol) const {
    return specs.size() == 1 ? specs[0] : specs[static_cast<std::size_t>(symbol - 1)];
  }
};

inline DensityNoise make_density_noise(std::vector<DensitySpec> specs, int symbol_count,
                                       int resolution = 1 << 14) {
  if (specs.empty() ||
      (specs.size() != 1 && static_cast<int>(specs.size()) != symbol_count)) {
    throw BadParameters("density noise needs 1 or K specs");
  }
  DensityNoise noise;
  for (const DensitySpec& spec : specs) noise.grids.push_back(build_density(spec, resolution));
  noise.specs = std::move(specs);
  return noise;
}

// ---------------------------------------------------------------------------
// Tent-map noise: the disturbance is a deterministic +-epsilon decided by a
// chaotic orbit. The orbit position is exact rational state; see chaos.hpp
// for why floating iteration is not an option.
// ---------------------------------------------------------------------------
enum class TentVariant { Collapse, Merge };

struct TentNoise {
  double epsilon = 0.0;
  Rational x0;
  TentVariant variant = TentVariant::Collapse;
};

inline TentNoise make_tent(double epsilon, Rational x0,
                           TentVariant variant = TentVariant::Collapse) {
  if (!(epsilon > 0.0) || !(epsilon < 1.0)) {
    throw BadParameters("tent epsilon must lie in (0,1)");
  }
  if (x0 < Rational(0, 1) || x0 > Rational(1, 1)) {
    throw BadParameters("tent x0 must lie in [0,1]");
  }
  return TentNoise{epsilon, x0, variant};
}

// One exact tent-map iterate: x -> 2x below 1/2, else 2(1-x). The image's
// denominator always divides the input's.
inline Rational tent_step(const Rational& x) {
  if (x < Rational(1, 2)) return Rational(2 * x.num, x.den);
  return Rational(2 * (x.den - x.num), x.den);
}

// Disturbance assigned to an orbit position. Collapse-directed pushes the
// diameter down while the orbit sits below 1/2; merge-directed flips signs.
// The boundary belongs to the upper branch.
inline double tent_delta(const Rational& x, const TentNoise& noise) {
  const bool low = x < Rational(1, 2);
  const double sign = (noise.variant == TentVariant::Collapse) ? (low ? -1.0 : 1.0)
                                                               : (low ? 1.0 : -1.0);
  return sign * noise.epsilon;
}

// Contractivity-vs-kick balance: xi + eps/(1-xi) < 1 with xi = max ratio.
// The truncation machinery refuses to run when this fails.
inline ConditionReport validate_tent(const SystemDescriptor& sys, const TentNoise& noise) {
  ConditionReport report;
  report.lhs = sys.xi_max + noise.epsilon / (1.0 - sys.xi_max);
  report.rhs = 1.0;
  report.holds = report.lhs < report.rhs;
  report.description = "xi_max + epsilon/(1 - xi_max) < 1";
  return report;
}

// ---------------------------------------------------------------------------
// Tagged union over the three disturbance sources.
// ---------------------------------------------------------------------------
using NoiseModel = std::variant<TriValuedNoise, DensityNoise, TentNoise>;

}  // namespace nfl
