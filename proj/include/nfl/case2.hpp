#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "nfl/errors.hpp"
#include "nfl/ifs.hpp"
#include "nfl/noise.hpp"

namespace nfl {

// Density of xi*X from the density of X: pointwise change of variables; the
// grid carries the scaling, so mass is preserved exactly.
inline DensityGrid scale_density(const DensityGrid& grid, double ratio) {
  if (!(ratio > 0.0) || !(ratio < 1.0)) {
    throw BadParameters("scale_density ratio must lie in (0,1)");
  }
  DensityGrid out;
  out.lower = grid.lower * ratio;
  out.spacing = grid.spacing * ratio;
  out.values.reserve(grid.size());
  for (double v : grid.values) out.values.push_back(v / ratio);
  return out;
}

namespace detail {

// Iterative radix-2 complex FFT, enough for convolution-sized transforms.
inline void fft(std::vector<std::complex<double>>& a, bool invert) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = (invert ? 2.0 : -2.0) * 3.14159265358979323846 /
                         static_cast<double>(len);
    const std::complex<double> root(std::cos(angle), std::sin(angle));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t j = 0; j < len / 2; ++j) {
        const std::complex<double> u = a[i + j];
        const std::complex<double> v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= root;
      }
    }
  }
  if (invert) {
    for (auto& x : a) x /= static_cast<double>(n);
  }
}

inline std::vector<double> convolve_direct(const std::vector<double>& a,
                                           const std::vector<double>& b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) continue;
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

inline std::vector<double> convolve_fft(const std::vector<double>& a,
                                        const std::vector<double>& b) {
  const std::size_t need = a.size() + b.size() - 1;
  std::size_t n = 1;
  while (n < need) n <<= 1;
  std::vector<std::complex<double>> fa(n), fb(n);
  for (std::size_t i = 0; i < a.size(); ++i) fa[i] = a[i];
  for (std::size_t i = 0; i < b.size(); ++i) fb[i] = b[i];
  fft(fa, false);
  fft(fb, false);
  for (std::size_t i = 0; i < n; ++i) fa[i] *= fb[i];
  fft(fa, true);
  std::vector<double> out(need);
  for (std::size_t i = 0; i < need; ++i) out[i] = fa[i].real();
  return out;
}

// Drops leading exactly-zero points, keeping a single zero ahead of the first
// mass so interpolation at the edge is unchanged. Truncated survivor grids
// otherwise accumulate a dead left flank stage after stage.
inline void trim_leading_zeros(DensityGrid& grid) {
  std::size_t first = 0;
  while (first < grid.size() && grid.values[first] == 0.0) ++first;
  if (first <= 1 || first >= grid.size()) return;
  const std::size_t keep_from = first - 1;
  grid.lower = grid.point(keep_from);
  grid.values.erase(grid.values.begin(),
                    grid.values.begin() + static_cast<std::ptrdiff_t>(keep_from));
}

// Linear resampling onto a new spacing over the same support. Only used when
// a caller hands convolve grids with mismatched spacings.
inline DensityGrid resample_linear(const DensityGrid& grid, double spacing) {
  const auto count =
      static_cast<std::size_t>(std::floor((grid.upper() - grid.lower) / spacing)) + 1;
  if (count < 2) throw BadParameters("resample spacing too coarse for support");
  DensityGrid out;
  out.lower = grid.lower;
  out.spacing = spacing;
  out.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) out.values[i] = grid.value_at(out.point(i));
  return out;
}

}  // namespace detail

struct ConvolveOptions {
  std::int64_t point_budget = std::int64_t(1) << 22;
  // Products of sizes up to this bound run the direct O(n*m) sum; larger
  // inputs go through the FFT. Both routes agree to ~1e-12 on unit-mass
  // grids.
  std::int64_t direct_threshold = std::int64_t(1) << 20;
  bool force_direct = false;
  bool force_fft = false;
};

// Density of the sum of two independent variables. The quadrature halves the
// endpoint values of both factors (trapezoid in the integration variable), so
// the output's trapezoid mass equals the product of the input masses up to
// O(spacing^2) edge terms.
inline DensityGrid convolve(const DensityGrid& a, const DensityGrid& b,
                            const ConvolveOptions& options = {}) {
  if (a.size() < 2 || b.size() < 2) throw BadParameters("convolve needs real grids");
  const DensityGrid* pa = &a;
  const DensityGrid* pb = &b;
  DensityGrid resampled;
  const double rel = std::abs(a.spacing - b.spacing) / std::max(a.spacing, b.spacing);
  if (rel > 1e-12) {
    // Resample the finer grid onto the coarser spacing.
    if (a.spacing < b.spacing) {
      resampled = detail::resample_linear(a, b.spacing);
      pa = &resampled;
    } else {
      resampled = detail::resample_linear(b, a.spacing);
      pb = &resampled;
    }
  }
  const std::int64_t out_size =
      static_cast<std::int64_t>(pa->size()) + static_cast<std::int64_t>(pb->size()) - 1;
  if (out_size > options.point_budget) {
    throw ResolutionOverflow("convolution output of " + std::to_string(out_size) +
                             " points exceeds the budget of " +
                             std::to_string(options.point_budget));
  }

  std::vector<double> wa(pa->values);
  std::vector<double> wb(pb->values);
  wa.front() *= 0.5;
  wa.back() *= 0.5;
  wb.front() *= 0.5;
  wb.back() *= 0.5;

  const bool direct =
      options.force_direct ||
      (!options.force_fft &&
       static_cast<std::int64_t>(wa.size()) * static_cast<std::int64_t>(wb.size()) <=
           options.direct_threshold);
  std::vector<double> raw =
      direct ? detail::convolve_direct(wa, wb) : detail::convolve_fft(wa, wb);

  DensityGrid out;
  out.lower = pa->lower + pb->lower;
  out.spacing = pa->spacing;
  out.values.resize(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    out.values[i] = std::max(0.0, raw[i] * out.spacing);
  }
  return out;
}

// Mass of the density at or below the cutoff, by the trapezoid rule with the
// final partial cell interpolated linearly.
inline double tail_mass(const DensityGrid& grid, double cutoff) {
  if (grid.size() < 2) return 0.0;
  if (cutoff <= grid.lower) return 0.0;
  double sum = 0.0;
  const std::size_t cells = grid.size() - 1;
  for (std::size_t i = 0; i < cells; ++i) {
    const double x1 = grid.point(i + 1);
    if (cutoff >= x1) {
      sum += 0.5 * grid.spacing * (grid.values[i] + grid.values[i + 1]);
      continue;
    }
    const double x0 = grid.point(i);
    if (cutoff > x0) {
      const double t = cutoff - x0;
      const double vc = grid.values[i] + (grid.values[i + 1] - grid.values[i]) *
                                             (t / grid.spacing);
      sum += 0.5 * t * (grid.values[i] + vc);
    }
    break;
  }
  return sum;
}

struct TruncateResult {
  DensityGrid grid;
  double removed_mass = 0.0;  // trapezoid mass actually zeroed out
  bool consistent = true;     // removed mass matched the supplied probability
};

inline constexpr double kTruncateConsistencyTol = 1e-3;

// Survivor conditioning: zero the density at and below the threshold (mass
// exactly at the threshold is removed), then divide by 1 - collapse_prob.
// When collapse_prob equals the removed tail mass the output is again a unit
// density; a mismatch beyond kTruncateConsistencyTol flags the result.
inline TruncateResult truncate_renormalize(const DensityGrid& grid, double threshold,
                                           double collapse_prob) {
  if (collapse_prob >= 1.0 - 1e-12) {
    throw DegenerateDensity("collapse probability " + std::to_string(collapse_prob) +
                            " leaves no density to renormalize");
  }
  if (collapse_prob < 0.0) throw BadParameters("collapse probability is negative");

  TruncateResult result;
  result.grid = grid;
  const double before = trapezoid_mass(grid);
  for (std::size_t i = 0; i < result.grid.size(); ++i) {
    if (result.grid.point(i) <= threshold) {
      result.grid.values[i] = 0.0;
    } else {
      break;
    }
  }
  const double after = trapezoid_mass(result.grid);
  result.removed_mass = before - after;
  if (!(after > 1e-300)) {
    throw DegenerateDensity("all density mass lies at or below the threshold");
  }
  const double scale = 1.0 - collapse_prob;
  for (double& v : result.grid.values) v /= scale;
  result.consistent = std::abs(result.removed_mass - collapse_prob) <= kTruncateConsistencyTol;
  return result;
}

struct Case2Row {
  int stage = 0;
  double le = 0.0;
  double nt = 0.0;
  double c = 0.0;
};

struct Case2Table {
  std::vector<Case2Row> rows;
};

// Running state of the propagation: the survivor-conditioned noise-term
// density together with the collapse bookkeeping. The density carries unit
// mass after every conditioning step.
struct PropagationState {
  DensityGrid density;
  double cumulative_collapse = 0.0;
  int stage = 0;
  double nt = 1.0;
};

struct Case2Options {
  int resolution = 1 << 14;
  ConvolveOptions convolve;
  // When set, receives the (pre-truncation) noise-term density of each stage.
  std::vector<DensityGrid>* stage_densities = nullptr;
};

// Propagates the noise-term density stage by stage:
//   scale both the surviving density and the fresh factor by the stage ratio,
//   convolve, read the tail at -prod_n, then condition on survival.
// Fresh factors are rebuilt on the running spacing so the two convolution
// inputs always line up without resampling. The survivor conditioning divides
// by the mass actually removed, which keeps the working density normalized;
// the reported C_n still comes from the recursion NT_n * LE_n.
inline Case2Table distribution_case2(const SystemDescriptor& sys,
                                     const std::vector<DensitySpec>& specs,
                                     const Address& address, int max_stage,
                                     const Case2Options& options = {}) {
  if (max_stage < 1) throw BadParameters("max_stage must be at least 1");
  if (address.stage() < max_stage) throw BadParameters("address shorter than max_stage");
  if (specs.empty() ||
      (specs.size() != 1 && static_cast<int>(specs.size()) != sys.symbol_count())) {
    throw BadParameters("density pipeline needs 1 or K density specs");
  }
  const auto spec_for = [&](int symbol) -> const DensitySpec& {
    return specs.size() == 1 ? specs[0] : specs[static_cast<std::size_t>(symbol - 1)];
  };

  Case2Table table;
  PropagationState state;
  double product = 1.0;

  for (int stage = 1; stage <= max_stage; ++stage) {
    const int symbol = address.symbols[static_cast<std::size_t>(stage - 1)];
    const double ratio = sys.ratio(symbol);
    product *= ratio;

    DensityGrid current;
    if (stage == 1) {
      current = scale_density(build_density(spec_for(symbol), options.resolution), ratio);
    } else {
      const DensityGrid fresh = build_density_spaced(spec_for(symbol), state.density.spacing);
      current = convolve(scale_density(state.density, ratio), scale_density(fresh, ratio),
                         options.convolve);
    }
    if (options.stage_densities) options.stage_densities->push_back(current);

    Case2Row row;
    row.stage = stage;
    row.le = std::clamp(tail_mass(current, -product), 0.0, 1.0);
    row.nt = 1.0 - state.cumulative_collapse;
    row.c = row.nt * row.le;
    table.rows.push_back(row);

    state.stage = stage;
    state.nt = row.nt;
    state.cumulative_collapse += row.c;

    if (stage < max_stage) {
      // Condition on survival: remove the collapsed tail and renormalize by
      // the fraction actually removed.
      const double pre = trapezoid_mass(current);
      if (!(pre > 1e-300)) {
        throw DegenerateDensity("noise-term density lost all mass at stage " +
                                std::to_string(stage));
      }
      DensityGrid zeroed = current;
      for (std::size_t i = 0; i < zeroed.size(); ++i) {
        if (zeroed.point(i) <= -product) {
          zeroed.values[i] = 0.0;
        } else {
          break;
        }
      }
      const double removed = pre - trapezoid_mass(zeroed);
      const double fraction = removed / pre;
      if (fraction >= 1.0 - 1e-12) {
        throw DegenerateDensity("survivor density vanished at stage " +
                                std::to_string(stage));
      }
      state.density = truncate_renormalize(current, -product, fraction).grid;
      // Numerical cleanup: pin the survivor mass back to exactly 1.
      renormalize(state.density);
      detail::trim_leading_zeros(state.density);
    }
  }
  return table;
}

}  // namespace nfl
