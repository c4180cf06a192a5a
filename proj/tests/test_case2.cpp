#include <cmath>

#include <catch2/catch_amalgamated.hpp>

#include "nfl/case1.hpp"
#include "nfl/case2.hpp"
#include "nfl/simulate.hpp"

using Catch::Approx;

namespace {

nfl::DensityGrid uniform_grid(double beta, int resolution) {
  nfl::DensitySpec spec;
  spec.family = "uniform";
  spec.beta = beta;
  return nfl::build_density(spec, resolution);
}

}  // namespace

TEST_CASE("scaling a density is an exact change of variables") {
  const auto grid = uniform_grid(1.0, 1 << 12);
  const auto scaled = nfl::scale_density(grid, 0.5);
  CHECK(scaled.lower == Approx(-0.5));
  CHECK(scaled.upper() == Approx(0.5));
  CHECK(scaled.values[scaled.size() / 2] == Approx(1.0).margin(1e-9));
  CHECK(trapezoid_mass(scaled) == Approx(trapezoid_mass(grid)).margin(1e-12));

  CHECK_THROWS_AS(nfl::scale_density(grid, 1.0), nfl::BadParameters);
  CHECK_THROWS_AS(nfl::scale_density(grid, 0.0), nfl::BadParameters);
}

TEST_CASE("mass is preserved by scaling for arbitrary grids") {
  nfl::DensitySpec spec;
  spec.family = "triangular";
  spec.beta = 2.0;
  const auto grid = nfl::build_density(spec, 4096);
  for (double ratio : {0.1, 0.37, 0.9}) {
    CHECK(trapezoid_mass(nfl::scale_density(grid, ratio)) ==
          Approx(trapezoid_mass(grid)).margin(1e-9));
  }
}

TEST_CASE("convolving two uniforms yields the triangle") {
  const auto grid = uniform_grid(1.0, 1 << 14);
  const auto conv = nfl::convolve(grid, grid);
  CHECK(conv.lower == Approx(-2.0));
  CHECK(conv.upper() == Approx(2.0));
  double worst = 0.0;
  for (std::size_t i = 0; i < conv.size(); ++i) {
    const double x = conv.point(i);
    const double expected = std::max(0.0, (2.0 - std::abs(x)) / 4.0);
    worst = std::max(worst, std::abs(conv.values[i] - expected));
  }
  CHECK(worst <= 1e-3);
  CHECK(trapezoid_mass(conv) == Approx(1.0).margin(1e-6));
}

TEST_CASE("a narrow spike is close to the convolution identity") {
  nfl::DensitySpec spec;
  spec.family = "triangular";
  spec.beta = 1.0;
  const auto smooth = nfl::build_density(spec, 1 << 13);
  const double h = smooth.spacing;
  const auto spike = nfl::make_grid(-2.0 * h, h, {0.0, 0.0, 1.0 / h, 0.0, 0.0});
  const auto conv = nfl::convolve(smooth, spike);
  double worst = 0.0;
  for (std::size_t i = 0; i < conv.size(); ++i) {
    worst = std::max(worst, std::abs(conv.values[i] - smooth.value_at(conv.point(i))));
  }
  CHECK(worst <= 1e-2);
}

TEST_CASE("convolution mass multiplies") {
  const auto a = uniform_grid(1.5, 1 << 12);
  nfl::DensitySpec spec;
  spec.family = "gaussian";
  spec.sigma = 0.3;
  spec.cut = 1.0;
  const auto b = nfl::build_density(spec, 1 << 12);
  CHECK(trapezoid_mass(nfl::convolve(a, b)) == Approx(1.0).margin(1e-6));
}

TEST_CASE("direct and transform convolutions agree") {
  const auto a = uniform_grid(1.0, 2048);
  nfl::DensitySpec spec;
  spec.family = "triangular";
  spec.beta = 0.7;
  const auto b = nfl::build_density_spaced(spec, a.spacing);

  nfl::ConvolveOptions direct;
  direct.force_direct = true;
  nfl::ConvolveOptions transform;
  transform.force_fft = true;
  const auto via_direct = nfl::convolve(a, b, direct);
  const auto via_fft = nfl::convolve(a, b, transform);
  REQUIRE(via_direct.size() == via_fft.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < via_direct.size(); ++i) {
    worst = std::max(worst, std::abs(via_direct.values[i] - via_fft.values[i]));
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("convolution respects the point budget") {
  const auto a = uniform_grid(1.0, 4096);
  nfl::ConvolveOptions options;
  options.point_budget = 1000;
  CHECK_THROWS_AS(nfl::convolve(a, a, options), nfl::ResolutionOverflow);
}

TEST_CASE("mismatched spacings are resampled, not rejected") {
  const auto a = uniform_grid(1.0, 2048);
  const auto b = uniform_grid(1.0, 1536);
  const auto conv = nfl::convolve(a, b);
  CHECK(trapezoid_mass(conv) == Approx(1.0).margin(1e-4));
  CHECK(conv.spacing == Approx(std::max(a.spacing, b.spacing)));
}

TEST_CASE("truncation at a threshold below the support is the identity") {
  const auto grid = uniform_grid(1.0, 4096);
  const auto result = nfl::truncate_renormalize(grid, -2.0, 0.0);
  CHECK(result.consistent);
  CHECK(result.removed_mass == 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(result.grid.values[i] == grid.values[i]);
  }
}

TEST_CASE("truncating a uniform reweights the survivors") {
  const auto grid = uniform_grid(1.0, 1 << 14);
  const auto result = nfl::truncate_renormalize(grid, -0.5, 0.25);
  CHECK(result.consistent);
  CHECK(result.removed_mass == Approx(0.25).margin(1e-3));
  CHECK(trapezoid_mass(result.grid) == Approx(1.0).margin(1e-3));
  CHECK(result.grid.value_at(0.4) == Approx(2.0 / 3).margin(1e-3));
  CHECK(result.grid.value_at(-0.7) == 0.0);
}

TEST_CASE("an inconsistent collapse probability is flagged") {
  const auto grid = uniform_grid(1.0, 4096);
  const auto result = nfl::truncate_renormalize(grid, -0.5, 0.1);  // true tail is 0.25
  CHECK_FALSE(result.consistent);
}

TEST_CASE("removing everything is an error") {
  const auto grid = uniform_grid(1.0, 4096);
  CHECK_THROWS_AS(nfl::truncate_renormalize(grid, 2.0, 0.5), nfl::DegenerateDensity);
  CHECK_THROWS_AS(nfl::truncate_renormalize(grid, 0.0, 1.0), nfl::DegenerateDensity);
}

TEST_CASE("tail_mass integrates the left tail") {
  // uniform(1.5) scaled by 0.5 has height 2/3 on [-0.75, 0.75]
  const auto scaled = nfl::scale_density(uniform_grid(1.5, 1 << 14), 0.5);
  CHECK(nfl::tail_mass(scaled, -0.5) == Approx(1.0 / 6).margin(1e-3));
  CHECK(nfl::tail_mass(scaled, -1.0) == 0.0);
  CHECK(nfl::tail_mass(scaled, 1.0) == Approx(1.0).margin(1e-6));
}

TEST_CASE("tail_mass grows with the cutoff") {
  nfl::DensitySpec spec;
  spec.family = "triangular";
  spec.beta = 1.2;
  const auto grid = nfl::build_density(spec, 4096);
  double previous = -1.0;
  for (double cutoff = -1.5; cutoff <= 1.5; cutoff += 0.05) {
    const double mass = nfl::tail_mass(grid, cutoff);
    CHECK(mass >= previous);
    previous = mass;
  }
}

TEST_CASE("the density pipeline reproduces the stage-1 hand integral") {
  const auto sys = nfl::validate_system({0.5, 0.5});
  nfl::DensitySpec spec;
  spec.family = "uniform";
  spec.beta = 1.5;
  const auto table =
      nfl::distribution_case2(sys, {spec}, nfl::repeated_address(1, 1), 1);
  REQUIRE(table.rows.size() == 1);
  CHECK(table.rows[0].nt == 1.0);
  CHECK(table.rows[0].c == Approx(1.0 / 6).margin(1e-3));
  CHECK(table.rows[0].le == table.rows[0].c);
}

TEST_CASE("nonnegative noise never collapses anything") {
  const auto sys = nfl::validate_system({0.5, 0.5});
  nfl::DensitySpec spec;
  spec.family = "tabulated";
  spec.x_min = 0.0;
  spec.x_max = 1.0;
  spec.values = std::vector<double>(256, 1.0);
  const auto table =
      nfl::distribution_case2(sys, {spec}, nfl::repeated_address(1, 5), 5);
  for (const auto& row : table.rows) CHECK(row.c == 0.0);
}

TEST_CASE("pipeline probabilities agree with Monte Carlo") {
  const auto sys = nfl::validate_system({0.5, 0.5});
  nfl::DensitySpec spec;
  spec.family = "uniform";
  spec.beta = 1.5;
  const auto table =
      nfl::distribution_case2(sys, {spec}, nfl::repeated_address(1, 6), 6);

  const nfl::NoiseModel noise = nfl::make_density_noise({spec}, 2);
  const auto mc = nfl::monte_carlo_distribution(sys, noise, nfl::AddressPolicy::cyclic(),
                                                200000, 6, 2024);
  for (std::size_t i = 0; i < 6; ++i) {
    const double se = std::max(mc.rows[i].stderr_, 1e-6);
    CHECK(std::abs(table.rows[i].c - mc.rows[i].estimate) <= 3.0 * se + 2e-3);
  }
}

TEST_CASE("halving the spacing barely moves the table") {
  const auto sys = nfl::validate_system({0.5, 0.5});
  nfl::DensitySpec spec;
  spec.family = "uniform";
  spec.beta = 1.5;
  nfl::Case2Options coarse;
  coarse.resolution = 1 << 12;
  nfl::Case2Options fine;
  fine.resolution = 1 << 13;
  const auto a = nfl::distribution_case2(sys, {spec}, nfl::repeated_address(1, 4), 4, coarse);
  const auto b = nfl::distribution_case2(sys, {spec}, nfl::repeated_address(1, 4), 4, fine);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(std::abs(a.rows[i].c - b.rows[i].c) <= 1e-3);
  }
}

TEST_CASE("mixed ratios and a triangular density still match Monte Carlo") {
  const auto sys = nfl::validate_system({0.5, 0.35});
  nfl::DensitySpec spec;
  spec.family = "triangular";
  spec.beta = 1.2;
  const auto addr = nfl::cyclic_address(2, 6);
  const auto table = nfl::distribution_case2(sys, {spec}, addr, 6);
  const nfl::NoiseModel noise = nfl::make_density_noise({spec}, 2);
  const auto mc = nfl::monte_carlo_distribution(sys, noise, nfl::AddressPolicy::cyclic(),
                                                150000, 6, 77);
  for (std::size_t i = 0; i < 6; ++i) {
    const double se = std::max(mc.rows[i].stderr_, 1e-9);
    CHECK(std::abs(table.rows[i].c - mc.rows[i].estimate) <= 4.0 * se + 1e-4);
  }
}

TEST_CASE("per-symbol densities propagate along the path") {
  const auto sys = nfl::validate_system({0.5, 0.4});
  nfl::DensitySpec a;
  a.family = "uniform";
  a.beta = 1.0;
  nfl::DensitySpec b;
  b.family = "gaussian";
  b.sigma = 0.5;
  b.cut = 1.5;
  const auto addr = nfl::cyclic_address(2, 5);
  const auto table = nfl::distribution_case2(sys, {a, b}, addr, 5);
  CHECK(table.rows[0].c == 0.0);  // uniform(1) scaled by 0.5 cannot reach -0.5
  const nfl::NoiseModel noise = nfl::make_density_noise({a, b}, 2);
  const auto mc = nfl::monte_carlo_distribution(sys, noise, nfl::AddressPolicy::cyclic(),
                                                150000, 5, 5);
  for (std::size_t i = 0; i < 5; ++i) {
    const double se = std::max(mc.rows[i].stderr_, 1e-9);
    CHECK(std::abs(table.rows[i].c - mc.rows[i].estimate) <= 4.0 * se + 1e-4);
  }
}

TEST_CASE("the pipeline can hand back its stage densities") {
  const auto sys = nfl::validate_system({0.5, 0.5});
  nfl::DensitySpec spec;
  spec.family = "uniform";
  spec.beta = 1.5;
  nfl::Case2Options options;
  std::vector<nfl::DensityGrid> densities;
  options.stage_densities = &densities;
  options.resolution = 1 << 10;
  nfl::distribution_case2(sys, {spec}, nfl::repeated_address(1, 3), 3, options);
  REQUIRE(densities.size() == 3);
  // pre-truncation stage densities are built from unit-mass inputs
  for (const auto& grid : densities) {
    CHECK(trapezoid_mass(grid) == Approx(1.0).margin(1e-5));
  }
}
