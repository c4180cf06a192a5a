#include <cmath>

#include <catch2/catch_amalgamated.hpp>

#include "nfl/case1.hpp"

using Catch::Approx;

namespace {

const auto kQuarters = nfl::validate_system({0.25, 0.25});
const auto kNoise01 = nfl::make_trivalued({0.1, 0.1}, 2);
const auto kPath = nfl::repeated_address(1, 14);

}  // namespace

TEST_CASE("regimes order themselves along the path") {
  // bound = 0.25*0.1/0.75 = 1/30; products 1/4, 1/16, 1/64, 1/256
  CHECK(nfl::classify_regime(kQuarters, kNoise01, kPath, 1) ==
        nfl::Regime::NoCollapsePossible);
  CHECK(nfl::classify_regime(kQuarters, kNoise01, kPath, 2) ==
        nfl::Regime::NoCollapsePossible);
  CHECK(nfl::classify_regime(kQuarters, kNoise01, kPath, 3) == nfl::Regime::Transitional);
  CHECK(nfl::classify_regime(kQuarters, kNoise01, kPath, 4) == nfl::Regime::Deep);
  CHECK(nfl::classify_regime(kQuarters, kNoise01, kPath, 9) == nfl::Regime::Deep);
}

TEST_CASE("the deep regime refuses to run when the amplitude condition fails") {
  const auto halves = nfl::validate_system({0.5, 0.5});
  // bound = 0.1; products reach it at stage 5 (prod_4 = 1/16 <= 0.1)
  CHECK(nfl::classify_regime(halves, kNoise01, kPath, 4) == nfl::Regime::Transitional);
  CHECK_THROWS_AS(nfl::classify_regime(halves, kNoise01, kPath, 5),
                  nfl::Case1ConditionViolated);
  CHECK_THROWS_AS(nfl::distribution_case1(halves, kNoise01, kPath, 6),
                  nfl::Case1ConditionViolated);
}

TEST_CASE("le_case1 reproduces the three closed forms") {
  CHECK(nfl::le_case1(kQuarters, kNoise01, kPath, 1) == 0.0);
  CHECK(nfl::le_case1(kQuarters, kNoise01, kPath, 3) == Approx(0.265625));
  CHECK(nfl::le_case1(kQuarters, kNoise01, kPath, 4) == Approx(1.0 / 3));
}

TEST_CASE("distribution_case1 chains the recursion") {
  const auto table = nfl::distribution_case1(kQuarters, kNoise01, kPath, 4);
  REQUIRE(table.rows.size() == 4);
  CHECK(table.rows[0].nt == 1.0);
  CHECK(table.rows[0].c == 0.0);
  CHECK(table.rows[1].c == 0.0);
  CHECK(table.rows[2].c == Approx(0.265625));
  CHECK(table.rows[3].nt == Approx(1.0 - 0.265625));
  CHECK(table.rows[3].c == Approx(0.2447916666666667));
  for (const auto& row : table.rows) CHECK(row.ge == row.le);
}

TEST_CASE("a bound below every product keeps the table at zero") {
  const auto tiny = nfl::make_trivalued({1e-6, 1e-6}, 2);
  const auto table = nfl::distribution_case1(kQuarters, tiny, kPath, 6);
  for (const auto& row : table.rows) {
    CHECK(row.c == 0.0);
    CHECK(row.regime == nfl::Regime::NoCollapsePossible);
  }
}

TEST_CASE("table identities hold to machine precision") {
  const auto table = nfl::distribution_case1(kQuarters, kNoise01, kPath, 12);
  double cumulative = 0.0;
  double total = 0.0;
  for (const auto& row : table.rows) {
    CHECK(row.nt == Approx(1.0 - cumulative).margin(1e-15));
    CHECK(row.c == Approx(row.nt * row.le).margin(1e-15));
    CHECK(row.le >= 0.0);
    CHECK(row.le <= 1.0);
    CHECK(row.nt >= 0.0);
    CHECK(row.nt <= 1.0);
    cumulative += row.c;
    total += row.c;
  }
  CHECK(total <= 1.0);
}

TEST_CASE("enumeration counts the first collapse of every ternary sequence") {
  const auto result = nfl::exact_enumeration(kQuarters, kNoise01, kPath, 6);
  // no collapse can happen while the product dominates the envelope
  CHECK(result.first_collapse[1] == 0);
  CHECK(result.first_collapse[2] == 0);
  // at stage 3 every surviving lineage collapses exactly on the negative kick
  CHECK(result.first_collapse[3] == 9);
  CHECK(result.table.rows[2].c == Approx(1.0 / 3));
  CHECK(result.survivors[0] == 1);
  CHECK(result.survivors[3] == 18);
}

TEST_CASE("deep-regime conditional collapse is exactly one third") {
  const auto result = nfl::exact_enumeration(kQuarters, kNoise01, kPath, 12);
  for (int stage = 4; stage <= 12; ++stage) {
    const auto s = static_cast<std::size_t>(stage);
    // integer identity: collapses equal the survivors entering the stage
    CHECK(result.first_collapse[s] == result.survivors[s - 1]);
    CHECK(result.table.rows[s - 1].le == Approx(1.0 / 3).margin(1e-15));
  }
}

TEST_CASE("enumeration works even where the closed forms do not") {
  const auto halves = nfl::validate_system({0.5, 0.5});
  const auto result = nfl::exact_enumeration(halves, kNoise01, kPath, 8);
  double total = 0.0;
  for (const auto& row : result.table.rows) total += row.c;
  CHECK(total <= 1.0);
  CHECK(total > 0.0);
}

TEST_CASE("enumeration enforces its stage budget") {
  CHECK_THROWS_AS(nfl::exact_enumeration(kQuarters, kNoise01, kPath, 15),
                  nfl::BudgetExceeded);
  CHECK_THROWS_AS(nfl::exact_enumeration(kQuarters, kNoise01, kPath, 0), nfl::BadParameters);
}

TEST_CASE("the transitional approximation sharpens as the amplitude shrinks") {
  double previous = 1.0;
  for (double amplitude : {0.1, 0.05, 0.01}) {
    const auto noise = nfl::make_trivalued({amplitude, amplitude}, 2);
    const auto exact = nfl::exact_enumeration(kQuarters, noise, kPath, 6);
    double worst = 0.0;
    for (int stage = 1; stage <= 6; ++stage) {
      const double analytic = nfl::le_case1(kQuarters, noise, kPath, stage);
      const double reference = exact.table.rows[static_cast<std::size_t>(stage - 1)].le;
      worst = std::max(worst, std::abs(analytic - reference));
    }
    CHECK(worst <= previous);
    previous = worst;
  }
}

TEST_CASE("deep-regime counting stays exact for three maps with distinct amplitudes") {
  const auto sys = nfl::validate_system({0.25, 0.2, 0.15});
  const auto noise = nfl::make_trivalued({0.1, 0.09, 0.12}, 3);
  REQUIRE(nfl::validate_case1(sys, noise).holds);
  const auto addr = nfl::cyclic_address(3, 10);
  const auto exact = nfl::exact_enumeration(sys, noise, addr, 10);
  for (int stage = 4; stage <= 10; ++stage) {
    const auto s = static_cast<std::size_t>(stage);
    CHECK(exact.table.rows[s - 1].regime == nfl::Regime::Deep);
    CHECK(exact.first_collapse[s] == exact.survivors[s - 1]);
  }
  // the closed-form table tracks the oracle to within half a percent here
  const auto analytic = nfl::distribution_case1(sys, noise, addr, 10);
  double cumulative_analytic = 0.0;
  double cumulative_exact = 0.0;
  for (int stage = 0; stage < 10; ++stage) {
    cumulative_analytic += analytic.rows[static_cast<std::size_t>(stage)].c;
    cumulative_exact += exact.table.rows[static_cast<std::size_t>(stage)].c;
  }
  CHECK(cumulative_analytic == Approx(cumulative_exact).epsilon(0.01));
}

TEST_CASE("mixed systems evaluate the bound with the extreme parameters") {
  const auto sys = nfl::validate_system({0.25, 0.2});
  const auto noise = nfl::make_trivalued({0.1, 0.08}, 2);
  // bound uses xi_max = 0.25 and delta_max = 0.1 regardless of the path
  const auto addr = nfl::cyclic_address(2, 10);
  const auto table = nfl::distribution_case1(sys, noise, addr, 6);
  double cumulative = 0.0;
  for (const auto& row : table.rows) {
    CHECK(row.c == Approx(row.nt * row.le).margin(1e-15));
    cumulative += row.c;
  }
  CHECK(cumulative <= 1.0);
}
