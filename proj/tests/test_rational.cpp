#include <catch2/catch_amalgamated.hpp>

#include "nfl/noise.hpp"
#include "nfl/rational.hpp"
#include "nfl/rng.hpp"

using nfl::Rational;

TEST_CASE("rationals reduce and normalize sign") {
  CHECK(Rational(2, 4) == Rational(1, 2));
  CHECK(Rational(-3, -9) == Rational(1, 3));
  CHECK(Rational(3, -9) == Rational(-1, 3));
  CHECK(Rational(0, 7) == Rational(0, 1));
  CHECK_THROWS_AS(Rational(1, 0), nfl::BadParameters);
}

TEST_CASE("rational parsing accepts fractions, integers and decimals") {
  CHECK(nfl::parse_rational("1/7") == Rational(1, 7));
  CHECK(nfl::parse_rational("6/8") == Rational(3, 4));
  CHECK(nfl::parse_rational("0") == Rational(0, 1));
  CHECK(nfl::parse_rational("1") == Rational(1, 1));
  CHECK(nfl::parse_rational("0.3") == Rational(3, 10));
  CHECK(nfl::parse_rational("0.125") == Rational(1, 8));
  CHECK_THROWS_AS(nfl::parse_rational(""), nfl::BadParameters);
  CHECK_THROWS_AS(nfl::parse_rational("a/b"), nfl::BadParameters);
  CHECK_THROWS_AS(nfl::parse_rational("1/0"), nfl::BadParameters);
}

TEST_CASE("rational ordering uses exact cross products") {
  CHECK(Rational(1, 3) < Rational(1, 2));
  CHECK(Rational(999999999999, 1000000000000) < Rational(1, 1));
  CHECK(Rational(1, 2) <= Rational(1, 2));
  CHECK(Rational(2, 3) > Rational(1, 2));
}

TEST_CASE("tent iterates follow the two branches exactly") {
  // 0.3 -> 0.6 -> 0.8 -> 0.4 -> 0.8 -> ...
  Rational x = nfl::parse_rational("0.3");
  x = nfl::tent_step(x);
  CHECK(x == Rational(3, 5));
  x = nfl::tent_step(x);
  CHECK(x == Rational(4, 5));
  x = nfl::tent_step(x);
  CHECK(x == Rational(2, 5));
  x = nfl::tent_step(x);
  CHECK(x == Rational(4, 5));
}

TEST_CASE("the boundary chain absorbs at zero") {
  Rational x(1, 2);
  x = nfl::tent_step(x);
  CHECK(x == Rational(1, 1));
  x = nfl::tent_step(x);
  CHECK(x == Rational(0, 1));
  x = nfl::tent_step(x);
  CHECK(x == Rational(0, 1));
}

TEST_CASE("1/7 reaches its period-3 cycle") {
  Rational x(1, 7);
  x = nfl::tent_step(x);
  CHECK(x == Rational(2, 7));
  x = nfl::tent_step(x);
  CHECK(x == Rational(4, 7));
  x = nfl::tent_step(x);
  CHECK(x == Rational(6, 7));
  x = nfl::tent_step(x);
  CHECK(x == Rational(2, 7));
}

TEST_CASE("tent iteration never grows the denominator") {
  nfl::SplitMix64 rng(17, 0);
  for (int rep = 0; rep < 200; ++rep) {
    const auto q = static_cast<std::int64_t>(2 + rng.below(5000));
    const auto p = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(q)));
    Rational x(p, q);
    const std::int64_t q0 = x.den;
    for (int n = 0; n < 64; ++n) {
      x = nfl::tent_step(x);
      CHECK(q0 % x.den == 0);
      CHECK(x >= Rational(0, 1));
      CHECK(x <= Rational(1, 1));
    }
  }
}
