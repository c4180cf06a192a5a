#pragma once

#include <cstdint>
#include <numeric>
#include <string>

#include "nfl/errors.hpp"

namespace nfl {

// Exact rational with 64-bit numerator/denominator, always reduced and with
// den > 0. Large enough for every orbit iterated here: the tent map never
// grows a denominator.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;

  Rational(std::int64_t n, std::int64_t d) : num(n), den(d) {
    if (den == 0) throw BadParameters("rational with zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }

  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }

  bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
  bool operator!=(const Rational& o) const { return !(*this == o); }

  bool operator<(const Rational& o) const {
    return static_cast<__int128>(num) * o.den < static_cast<__int128>(o.num) * den;
  }
  bool operator<=(const Rational& o) const { return !(o < *this); }
  bool operator>(const Rational& o) const { return o < *this; }
  bool operator>=(const Rational& o) const { return !(*this < o); }

  std::string str() const {
    if (den == 1) return std::to_string(num);
    return std::to_string(num) + "/" + std::to_string(den);
  }
};

// Accepts "p/q", plain integers ("0", "1") and finite decimals ("0.125"),
// all converted exactly.
inline Rational parse_rational(const std::string& text) {
  if (text.empty()) throw BadParameters("empty rational literal");
  const auto bad = [&] { return BadParameters("malformed rational literal: " + text); };

  const auto parse_int = [&](const std::string& s) -> std::int64_t {
    if (s.empty() || s.size() > 18) throw bad();
    std::size_t i = 0;
    bool neg = false;
    if (s[0] == '-' || s[0] == '+') {
      neg = s[0] == '-';
      i = 1;
      if (s.size() == 1) throw bad();
    }
    std::int64_t v = 0;
    for (; i < s.size(); ++i) {
      if (s[i] < '0' || s[i] > '9') throw bad();
      v = v * 10 + (s[i] - '0');
    }
    return neg ? -v : v;
  };

  const auto slash = text.find('/');
  if (slash != std::string::npos) {
    const std::int64_t p = parse_int(text.substr(0, slash));
    const std::int64_t q = parse_int(text.substr(slash + 1));
    if (q == 0) throw bad();
    return Rational(p, q);
  }

  const auto dot = text.find('.');
  if (dot != std::string::npos) {
    const std::string head = dot == 0 ? "0" : text.substr(0, dot);
    const std::string tail = text.substr(dot + 1);
    if (tail.empty() || tail.size() > 17) throw bad();
    std::int64_t scale = 1;
    for (std::size_t i = 0; i < tail.size(); ++i) scale *= 10;
    const std::int64_t whole = parse_int(head);
    const std::int64_t frac = parse_int(tail);
    if (frac < 0) throw bad();
    const std::int64_t sign = (whole < 0 || head[0] == '-') ? -1 : 1;
    const std::int64_t mag = (whole < 0 ? -whole : whole);
    return Rational(sign * (mag * scale + frac), scale);
  }

  return Rational(parse_int(text), 1);
}

}  // namespace nfl
