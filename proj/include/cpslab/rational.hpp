#pragma once

// Exact rational scalar used by the certified arithmetic kernel.
// Thin layer over GMP's mpq_class: parsing from decimal / fraction
// strings and canonical serialization. All other arithmetic comes
// from gmpxx operators.

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace cpslab {

using Rational = mpq_class;

inline Rational make_rational(long num, long den = 1) {
  Rational q(num, den);
  q.canonicalize();
  return q;
}

/// Parse "3", "-1.25", "7/4" into an exact rational. Returns nullopt on
/// malformed input. Decimal strings are exact (1.25 -> 5/4), never rounded.
inline std::optional<Rational> parse_rational(const std::string& text) {
  if (text.empty()) return std::nullopt;
  std::string s = text;
  // fraction form "p/q"
  if (auto slash = s.find('/'); slash != std::string::npos) {
    try {
      Rational q(s);
      if (q.get_den() == 0) return std::nullopt;
      q.canonicalize();
      return q;
    } catch (const std::invalid_argument&) {
      return std::nullopt;
    }
  }
  // decimal form "[-]digits[.digits]"
  bool neg = false;
  std::size_t i = 0;
  if (s[i] == '+' || s[i] == '-') {
    neg = s[i] == '-';
    ++i;
  }
  std::string int_part, frac_part;
  for (; i < s.size() && s[i] != '.'; ++i) {
    if (s[i] < '0' || s[i] > '9') return std::nullopt;
    int_part += s[i];
  }
  if (i < s.size()) {  // skip '.'
    for (++i; i < s.size(); ++i) {
      if (s[i] < '0' || s[i] > '9') return std::nullopt;
      frac_part += s[i];
    }
  }
  if (int_part.empty() && frac_part.empty()) return std::nullopt;
  mpz_class num(int_part.empty() ? "0" : int_part);
  mpz_class den(1);
  for (char c : frac_part) {
    num *= 10;
    num += c - '0';
    den *= 10;
  }
  Rational q(num, den);
  q.canonicalize();
  if (neg) q = -q;
  return q;
}

/// Canonical "p/q" (or "p" when q == 1) form; stable across runs.
inline std::string to_string(const Rational& q) {
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

inline double to_double(const Rational& q) { return q.get_d(); }

}  // namespace cpslab
