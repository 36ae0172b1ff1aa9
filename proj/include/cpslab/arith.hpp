#pragma once

// Dual arithmetic kernel. Tree-level algorithms are templates over a
// scalar field F; the two instantiations are:
//   - Rational (exact; verdicts are certified)
//   - double   (fast; verdicts carry an explicit tolerance)
// The traits below centralize the few places where the two behave
// differently (tolerances, conversions, sign tests).

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "cpslab/rational.hpp"

namespace cpslab {

enum class ArithMode { kRational, kFloat };

inline const char* arith_mode_name(ArithMode m) {
  return m == ArithMode::kRational ? "rational" : "float";
}

/// Node-count threshold above which the auto kernel switches to floats.
inline constexpr std::size_t kCertifiedNodeLimit = 200;

/// Comparison tolerance of the float kernel.
inline constexpr double kFloatTol = 1e-9;

/// Slack allowed when re-validating certificates under floats.
inline constexpr double kFloatCertSlack = 1e-7;

/// Pick the kernel: CPS_LAB_ARITH env var wins, otherwise size heuristic.
inline ArithMode select_arith_mode(std::size_t node_count) {
  if (const char* env = std::getenv("CPS_LAB_ARITH")) {
    std::string v(env);
    if (v == "rational") return ArithMode::kRational;
    if (v == "float") return ArithMode::kFloat;
  }
  return node_count <= kCertifiedNodeLimit ? ArithMode::kRational
                                           : ArithMode::kFloat;
}

template <class F>
struct arith_traits;

template <>
struct arith_traits<Rational> {
  static constexpr bool is_exact = true;
  static Rational zero() { return Rational(0); }
  static Rational one() { return Rational(1); }
  static Rational tol() { return Rational(0); }
  static Rational from_ratio(long num, long den) { return make_rational(num, den); }
  static Rational from_rational(const Rational& q) { return q; }
  static double to_dbl(const Rational& q) { return q.get_d(); }
  static std::string str(const Rational& q) { return to_string(q); }
};

template <>
struct arith_traits<double> {
  static constexpr bool is_exact = false;
  static double zero() { return 0.0; }
  static double one() { return 1.0; }
  static double tol() { return kFloatTol; }
  static double from_ratio(long num, long den) {
    return static_cast<double>(num) / static_cast<double>(den);
  }
  static double from_rational(const Rational& q) { return q.get_d(); }
  static double to_dbl(double x) { return x; }
  static std::string str(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
  }
};

/// x > 0 beyond kernel tolerance.
template <class F>
bool definitely_positive(const F& x) {
  return x > arith_traits<F>::tol();
}

/// x < 0 beyond kernel tolerance.
template <class F>
bool definitely_negative(const F& x) {
  return x < -arith_traits<F>::tol();
}

template <class F>
F positive_part(const F& x) {
  return x > F(0) ? x : F(0);
}

template <class F>
F negative_part(const F& x) {
  return x < F(0) ? F(-x) : F(0);
}

}  // namespace cpslab
