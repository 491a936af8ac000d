#pragma once

// Exact rationals (GMP) and the "number that may or may not be exact" used by
// every file format in the toolkit.

#include <gmpxx.h>

#include <cctype>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ctxkit/error.hpp"

namespace ctxkit {

using Rational = mpq_class;

/// Parses "p/q", "p", or "-p/q". Throws ErrorKind::input on anything else.
inline Rational parse_rational(std::string_view text) {
  std::string s(text);
  auto strip = [](std::string& v) {
    while (!v.empty() && std::isspace(static_cast<unsigned char>(v.front()))) v.erase(v.begin());
    while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.pop_back();
  };
  strip(s);
  auto valid_int = [](const std::string& v) {
    if (v.empty()) return false;
    std::size_t i = (v[0] == '-' || v[0] == '+') ? 1 : 0;
    if (i == v.size()) return false;
    for (; i < v.size(); ++i)
      if (!std::isdigit(static_cast<unsigned char>(v[i]))) return false;
    return true;
  };
  auto slash = s.find('/');
  std::string num = s.substr(0, slash);
  std::string den = slash == std::string::npos ? "1" : s.substr(slash + 1);
  strip(num);
  strip(den);
  if (!valid_int(num) || !valid_int(den) || den[0] == '-')
    fail(ErrorKind::input, "not a rational literal: \"" + s + "\"");
  if (num[0] == '+') num.erase(num.begin());
  if (den[0] == '+') den.erase(den.begin());
  Rational r(mpz_class(num, 10), mpz_class(den, 10));
  if (r.get_den() == 0) fail(ErrorKind::input, "zero denominator in \"" + s + "\"");
  r.canonicalize();
  return r;
}

inline std::string to_string(const Rational& r) {
  Rational c = r;
  c.canonicalize();
  return c.get_str(10);
}

inline double to_double(const Rational& r) { return r.get_d(); }

/// Best rational approximation with denominator <= max_den by continued
/// fractions; returns it only if it lies within tol of x.
inline std::optional<Rational> recognize_rational(double x, long max_den = 1024,
                                                  double tol = 1e-12) {
  if (!std::isfinite(x)) return std::nullopt;
  long sign = x < 0 ? -1 : 1;
  double v = std::fabs(x);
  long h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  double rem = v;
  for (int it = 0; it < 64; ++it) {
    double a_d = std::floor(rem);
    if (a_d > 1e15) break;
    long a = static_cast<long>(a_d);
    long h2 = a * h1 + h0;
    long k2 = a * k1 + k0;
    if (k2 > max_den) break;
    h0 = h1; h1 = h2; k0 = k1; k1 = k2;
    if (std::fabs(static_cast<double>(h1) / static_cast<double>(k1) - v) <= tol) {
      Rational r(sign * h1, k1);
      r.canonicalize();
      return r;
    }
    double frac = rem - a_d;
    if (frac < 1e-300) break;
    rem = 1.0 / frac;
  }
  return std::nullopt;
}

/// A probability-like quantity read from a file: always has a double value,
/// and carries an exact rational when the source was an integer or "p/q".
struct Number {
  double value = 0.0;
  std::optional<Rational> exact;

  Number() = default;
  explicit Number(double v) : value(v) {}
  explicit Number(const Rational& r) : value(r.get_d()), exact(r) {}

  bool is_exact() const { return exact.has_value(); }
};

inline bool all_exact(const std::vector<Number>& xs) {
  for (const auto& x : xs)
    if (!x.is_exact()) return false;
  return true;
}

inline std::vector<double> values_of(const std::vector<Number>& xs) {
  std::vector<double> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(x.value);
  return out;
}

}  // namespace ctxkit
