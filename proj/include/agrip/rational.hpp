// Copyright 2026 The agrip Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <compare>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>

#include "agrip/error.hpp"

namespace agrip {

/// Exact fraction over 64-bit integers. Always reduced, denominator positive.
/// Intermediate products use 128-bit arithmetic; a result that does not fit
/// back into 64 bits raises CapExceeded rather than wrapping.
class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t value) : num_(value) {}  // NOLINT(google-explicit-constructor)
  Rational(std::int64_t num, std::int64_t den) { assign(num, den); }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  long double to_long_double() const {
    return static_cast<long double>(num_) / static_cast<long double>(den_);
  }

  bool is_zero() const { return num_ == 0; }

  /// Largest integer not exceeding the value.
  std::int64_t floor() const {
    std::int64_t q = num_ / den_;
    if (num_ % den_ != 0 && num_ < 0) --q;
    return q;
  }

  Rational abs() const { return num_ < 0 ? Rational(-num_, den_) : *this; }

  std::string str() const {
    return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
  }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return from_wide(static_cast<__int128>(a.num_) * b.den_ + static_cast<__int128>(b.num_) * a.den_,
                     static_cast<__int128>(a.den_) * b.den_);
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    return from_wide(static_cast<__int128>(a.num_) * b.den_ - static_cast<__int128>(b.num_) * a.den_,
                     static_cast<__int128>(a.den_) * b.den_);
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return from_wide(static_cast<__int128>(a.num_) * b.num_, static_cast<__int128>(a.den_) * b.den_);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    require(b.num_ != 0, ErrorKind::DivisionByZero, "rational division by zero");
    return from_wide(static_cast<__int128>(a.num_) * b.den_, static_cast<__int128>(a.den_) * b.num_);
  }
  Rational operator-() const { return Rational(-num_, den_); }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    const __int128 lhs = static_cast<__int128>(a.num_) * b.den_;
    const __int128 rhs = static_cast<__int128>(b.num_) * a.den_;
    if (lhs < rhs) return std::strong_ordering::less;
    if (lhs > rhs) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

  friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

 private:
  static __int128 gcd_wide(__int128 a, __int128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
      __int128 t = a % b;
      a = b;
      b = t;
    }
    return a;
  }

  static Rational from_wide(__int128 num, __int128 den) {
    require(den != 0, ErrorKind::DivisionByZero, "zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const __int128 g = gcd_wide(num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
    constexpr __int128 lim = static_cast<__int128>(INT64_MAX);
    require(num <= lim && num >= -lim && den <= lim, ErrorKind::CapExceeded,
            "rational value exceeds 64-bit range");
    Rational r;
    r.num_ = static_cast<std::int64_t>(num);
    r.den_ = static_cast<std::int64_t>(den);
    return r;
  }

  void assign(std::int64_t num, std::int64_t den) { *this = from_wide(num, den); }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

/// Integer square root (floor) of a non-negative value.
inline std::int64_t isqrt(std::int64_t v) {
  if (v <= 0) return 0;
  auto r = static_cast<std::int64_t>(std::sqrt(static_cast<long double>(v)));
  while (static_cast<__int128>(r) * r > v) --r;
  while (static_cast<__int128>(r + 1) * (r + 1) <= v) ++r;
  return r;
}

/// The non-negative square root of a rational. Coherence of a matrix whose
/// columns have different norms is sqrt(<a,b>^2 / (|a|^2 |b|^2)), so this is
/// the exact carrier for mu; it collapses to a Rational when the square is a
/// perfect square (always the case for constant-norm matrices).
class Surd {
 public:
  Surd() = default;
  static Surd from_square(Rational square) {
    require(square >= Rational(0), ErrorKind::InvalidArgument, "negative square");
    Surd s;
    s.square_ = square;
    return s;
  }
  static Surd from_rational(Rational value) { return from_square(value.abs() * value.abs()); }

  const Rational& square() const { return square_; }

  std::optional<Rational> rational() const {
    const std::int64_t rn = isqrt(square_.num());
    const std::int64_t rd = isqrt(square_.den());
    if (rn * rn == square_.num() && rd * rd == square_.den()) return Rational(rn, rd);
    return std::nullopt;
  }

  double to_double() const { return std::sqrt(square_.to_double()); }
  long double to_long_double() const { return std::sqrt(square_.to_long_double()); }
  bool is_zero() const { return square_.is_zero(); }

  std::string str() const {
    if (auto r = rational()) return r->str();
    return "sqrt(" + square_.str() + ")";
  }

  friend bool operator==(const Surd& a, const Surd& b) { return a.square_ == b.square_; }
  friend std::strong_ordering operator<=>(const Surd& a, const Surd& b) { return a.square_ <=> b.square_; }
  /// Comparison against a non-negative rational bound.
  friend std::strong_ordering operator<=>(const Surd& a, const Rational& b) {
    if (b < Rational(0)) return std::strong_ordering::greater;
    return a.square_ <=> b * b;
  }
  friend bool operator==(const Surd& a, const Rational& b) { return (a <=> b) == 0; }

  friend std::ostream& operator<<(std::ostream& os, const Surd& s) { return os << s.str(); }

 private:
  Rational square_;
};

}  // namespace agrip
