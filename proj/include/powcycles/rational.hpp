#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "powcycles/errors.hpp"

namespace powcycles {

// Exact non-negative rational with 64-bit numerator/denominator, always kept
// reduced. Intermediates run in 128 bits; a result that no longer fits in 64
// bits throws WidthError instead of wrapping. Every quantity in this library
// (cycle counts, phi/order ratios, m/lambda bounds) is non-negative, so no
// sign is carried.
class Rational {
 public:
  using u64 = std::uint64_t;
  using u128 = unsigned __int128;

  constexpr Rational() = default;
  constexpr Rational(u64 n) : num_(n) {}  // NOLINT: implicit by design
  Rational(u64 num, u64 den) { *this = from_wide(num, den); }

  static Rational from_wide(u128 num, u128 den) {
    if (den == 0) throw std::domain_error("rational: zero denominator");
    u128 g = gcd_wide(num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
    Rational r;
    r.num_ = narrow(num);
    r.den_ = narrow(den);
    return r;
  }

  u64 num() const { return num_; }
  u64 den() const { return den_; }
  bool is_integer() const { return den_ == 1; }
  bool is_zero() const { return num_ == 0; }

  double to_double() const {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }

  // "a/b", or just "a" when the value is an integer.
  std::string str() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
  }

  friend Rational operator+(const Rational& a, const Rational& b) {
    u128 lhs = static_cast<u128>(a.num_) * b.den_;
    u128 rhs = static_cast<u128>(b.num_) * a.den_;
    u128 num = lhs + rhs;
    if (num < lhs) throw WidthError("rational addition overflow");
    return from_wide(num, static_cast<u128>(a.den_) * b.den_);
  }

  friend Rational operator*(const Rational& a, const Rational& b) {
    return from_wide(static_cast<u128>(a.num_) * b.num_,
                     static_cast<u128>(a.den_) * b.den_);
  }

  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator*=(const Rational& o) { return *this = *this * o; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator!=(const Rational& a, const Rational& b) {
    return !(a == b);
  }
  friend bool operator<(const Rational& a, const Rational& b) {
    return static_cast<u128>(a.num_) * b.den_ <
           static_cast<u128>(b.num_) * a.den_;
  }
  friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
  friend bool operator<=(const Rational& a, const Rational& b) {
    return !(b < a);
  }
  friend bool operator>=(const Rational& a, const Rational& b) {
    return !(a < b);
  }

 private:
  static u128 gcd_wide(u128 a, u128 b) {
    while (b != 0) {
      u128 t = a % b;
      a = b;
      b = t;
    }
    return a;
  }

  static u64 narrow(u128 v) {
    if (v > static_cast<u128>(~static_cast<u64>(0)))
      throw WidthError("rational component exceeds 64 bits");
    return static_cast<u64>(v);
  }

  u64 num_ = 0;
  u64 den_ = 1;
};

}  // namespace powcycles
