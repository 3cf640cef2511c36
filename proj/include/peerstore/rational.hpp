#pragma once

// Exact rational scalar used where game-theoretic verdicts must be computed
// with zero tolerance (Nash range tests, potential-difference identities).
// int64 numerator/denominator, always gcd-normalized with positive
// denominator; intermediates go through 128-bit integers and overflow raises.

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace peerstore {

class Rational {
 public:
  Rational() : num_(0), den_(1) {}
  Rational(long long n) : num_(n), den_(1) {}  // NOLINT: implicit on purpose
  Rational(int n) : num_(n), den_(1) {}        // NOLINT
  Rational(long long num, long long den) {
    if (den == 0) throw std::invalid_argument("Rational: zero denominator");
    __int128 n = num, d = den;
    normalize(n, d);
    num_ = clamp(n);
    den_ = clamp(d);
  }

  long long num() const { return num_; }
  long long den() const { return den_; }
  double value() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return make(i128(a.num_) * b.den_ + i128(b.num_) * a.den_, i128(a.den_) * b.den_);
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    return make(i128(a.num_) * b.den_ - i128(b.num_) * a.den_, i128(a.den_) * b.den_);
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return make(i128(a.num_) * b.num_, i128(a.den_) * b.den_);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw std::invalid_argument("Rational: division by zero");
    return make(i128(a.num_) * b.den_, i128(a.den_) * b.num_);
  }
  Rational operator-() const { return make(-i128(num_), i128(den_)); }
  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }
  Rational& operator*=(const Rational& o) { return *this = *this * o; }
  Rational& operator/=(const Rational& o) { return *this = *this / o; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
  friend bool operator<(const Rational& a, const Rational& b) {
    return i128(a.num_) * b.den_ < i128(b.num_) * a.den_;
  }
  friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
  friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
  friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

  std::string str() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
  }

 private:
  using i128 = __int128;

  static void normalize(i128& n, i128& d) {
    if (d < 0) { n = -n; d = -d; }
    const i128 g = gcd128(n < 0 ? -n : n, d);
    if (g > 1) { n /= g; d /= g; }
  }
  static i128 gcd128(i128 a, i128 b) {
    while (b != 0) { const i128 t = a % b; a = b; b = t; }
    return a == 0 ? 1 : a;
  }
  static long long clamp(i128 v) {
    if (v > INT64_MAX || v < INT64_MIN) throw std::overflow_error("Rational: overflow");
    return static_cast<long long>(v);
  }
  static Rational make(i128 n, i128 d) {
    normalize(n, d);
    Rational r;
    r.num_ = clamp(n);
    r.den_ = clamp(d);
    return r;
  }

  long long num_, den_;
};

}  // namespace peerstore
