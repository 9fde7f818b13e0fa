#include "furst/rational.hpp"

#include <fmt/format.h>

#include <limits>

#include "furst/error.hpp"

namespace furst {

namespace {

__int128 gcd128(__int128 a, __int128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    const __int128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

bool fits64(__int128 v) {
  return v >= std::numeric_limits<std::int64_t>::min() && v <= std::numeric_limits<std::int64_t>::max();
}

}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw Error(ErrorKind::domain, "zero denominator");
  *this = reduce(num, den);
}

Rational Rational::reduce(__int128 num, __int128 den) {
  if (den == 0) throw Error(ErrorKind::domain, "zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const __int128 g = gcd128(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  if (num == 0) den = 1;
  if (!fits64(num) || !fits64(den)) throw Error(ErrorKind::overflow, "overflow");
  Rational r;
  r.num_ = static_cast<std::int64_t>(num);
  r.den_ = static_cast<std::int64_t>(den);
  return r;
}

std::string Rational::str() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

std::string Rational::decimal(int digits) const { return fmt::format("{:.{}f}", to_long_double(), digits); }

Rational operator+(const Rational& a, const Rational& b) {
  return Rational::reduce(static_cast<__int128>(a.num_) * b.den_ + static_cast<__int128>(b.num_) * a.den_,
                          static_cast<__int128>(a.den_) * b.den_);
}

Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }

Rational operator*(const Rational& a, const Rational& b) {
  // Cross-reduce first so products of already-reduced operands stay small.
  const __int128 g1 = gcd128(a.num_, b.den_);
  const __int128 g2 = gcd128(b.num_, a.den_);
  const __int128 n = (static_cast<__int128>(a.num_) / (g1 ? g1 : 1)) * (b.num_ / (g2 ? g2 : 1));
  const __int128 d = (static_cast<__int128>(a.den_) / (g2 ? g2 : 1)) * (b.den_ / (g1 ? g1 : 1));
  return Rational::reduce(n, d);
}

Rational operator/(const Rational& a, const Rational& b) {
  if (b.num_ == 0) throw Error(ErrorKind::domain, "division by zero");
  return a * Rational::reduce(b.den_, b.num_);
}

Rational Rational::operator-() const {
  if (num_ == std::numeric_limits<std::int64_t>::min()) throw Error(ErrorKind::overflow, "overflow");
  Rational r;
  r.num_ = -num_;
  r.den_ = den_;
  return r;
}

}  // namespace furst
