#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace furst {

using u128 = unsigned __int128;

/// Point of R/Z stored as a 128-bit fixed-point fraction: value = raw / 2^128.
/// Addition and integer multiples wrap mod 1 exactly.
struct CirclePoint {
  u128 raw = 0;

  static CirclePoint from_double(double x);
  double to_double() const noexcept;
  long double to_long_double() const noexcept;

  friend CirclePoint operator+(CirclePoint a, CirclePoint b) noexcept { return {a.raw + b.raw}; }
  friend CirclePoint operator-(CirclePoint a, CirclePoint b) noexcept { return {a.raw - b.raw}; }
  friend CirclePoint operator*(std::int64_t n, CirclePoint a) noexcept {
    return {static_cast<u128>(static_cast<__int128>(n)) * a.raw};
  }
  friend bool operator==(CirclePoint, CirclePoint) = default;
};

/// (p + q*sqrt(d)) / r with d > 0 not a perfect square; kept symbolically so the
/// fixed-point value can be computed to full precision.
struct QuadraticSurd {
  std::int64_t p = 0;
  std::int64_t q = 1;
  std::int64_t d = 5;
  std::int64_t r = 1;

  static QuadraticSurd golden() { return {-1, 1, 5, 2}; }  // (sqrt(5) - 1) / 2
  long double approx() const;
  friend bool operator==(const QuadraticSurd&, const QuadraticSurd&) = default;
};

/// A real parameter given by its exact decimal text or a quadratic surd.
/// `point` is the value mod 1; `value` the (unreduced) real for range checks
/// and display.
class RealParam {
 public:
  RealParam() = default;
  /// Accepts a decimal literal ("0.5", "-1e-3", "0.6180339887498948482045868"),
  /// "golden", or "quadratic(p,q,d,r)". Throws on malformed text.
  static RealParam parse(const std::string& text);
  static RealParam from_double(double x);
  static RealParam from_surd(const QuadraticSurd& s);

  CirclePoint point() const noexcept { return point_; }
  long double value() const noexcept { return value_; }
  const std::string& text() const noexcept { return text_; }
  const std::optional<QuadraticSurd>& surd() const noexcept { return surd_; }
  /// True when value is exactly 1 (used for beta = 1, the full circle).
  bool is_one() const noexcept { return is_one_; }

  friend bool operator==(const RealParam& a, const RealParam& b) noexcept {
    return a.point_ == b.point_ && a.is_one_ == b.is_one_ && a.value_ == b.value_;
  }

 private:
  CirclePoint point_{};
  long double value_ = 0;
  std::string text_;
  std::optional<QuadraticSurd> surd_;
  bool is_one_ = false;
};

/// Smallest q <= max_q with ||q * x|| below 2^-64, if any. Rotation angles for
/// which this exists are rejected as (numerically) rational.
std::optional<std::int64_t> small_denominator(CirclePoint x, std::int64_t max_q);

}  // namespace furst
