#include "furst/circle.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <regex>

#include "furst/error.hpp"

namespace furst {

namespace {

namespace mp = boost::multiprecision;

const mp::cpp_int& two128() {
  static const mp::cpp_int v = mp::cpp_int(1) << 128;
  return v;
}

mp::cpp_int floor_div(const mp::cpp_int& a, const mp::cpp_int& b) {
  mp::cpp_int q = a / b;  // truncates toward zero
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

u128 reduce_mod_one(const mp::cpp_int& scaled) {
  mp::cpp_int m = scaled % two128();
  if (m < 0) m += two128();
  u128 out = 0;
  for (int limb = 3; limb >= 0; --limb) {
    const auto part = static_cast<std::uint32_t>((m >> (32 * limb)) & 0xffffffffu);
    out = (out << 32) | part;
  }
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  const auto e = s.find_last_not_of(" \t");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

}  // namespace

CirclePoint CirclePoint::from_double(double x) {
  const double frac = x - std::floor(x);
  return {static_cast<u128>(std::ldexp(frac, 128))};
}

double CirclePoint::to_double() const noexcept { return std::ldexp(static_cast<double>(raw), -128); }

long double CirclePoint::to_long_double() const noexcept {
  return std::ldexp(static_cast<long double>(raw), -128);
}

long double QuadraticSurd::approx() const {
  return (static_cast<long double>(p) + static_cast<long double>(q) * std::sqrt(static_cast<long double>(d))) /
         static_cast<long double>(r);
}

RealParam RealParam::parse(const std::string& raw_text) {
  const std::string text = trim(raw_text);
  if (text == "golden") {
    RealParam p = from_surd(QuadraticSurd::golden());
    p.text_ = text;
    return p;
  }
  static const std::regex surd_re(R"(quadratic\(\s*([+-]?\d+)\s*,\s*([+-]?\d+)\s*,\s*(\d+)\s*,\s*([+-]?\d+)\s*\))");
  std::smatch m;
  if (std::regex_match(text, m, surd_re)) {
    QuadraticSurd s{std::stoll(m[1]), std::stoll(m[2]), std::stoll(m[3]), std::stoll(m[4])};
    RealParam p = from_surd(s);
    p.text_ = text;
    return p;
  }
  static const std::regex dec_re(R"(([+-]?)(\d*)(?:\.(\d*))?(?:[eE]([+-]?\d+))?)");
  if (!std::regex_match(text, m, dec_re) || (m[2].length() == 0 && m[3].length() == 0)) {
    throw Error(ErrorKind::domain, "malformed real '" + text + "'");
  }
  const std::string int_part = m[2].str();
  const std::string frac_part = m[3].str();
  const long exp10 = (m[4].matched ? std::stol(m[4].str()) : 0) - static_cast<long>(frac_part.size());
  if (exp10 > 400 || exp10 < -400) throw Error(ErrorKind::domain, "real out of range '" + text + "'");
  // cpp_int reads a leading 0 as an octal prefix.
  std::string digits = (int_part + frac_part);
  digits.erase(0, std::min(digits.find_first_not_of('0'), digits.size()));
  mp::cpp_int mant(digits.empty() ? std::string("0") : digits);
  if (m[1] == "-") mant = -mant;
  mp::cpp_int num = mant;
  mp::cpp_int den = 1;
  if (exp10 >= 0) {
    num *= mp::pow(mp::cpp_int(10), static_cast<unsigned>(exp10));
  } else {
    den = mp::pow(mp::cpp_int(10), static_cast<unsigned>(-exp10));
  }
  RealParam p;
  p.text_ = text;
  p.value_ = std::stold(text);
  p.is_one_ = (num == den);
  p.point_.raw = reduce_mod_one(floor_div(num * two128(), den));
  return p;
}

RealParam RealParam::from_double(double x) {
  RealParam p;
  p.point_ = CirclePoint::from_double(x);
  p.value_ = x;
  p.is_one_ = (x == 1.0);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  p.text_ = buf;
  return p;
}

RealParam RealParam::from_surd(const QuadraticSurd& s) {
  if (s.r == 0 || s.d <= 0) throw Error(ErrorKind::domain, "invalid quadratic surd");
  const mp::cpp_int root_scaled = mp::sqrt(mp::cpp_int(s.d) << 384);  // floor(sqrt(d) * 2^192)
  if (root_scaled * root_scaled == (mp::cpp_int(s.d) << 384)) {
    throw Error(ErrorKind::domain, "quadratic surd with square discriminant is rational");
  }
  const mp::cpp_int scaled192 = (mp::cpp_int(s.p) << 192) + mp::cpp_int(s.q) * root_scaled;
  RealParam p;
  p.point_.raw = reduce_mod_one(floor_div(scaled192, mp::cpp_int(s.r) << 64));
  p.value_ = s.approx();
  p.surd_ = s;
  p.text_ = "quadratic(" + std::to_string(s.p) + "," + std::to_string(s.q) + "," + std::to_string(s.d) + "," +
            std::to_string(s.r) + ")";
  return p;
}

std::optional<std::int64_t> small_denominator(CirclePoint x, std::int64_t max_q) {
  const u128 threshold = u128{1} << 64;
  for (std::int64_t q = 1; q <= max_q; ++q) {
    const u128 y = (q * x).raw;
    const u128 dist = y < (u128{0} - y) ? y : (u128{0} - y);
    if (dist < threshold) return q;
  }
  return std::nullopt;
}

}  // namespace furst
