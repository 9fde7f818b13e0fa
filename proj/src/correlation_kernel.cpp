#include "furst/correlation_kernel.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "furst/density.hpp"
#include "furst/error.hpp"

namespace furst {

namespace {

void require_abelian(const FolnerSpec& f) {
  if (!f.group().abelian() || f.shape() == FolnerShape::heisenberg_box) {
    throw Error(ErrorKind::unsupported, "FFT path unsupported");
  }
}

std::uint64_t popcount_pair(const IndicatorWindow& w, const FolnerSpec& f, std::uint64_t n, const GroupElement& s) {
  const CorrelationQuery q({identity(f.group()), s});
  return intersection_count(w, q, f, n);
}

}  // namespace

void fft(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0) throw Error(ErrorKind::domain, "FFT size must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = 2 * std::numbers::pi / static_cast<double>(len) * (inverse ? 1 : -1);
    const std::size_t half = len / 2;
    // Twiddles computed directly per index; the recurrence drifts for large n.
    std::vector<std::complex<double>> w(half);
    for (std::size_t k = 0; k < half; ++k) w[k] = std::polar(1.0, ang * static_cast<double>(k));
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const auto u = a[i + k];
        const auto v = a[i + k + half] * w[k];
        a[i + k] = u + v;
        a[i + k + half] = u - v;
      }
    }
  }
  if (inverse) {
    for (auto& x : a) x /= static_cast<double>(n);
  }
}

PairCorrelation pair_correlation_popcount(const SetSpec& set, const FolnerSpec& f, std::uint64_t n,
                                          std::int64_t radius) {
  require_abelian(f);
  if (radius < 0) throw Error(ErrorKind::domain, "negative radius");
  const auto shifts = support_ball(f.group(), radius);
  const IndicatorWindow w = indicator_window(set, shifted_hull(f, n, shifts));
  PairCorrelation out;
  for (const auto& s : shifts) out.counts.emplace_back(s, popcount_pair(w, f, n, s));
  return out;
}

PairCorrelation pair_correlation_fft(const SetSpec& set, const FolnerSpec& f, std::uint64_t n, std::int64_t radius,
                                     std::uint64_t check_seed) {
  require_abelian(f);
  if (radius < 0) throw Error(ErrorKind::domain, "negative radius");
  const std::size_t rank = f.group().rank();
  const Box inner = f.set_box(n);
  Box outer = inner;
  for (std::size_t i = 0; i < rank; ++i) {
    outer.lo[i] -= radius;
    outer.hi[i] += radius;
  }
  const IndicatorWindow w = indicator_window(set, outer);

  // Flatten with the outer layout. The inner block sits `radius` away from every
  // face, so a shift of at most `radius` per axis never wraps into a neighbouring row.
  const std::size_t flat = static_cast<std::size_t>(outer.size());
  std::size_t size = 1;
  while (size < 2 * flat) size <<= 1;
  std::vector<std::complex<double>> a(size), b(size);
  for (std::size_t i = 0; i < flat; ++i) {
    if (!w.bits.test(i)) continue;
    b[i] = 1.0;
    if (inner.contains(outer.element_at(i))) a[i] = 1.0;
  }
  fft(a, false);
  fft(b, false);
  for (std::size_t i = 0; i < size; ++i) a[i] = std::conj(a[i]) * b[i];
  fft(a, true);  // a[s] = sum_x inner(x) * outer(x + s), s taken mod size

  std::vector<std::int64_t> stride(rank, 1);
  for (std::size_t i = rank - 1; i-- > 0;) stride[i] = stride[i + 1] * static_cast<std::int64_t>(outer.extent(i + 1));

  PairCorrelation out;
  for (const auto& s : support_ball(f.group(), radius)) {
    std::int64_t off = 0;
    for (std::size_t i = 0; i < rank; ++i) off += s[i] * stride[i];
    const std::size_t idx = off >= 0 ? static_cast<std::size_t>(off) : size - static_cast<std::size_t>(-off);
    const double v = a[idx].real();
    out.counts.emplace_back(s, static_cast<std::uint64_t>(std::llround(std::max(0.0, v))));
  }

  // Spot-check against the exact kernel; fall back entirely on any mismatch.
  std::mt19937_64 rng(check_seed);
  const std::size_t samples = std::min<std::size_t>(out.counts.size(), 8);
  for (std::size_t k = 0; k < samples; ++k) {
    const std::size_t pick = k == 0 ? out.counts.size() / 2 : static_cast<std::size_t>(rng() % out.counts.size());
    auto& [s, c] = out.counts[pick];
    if (popcount_pair(w, f, n, s) != c) {
      out = pair_correlation_popcount(set, f, n, radius);
      out.fft_verified = false;
      return out;
    }
  }
  return out;
}

}  // namespace furst
