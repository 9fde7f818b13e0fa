#pragma once

#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

#include "furst/folner.hpp"
#include "furst/set_spec.hpp"

namespace furst {

/// In-place iterative radix-2 FFT; size must be a power of two.
void fft(std::vector<std::complex<double>>& data, bool inverse);

struct PairCorrelation {
  /// (s, |{h in F_N : h in E and s*h in E}|) for every s in the sup-norm ball
  /// of radius H, in canonical order.
  std::vector<std::pair<GroupElement, std::uint64_t>> counts;
  /// False when the rounded FFT disagreed with the popcount kernel on the
  /// sampled shifts and the popcount result was used throughout.
  bool fft_verified = true;
};

/// Pair correlations via zero-padded FFT cross-correlation, rounded to the
/// nearest integer and spot-checked against the bit-parallel kernel.
/// Abelian groups with interval or box Folner shapes only.
PairCorrelation pair_correlation_fft(const SetSpec& set, const FolnerSpec& f, std::uint64_t n, std::int64_t radius,
                                     std::uint64_t check_seed = 0x5eed);

/// Same counts from shifted-AND popcounts.
PairCorrelation pair_correlation_popcount(const SetSpec& set, const FolnerSpec& f, std::uint64_t n,
                                          std::int64_t radius);

}  // namespace furst
