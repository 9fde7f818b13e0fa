#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace furst {

/// Packed bit sequence, bit i stored at bit (i % 64) of word i / 64.
class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::size_t size) : size_(size), words_((size + 63) / 64, 0) {}

  std::size_t size() const noexcept { return size_; }
  bool test(std::size_t i) const noexcept { return (words_[i >> 6] >> (i & 63)) & 1u; }
  void set(std::size_t i, bool v = true) noexcept {
    const std::uint64_t m = std::uint64_t{1} << (i & 63);
    if (v) {
      words_[i >> 6] |= m;
    } else {
      words_[i >> 6] &= ~m;
    }
  }
  std::size_t count() const noexcept {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }

  /// 64 bits starting at an arbitrary bit offset; bits past size() read as 0.
  std::uint64_t extract64(std::size_t offset) const noexcept {
    const std::size_t q = offset >> 6;
    const unsigned r = offset & 63;
    if (q >= words_.size()) return 0;
    std::uint64_t lo = words_[q] >> r;
    if (r != 0 && q + 1 < words_.size()) lo |= words_[q + 1] << (64 - r);
    return lo;
  }

  std::span<const std::uint64_t> words() const noexcept { return words_; }
  std::span<std::uint64_t> words() noexcept { return words_; }

  friend bool operator==(const BitVector&, const BitVector&) = default;

 private:
  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

/// A run of `length` bits starting at `offset` in `bits`, optionally complemented.
struct BitRun {
  const BitVector* bits = nullptr;
  std::size_t offset = 0;
  bool complement = false;
};

/// Number of positions p < length where every run reads 1 (after complement).
/// With no runs every position counts.
inline std::uint64_t count_joint(std::span<const BitRun> runs, std::size_t length) noexcept {
  std::uint64_t total = 0;
  for (std::size_t w = 0; w * 64 < length; ++w) {
    std::uint64_t acc = ~std::uint64_t{0};
    for (const auto& run : runs) {
      std::uint64_t x = run.bits->extract64(run.offset + w * 64);
      if (run.complement) x = ~x;
      acc &= x;
    }
    const std::size_t left = length - w * 64;
    if (left < 64) acc &= (std::uint64_t{1} << left) - 1;
    total += static_cast<std::uint64_t>(std::popcount(acc));
  }
  return total;
}

}  // namespace furst
