#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "furst/group.hpp"
#include "furst/rational.hpp"

namespace furst {

enum class FolnerShape : std::uint8_t { interval, box, heisenberg_box };

/// Rule producing the (left) Folner set F_N for each N >= 1.
///   interval:       F_N = [start, start + N)            on Z
///   box:            F_N = anchor + [0, N)^d             on Z^d
///   heisenberg_box: F_N = {0 <= a,b < N, 0 <= c < N^2}  on H3
class FolnerSpec {
 public:
  static FolnerSpec interval(std::int64_t start = 1);
  static FolnerSpec box(const GroupElement& anchor);
  static FolnerSpec heisenberg_box();

  const GroupSpec& group() const noexcept { return group_; }
  FolnerShape shape() const noexcept { return shape_; }
  const GroupElement& anchor() const noexcept { return anchor_; }

  /// F_N as a coordinate box. Throws "empty Folner index" for N = 0.
  Box set_box(std::uint64_t n) const;
  std::string str() const;

  friend bool operator==(const FolnerSpec&, const FolnerSpec&) = default;

 private:
  FolnerSpec(FolnerShape shape, GroupElement anchor) : group_(anchor.group()), shape_(shape), anchor_(anchor) {}

  GroupSpec group_;
  FolnerShape shape_ = FolnerShape::interval;
  GroupElement anchor_;
};

/// F_N enumerated in canonical order.
std::vector<GroupElement> folner_set(const FolnerSpec& f, std::uint64_t n);

/// |F_N ^ gF_N| and |F_N| as exact integers.
struct FolnerDefect {
  std::uint64_t symmetric_difference = 0;
  std::uint64_t size = 0;
  Rational ratio() const;
};

/// Exact |F_N ^ gF_N| / |F_N|, computed in closed form from per-axis overlaps
/// (and a sum over b' for H3), so large N stays cheap.
FolnerDefect folner_defect(const FolnerSpec& f, std::uint64_t n, const GroupElement& g);

/// Bounding box of the union of g*F_N over the given shifts (F_N when none).
Box shifted_hull(const FolnerSpec& f, std::uint64_t n, const std::vector<GroupElement>& shifts);

}  // namespace furst
