#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <string>
#include <vector>

namespace furst {

inline constexpr std::size_t kMaxRank = 8;

enum class GroupKind : std::uint8_t { integers, lattice, heisenberg };

/// One of the three concrete amenable groups: Z, Z^d (1 <= d <= kMaxRank) or
/// the discrete Heisenberg group H3(Z).
class GroupSpec {
 public:
  GroupSpec() = default;

  static GroupSpec integers() { return GroupSpec(GroupKind::integers, 1); }
  static GroupSpec lattice(int d);
  static GroupSpec heisenberg() { return GroupSpec(GroupKind::heisenberg, 3); }

  GroupKind kind() const noexcept { return kind_; }
  /// Number of integer coordinates of an element.
  std::size_t rank() const noexcept { return static_cast<std::size_t>(rank_); }
  bool abelian() const noexcept { return kind_ != GroupKind::heisenberg; }

  /// "Z", "Z^d" or "H3"; also the token used in bitmask headers and configs.
  std::string name() const;
  static GroupSpec parse(const std::string& name);

  friend bool operator==(const GroupSpec&, const GroupSpec&) = default;

 private:
  GroupSpec(GroupKind kind, int rank) : kind_(kind), rank_(rank) {}

  GroupKind kind_ = GroupKind::integers;
  int rank_ = 1;
};

using Coords = std::array<std::int64_t, kMaxRank>;

/// Group element as a small value type. Coordinates beyond rank() are zero.
/// Ordering is lexicographic on coordinates, the canonical total order.
class GroupElement {
 public:
  GroupElement() = default;
  GroupElement(GroupSpec group, std::initializer_list<std::int64_t> coords);
  GroupElement(GroupSpec group, const std::vector<std::int64_t>& coords);
  GroupElement(GroupSpec group, const Coords& coords) : group_(group), c_(coords) {}

  static GroupElement integer(std::int64_t n) { return GroupElement(GroupSpec::integers(), {n}); }

  const GroupSpec& group() const noexcept { return group_; }
  std::size_t rank() const noexcept { return group_.rank(); }
  std::int64_t operator[](std::size_t i) const noexcept { return c_[i]; }
  std::int64_t& operator[](std::size_t i) noexcept { return c_[i]; }
  const Coords& coords() const noexcept { return c_; }

  bool is_identity() const noexcept;
  /// "3", "(1,-2)" or "(1,1,0)".
  std::string str() const;

  friend bool operator==(const GroupElement& a, const GroupElement& b) noexcept {
    return a.group_ == b.group_ && a.c_ == b.c_;
  }
  friend std::strong_ordering operator<=>(const GroupElement& a, const GroupElement& b) noexcept {
    return a.c_ <=> b.c_;
  }

 private:
  GroupSpec group_;
  Coords c_{};
};

GroupElement identity(const GroupSpec& group);
/// Group product g*h. Throws group_mismatch or overflow.
GroupElement mul(const GroupElement& g, const GroupElement& h);
GroupElement inv(const GroupElement& g);

/// Standard generators: unit vectors for Z^d; x=(1,0,0), y=(0,1,0) for H3.
std::vector<GroupElement> generators(const GroupSpec& group);
/// Elements of word length <= radius in the standard generators, sorted.
std::vector<GroupElement> word_ball(const GroupSpec& group, std::int64_t radius);
/// Support ball used by reports and spectra: sup-norm ball on Z and Z^d,
/// word-length ball on H3. Sorted canonically.
std::vector<GroupElement> support_ball(const GroupSpec& group, std::int64_t radius);
/// Max absolute coordinate; used to order tuples nearest-first.
std::int64_t sup_norm(const GroupElement& g) noexcept;

/// Axis-aligned box of coordinates with inclusive bounds. Every Folner set and
/// every materialized window is a Box. Elements are enumerated
/// lexicographically, last coordinate fastest, so rows along the last axis are
/// contiguous in the index.
struct Box {
  GroupSpec group;
  Coords lo{};
  Coords hi{};

  static Box empty_box(const GroupSpec& group);
  static Box interval(std::int64_t lo, std::int64_t hi);

  bool empty() const noexcept;
  std::uint64_t size() const;  // throws overflow
  std::uint64_t extent(std::size_t axis) const noexcept {
    return empty() ? 0 : static_cast<std::uint64_t>(hi[axis] - lo[axis] + 1);
  }
  bool contains(const GroupElement& g) const noexcept;
  bool contains(const Box& other) const noexcept;
  /// Position of g in the enumeration; g must be contained.
  std::uint64_t index_of(const GroupElement& g) const noexcept;
  GroupElement element_at(std::uint64_t index) const;
  GroupElement lower_corner() const { return GroupElement(group, lo); }

  friend bool operator==(const Box&, const Box&) = default;
};

/// Smallest box containing both.
Box hull(const Box& a, const Box& b);
/// Bounding box of the left translate g*B. Left multiplication is affine in
/// the coordinates of the right factor for all supported groups, so the
/// extremes occur at corners.
Box left_translate_bounds(const GroupElement& g, const Box& box);

/// Calls fn(element) for every element of the box in enumeration order.
void for_each_element(const Box& box, const std::function<void(const GroupElement&)>& fn);

}  // namespace furst

template <>
struct std::hash<furst::GroupElement> {
  std::size_t operator()(const furst::GroupElement& g) const noexcept {
    std::size_t h = 1469598103934665603ULL;
    for (std::size_t i = 0; i < g.rank(); ++i) {
      h ^= static_cast<std::size_t>(g[i]) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h;
  }
};
