#include "furst/group.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include "furst/error.hpp"

namespace furst {

namespace {

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw Error(ErrorKind::overflow, "overflow");
  return r;
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw Error(ErrorKind::overflow, "overflow");
  return r;
}

std::int64_t checked_neg(std::int64_t a) { return checked_mul(a, -1); }

void require_same(const GroupSpec& a, const GroupSpec& b) {
  if (!(a == b)) throw Error(ErrorKind::group_mismatch, "group mismatch");
}

}  // namespace

GroupSpec GroupSpec::lattice(int d) {
  if (d < 1 || d > static_cast<int>(kMaxRank)) {
    throw Error(ErrorKind::domain, "lattice dimension must be in [1, " + std::to_string(kMaxRank) + "]");
  }
  return GroupSpec(GroupKind::lattice, d);
}

std::string GroupSpec::name() const {
  switch (kind_) {
    case GroupKind::integers: return "Z";
    case GroupKind::lattice: return "Z^" + std::to_string(rank_);
    case GroupKind::heisenberg: return "H3";
  }
  return "?";
}

GroupSpec GroupSpec::parse(const std::string& name) {
  if (name == "Z") return integers();
  if (name == "H3") return heisenberg();
  if (name.size() > 2 && name.rfind("Z^", 0) == 0) {
    const std::string digits = name.substr(2);
    if (!digits.empty() && std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      return lattice(std::stoi(digits));
    }
  }
  throw Error(ErrorKind::domain, "unknown group '" + name + "'");
}

GroupElement::GroupElement(GroupSpec group, std::initializer_list<std::int64_t> coords) : group_(group) {
  if (coords.size() != group.rank()) throw Error(ErrorKind::domain, "coordinate count does not match group rank");
  std::copy(coords.begin(), coords.end(), c_.begin());
}

GroupElement::GroupElement(GroupSpec group, const std::vector<std::int64_t>& coords) : group_(group) {
  if (coords.size() != group.rank()) throw Error(ErrorKind::domain, "coordinate count does not match group rank");
  std::copy(coords.begin(), coords.end(), c_.begin());
}

bool GroupElement::is_identity() const noexcept {
  return std::all_of(c_.begin(), c_.end(), [](std::int64_t v) { return v == 0; });
}

std::string GroupElement::str() const {
  if (rank() == 1) return std::to_string(c_[0]);
  std::string s = "(";
  for (std::size_t i = 0; i < rank(); ++i) {
    if (i) s += ',';
    s += std::to_string(c_[i]);
  }
  return s + ")";
}

GroupElement identity(const GroupSpec& group) { return GroupElement(group, Coords{}); }

GroupElement mul(const GroupElement& g, const GroupElement& h) {
  require_same(g.group(), h.group());
  GroupElement out = g;
  switch (g.group().kind()) {
    case GroupKind::integers:
    case GroupKind::lattice:
      for (std::size_t i = 0; i < g.rank(); ++i) out[i] = checked_add(g[i], h[i]);
      break;
    case GroupKind::heisenberg:
      // (a,b,c)*(a',b',c') = (a+a', b+b', c+c'+a*b')
      out[0] = checked_add(g[0], h[0]);
      out[1] = checked_add(g[1], h[1]);
      out[2] = checked_add(checked_add(g[2], h[2]), checked_mul(g[0], h[1]));
      break;
  }
  return out;
}

GroupElement inv(const GroupElement& g) {
  GroupElement out = g;
  switch (g.group().kind()) {
    case GroupKind::integers:
    case GroupKind::lattice:
      for (std::size_t i = 0; i < g.rank(); ++i) out[i] = checked_neg(g[i]);
      break;
    case GroupKind::heisenberg:
      // (a,b,c)^-1 = (-a, -b, a*b - c)
      out[0] = checked_neg(g[0]);
      out[1] = checked_neg(g[1]);
      out[2] = checked_add(checked_mul(g[0], g[1]), checked_neg(g[2]));
      break;
  }
  return out;
}

std::vector<GroupElement> generators(const GroupSpec& group) {
  std::vector<GroupElement> gens;
  const std::size_t n = group.kind() == GroupKind::heisenberg ? 2 : group.rank();
  for (std::size_t i = 0; i < n; ++i) {
    Coords c{};
    c[i] = 1;
    gens.emplace_back(group, c);
  }
  return gens;
}

std::vector<GroupElement> word_ball(const GroupSpec& group, std::int64_t radius) {
  if (radius < 0) throw Error(ErrorKind::domain, "negative radius");
  std::vector<GroupElement> steps;
  for (const auto& s : generators(group)) {
    steps.push_back(s);
    steps.push_back(inv(s));
  }
  std::set<GroupElement> seen{identity(group)};
  std::vector<GroupElement> frontier{identity(group)};
  for (std::int64_t r = 0; r < radius; ++r) {
    std::vector<GroupElement> next;
    for (const auto& g : frontier) {
      for (const auto& s : steps) {
        auto h = mul(g, s);
        if (seen.insert(h).second) next.push_back(h);
      }
    }
    frontier = std::move(next);
  }
  return {seen.begin(), seen.end()};
}

std::vector<GroupElement> support_ball(const GroupSpec& group, std::int64_t radius) {
  if (radius < 0) throw Error(ErrorKind::domain, "negative radius");
  if (group.kind() == GroupKind::heisenberg) return word_ball(group, radius);
  Box box{group, {}, {}};
  for (std::size_t i = 0; i < group.rank(); ++i) {
    box.lo[i] = -radius;
    box.hi[i] = radius;
  }
  std::vector<GroupElement> out;
  for_each_element(box, [&](const GroupElement& g) { out.push_back(g); });
  return out;
}

std::int64_t sup_norm(const GroupElement& g) noexcept {
  std::int64_t m = 0;
  for (std::size_t i = 0; i < g.rank(); ++i) m = std::max(m, g[i] < 0 ? -g[i] : g[i]);
  return m;
}

Box Box::empty_box(const GroupSpec& group) {
  Box b{group, {}, {}};
  b.lo[0] = 1;
  b.hi[0] = 0;
  return b;
}

Box Box::interval(std::int64_t lo, std::int64_t hi) {
  Box b{GroupSpec::integers(), {}, {}};
  b.lo[0] = lo;
  b.hi[0] = hi;
  return b;
}

bool Box::empty() const noexcept {
  for (std::size_t i = 0; i < group.rank(); ++i) {
    if (hi[i] < lo[i]) return true;
  }
  return false;
}

std::uint64_t Box::size() const {
  if (empty()) return 0;
  std::uint64_t n = 1;
  for (std::size_t i = 0; i < group.rank(); ++i) {
    if (__builtin_mul_overflow(n, extent(i), &n)) throw Error(ErrorKind::overflow, "overflow");
  }
  return n;
}

bool Box::contains(const GroupElement& g) const noexcept {
  for (std::size_t i = 0; i < group.rank(); ++i) {
    if (g[i] < lo[i] || g[i] > hi[i]) return false;
  }
  return true;
}

bool Box::contains(const Box& other) const noexcept {
  if (other.empty()) return true;
  if (empty()) return false;
  for (std::size_t i = 0; i < group.rank(); ++i) {
    if (other.lo[i] < lo[i] || other.hi[i] > hi[i]) return false;
  }
  return true;
}

std::uint64_t Box::index_of(const GroupElement& g) const noexcept {
  std::uint64_t idx = 0;
  for (std::size_t i = 0; i < group.rank(); ++i) {
    idx = idx * extent(i) + static_cast<std::uint64_t>(g[i] - lo[i]);
  }
  return idx;
}

GroupElement Box::element_at(std::uint64_t index) const {
  Coords c{};
  for (std::size_t i = group.rank(); i-- > 0;) {
    const std::uint64_t e = extent(i);
    c[i] = lo[i] + static_cast<std::int64_t>(index % e);
    index /= e;
  }
  return GroupElement(group, c);
}

Box hull(const Box& a, const Box& b) {
  require_same(a.group, b.group);
  if (a.empty()) return b;
  if (b.empty()) return a;
  Box out = a;
  for (std::size_t i = 0; i < a.group.rank(); ++i) {
    out.lo[i] = std::min(a.lo[i], b.lo[i]);
    out.hi[i] = std::max(a.hi[i], b.hi[i]);
  }
  return out;
}

Box left_translate_bounds(const GroupElement& g, const Box& box) {
  require_same(g.group(), box.group);
  if (box.empty()) return box;
  const std::size_t rank = box.group.rank();
  Box out = Box::empty_box(box.group);
  for (std::uint32_t mask = 0; mask < (1u << rank); ++mask) {
    Coords c{};
    for (std::size_t i = 0; i < rank; ++i) c[i] = (mask >> i) & 1u ? box.hi[i] : box.lo[i];
    const GroupElement image = mul(g, GroupElement(box.group, c));
    Box point{box.group, image.coords(), image.coords()};
    out = hull(out, point);
  }
  return out;
}

void for_each_element(const Box& box, const std::function<void(const GroupElement&)>& fn) {
  if (box.empty()) return;
  const std::size_t rank = box.group.rank();
  GroupElement g(box.group, box.lo);
  while (true) {
    fn(g);
    std::size_t axis = rank;
    while (axis-- > 0) {
      if (g[axis] < box.hi[axis]) {
        ++g[axis];
        break;
      }
      g[axis] = box.lo[axis];
    }
    if (axis == static_cast<std::size_t>(-1)) return;
  }
}

}  // namespace furst
