#include "furst/folner.hpp"

#include <algorithm>

#include "furst/error.hpp"

namespace furst {

namespace {

std::int64_t to_signed(std::uint64_t n) {
  if (n > static_cast<std::uint64_t>(INT64_MAX)) throw Error(ErrorKind::overflow, "overflow");
  return static_cast<std::int64_t>(n);
}

// |[0,len) ∩ [shift, shift+len)|
std::uint64_t overlap(std::int64_t len, std::int64_t shift) {
  const std::int64_t a = shift < 0 ? -shift : shift;
  return a >= len ? 0 : static_cast<std::uint64_t>(len - a);
}

}  // namespace

FolnerSpec FolnerSpec::interval(std::int64_t start) {
  return FolnerSpec(FolnerShape::interval, GroupElement::integer(start));
}

FolnerSpec FolnerSpec::box(const GroupElement& anchor) {
  if (anchor.group().kind() != GroupKind::lattice) throw Error(ErrorKind::domain, "box shape requires Z^d");
  return FolnerSpec(FolnerShape::box, anchor);
}

FolnerSpec FolnerSpec::heisenberg_box() {
  return FolnerSpec(FolnerShape::heisenberg_box, identity(GroupSpec::heisenberg()));
}

Box FolnerSpec::set_box(std::uint64_t n) const {
  if (n == 0) throw Error(ErrorKind::domain, "empty Følner index");
  const std::int64_t side = to_signed(n);
  Box b{group_, {}, {}};
  switch (shape_) {
    case FolnerShape::interval:
    case FolnerShape::box:
      for (std::size_t i = 0; i < group_.rank(); ++i) {
        b.lo[i] = anchor_[i];
        if (__builtin_add_overflow(anchor_[i], side - 1, &b.hi[i])) throw Error(ErrorKind::overflow, "overflow");
      }
      break;
    case FolnerShape::heisenberg_box: {
      std::int64_t sq;
      if (__builtin_mul_overflow(side, side, &sq)) throw Error(ErrorKind::overflow, "overflow");
      b.hi[0] = side - 1;
      b.hi[1] = side - 1;
      b.hi[2] = sq - 1;
      break;
    }
  }
  return b;
}

std::string FolnerSpec::str() const {
  switch (shape_) {
    case FolnerShape::interval: return "interval(start=" + anchor_.str() + ")";
    case FolnerShape::box: return "box(anchor=" + anchor_.str() + ")";
    case FolnerShape::heisenberg_box: return "heisenberg_box";
  }
  return "?";
}

std::vector<GroupElement> folner_set(const FolnerSpec& f, std::uint64_t n) {
  const Box b = f.set_box(n);
  std::vector<GroupElement> out;
  out.reserve(b.size());
  for_each_element(b, [&](const GroupElement& g) { out.push_back(g); });
  return out;
}

Rational FolnerDefect::ratio() const {
  return Rational(static_cast<std::int64_t>(symmetric_difference), static_cast<std::int64_t>(size));
}

FolnerDefect folner_defect(const FolnerSpec& f, std::uint64_t n, const GroupElement& g) {
  if (!(g.group() == f.group())) throw Error(ErrorKind::group_mismatch, "group mismatch");
  const Box b = f.set_box(n);
  const std::uint64_t size = b.size();
  // |F ∩ gF|; then |F ^ gF| = 2(|F| - |F ∩ gF|) since |gF| = |F|.
  std::uint64_t common = 0;
  if (f.group().abelian()) {
    common = 1;
    for (std::size_t i = 0; i < f.group().rank(); ++i) common *= overlap(static_cast<std::int64_t>(b.extent(i)), g[i]);
  } else {
    // g*(a',b',c') = (a+a', b+b', c+c'+a*b'): axes a and b are translations;
    // for each admissible b' the c-axis is shifted by c + a*b'.
    const std::int64_t side = static_cast<std::int64_t>(b.extent(0));
    const std::int64_t depth = static_cast<std::int64_t>(b.extent(2));
    const std::uint64_t along_a = overlap(side, g[0]);
    if (along_a != 0) {
      std::uint64_t sum = 0;
      const std::int64_t lo = std::max<std::int64_t>(0, -g[1]);
      const std::int64_t hi = std::min<std::int64_t>(side, side - g[1]);
      for (std::int64_t bp = lo; bp < hi; ++bp) {
        std::int64_t shift;
        if (__builtin_mul_overflow(g[0], bp, &shift) || __builtin_add_overflow(shift, g[2], &shift)) {
          throw Error(ErrorKind::overflow, "overflow");
        }
        sum += overlap(depth, shift);
      }
      common = along_a * sum;
    }
  }
  return FolnerDefect{2 * (size - common), size};
}

Box shifted_hull(const FolnerSpec& f, std::uint64_t n, const std::vector<GroupElement>& shifts) {
  const Box b = f.set_box(n);
  if (shifts.empty()) return b;
  Box out = Box::empty_box(f.group());
  for (const auto& g : shifts) out = hull(out, left_translate_bounds(g, b));
  return out;
}

}  // namespace furst
