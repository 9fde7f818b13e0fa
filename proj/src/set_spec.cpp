#include "furst/set_spec.hpp"

#include <bit>
#include <mutex>

#include "furst/error.hpp"

namespace furst {

namespace {

std::int64_t floor_mod(std::int64_t a, std::int64_t m) {
  const std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

bool dyadic_member(std::int64_t n) {
  if (n < 1) return false;
  // n in [4^k, 2*4^k)  <=>  the highest set bit sits at an even position
  const int top = std::bit_width(static_cast<std::uint64_t>(n)) - 1;
  return (top & 1) == 0;
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

bool IndicatorWindow::test(const GroupElement& g) const {
  if (!box.contains(g)) throw Error(ErrorKind::window_exceeded, "window exceeded at " + g.str());
  return bits.test(box.index_of(g));
}

SetSpec SetSpec::congruence(std::int64_t residue, std::int64_t modulus) {
  if (modulus < 1) throw Error(ErrorKind::domain, "congruence modulus must be positive");
  return SetSpec(GroupSpec::integers(), rules::Congruence{floor_mod(residue, modulus), modulus});
}

SetSpec SetSpec::rotation(const RealParam& alpha, const RealParam& beta, const RealParam& start) {
  if (!(alpha.value() > 0 && alpha.value() < 1)) throw Error(ErrorKind::domain, "rotation alpha must lie in (0,1)");
  if (!(beta.value() > 0 && beta.value() <= 1)) throw Error(ErrorKind::domain, "rotation beta must lie in (0,1]");
  if (!(start.value() >= 0 && start.value() < 1)) throw Error(ErrorKind::domain, "rotation x0 must lie in [0,1)");
  return SetSpec(GroupSpec::integers(), rules::Rotation{alpha, beta, start});
}

SetSpec SetSpec::dyadic_blocks() { return SetSpec(GroupSpec::integers(), rules::DyadicBlocks{}); }

SetSpec SetSpec::bitmask(IndicatorWindow window, std::string origin) {
  return bitmask(std::make_shared<const IndicatorWindow>(std::move(window)), std::move(origin));
}

SetSpec SetSpec::bitmask(std::shared_ptr<const IndicatorWindow> window, std::string origin) {
  const GroupSpec g = window->box.group;
  return SetSpec(g, rules::Bitmask{std::move(window), std::move(origin)});
}

SetSpec SetSpec::componentwise(const GroupSpec& group, const Coords& residue, const Coords& modulus) {
  rules::Componentwise rule;
  for (std::size_t i = 0; i < group.rank(); ++i) {
    if (modulus[i] < 1) throw Error(ErrorKind::domain, "componentwise modulus must be positive");
    rule.modulus[i] = modulus[i];
    rule.residue[i] = floor_mod(residue[i], modulus[i]);
  }
  return SetSpec(group, rule);
}

SetSpec SetSpec::complement() const {
  SetSpec s = *this;
  s.complement_ = !complement_;
  return s;
}

bool SetSpec::contains(const GroupElement& g) const {
  if (!(g.group() == group_)) throw Error(ErrorKind::group_mismatch, "group mismatch");
  const bool in = std::visit(
      overloaded{
          [&](const rules::Congruence& r) { return floor_mod(g[0], r.modulus) == r.residue; },
          [&](const rules::Rotation& r) {
            if (r.beta.is_one()) return true;
            const CirclePoint x = r.start.point() + g[0] * r.alpha.point();
            return x.raw < r.beta.point().raw;
          },
          [&](const rules::DyadicBlocks&) { return dyadic_member(g[0]); },
          [&](const rules::Bitmask& r) { return r.window->test(g); },
          [&](const rules::Componentwise& r) {
            for (std::size_t i = 0; i < group_.rank(); ++i) {
              if (floor_mod(g[i], r.modulus[i]) != r.residue[i]) return false;
            }
            return true;
          },
      },
      rule_);
  return in != complement_;
}

std::string SetSpec::key() const {
  std::string k = group_.name() + ":";
  k += std::visit(overloaded{
                      [](const rules::Congruence& r) {
                        return "congruence(" + std::to_string(r.residue) + "," + std::to_string(r.modulus) + ")";
                      },
                      [](const rules::Rotation& r) {
                        return "rotation(" + r.alpha.text() + "," + r.beta.text() + "," + r.start.text() + ")";
                      },
                      [](const rules::DyadicBlocks&) { return std::string("dyadic_blocks"); },
                      [](const rules::Bitmask& r) {
                        char buf[32];
                        std::snprintf(buf, sizeof buf, "%p", static_cast<const void*>(r.window.get()));
                        return "bitmask(" + r.origin + "@" + buf + ")";
                      },
                      [this](const rules::Componentwise& r) {
                        std::string s = "componentwise(";
                        for (std::size_t i = 0; i < group_.rank(); ++i) {
                          s += std::to_string(r.residue[i]) + "/" + std::to_string(r.modulus[i]) + ";";
                        }
                        return s + ")";
                      },
                  },
                  rule_);
  return complement_ ? "not " + k : k;
}

IndicatorWindow indicator_window(const SetSpec& set, const Box& box) {
  if (!(set.group() == box.group)) throw Error(ErrorKind::group_mismatch, "group mismatch");
  IndicatorWindow w{box, BitVector(static_cast<std::size_t>(box.size()))};
  if (box.empty()) return w;

  // Z fast paths avoid the per-element variant dispatch.
  if (box.group.kind() == GroupKind::integers) {
    const auto* rot = std::get_if<rules::Rotation>(&set.rule());
    const bool flip = set.complemented();
    const std::size_t n = w.bits.size();
    if (rot != nullptr) {
      CirclePoint x = rot->start.point() + box.lo[0] * rot->alpha.point();
      const u128 beta = rot->beta.point().raw;
      for (std::size_t i = 0; i < n; ++i) {
        const bool in = rot->beta.is_one() || x.raw < beta;
        if (in != flip) w.bits.set(i);
        x = x + rot->alpha.point();
      }
      return w;
    }
    if (std::holds_alternative<rules::DyadicBlocks>(set.rule())) {
      for (std::size_t i = 0; i < n; ++i) {
        if (dyadic_member(box.lo[0] + static_cast<std::int64_t>(i)) != flip) w.bits.set(i);
      }
      return w;
    }
  }

  std::size_t i = 0;
  for_each_element(box, [&](const GroupElement& g) {
    if (set.contains(g)) w.bits.set(i);
    ++i;
  });
  return w;
}

std::shared_ptr<const IndicatorWindow> WindowCache::get(const SetSpec& set, const Box& box) {
  const std::string key = set.key();
  {
    std::shared_lock lock(mutex_);
    auto [b, e] = entries_.equal_range(key);
    for (auto it = b; it != e; ++it) {
      if (it->second->box.contains(box)) return it->second;
    }
  }
  auto built = std::make_shared<const IndicatorWindow>(indicator_window(set, box));
  std::unique_lock lock(mutex_);
  entries_.emplace(key, built);
  return built;
}

std::size_t WindowCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

}  // namespace furst
