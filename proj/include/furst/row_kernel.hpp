#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "furst/error.hpp"
#include "furst/group.hpp"

namespace furst {

/// Walks F_N row by row (rows run along the last axis). For every supported
/// group, left multiplication by a fixed g maps a row onto a contiguous run of
/// the window's last axis, so each shift contributes one window offset per row.
/// fn(offsets, row_length, row_start) is called with offsets[i] = window index
/// of shifts[i] * row_start.
template <class Fn>
void for_each_row(const Box& folner_box, std::span<const GroupElement> shifts, const Box& window, Fn&& fn) {
  if (folner_box.empty()) return;
  const std::size_t last = folner_box.group.rank() - 1;
  const auto length = static_cast<std::size_t>(folner_box.extent(last));
  Box prefix = folner_box;
  prefix.hi[last] = prefix.lo[last];
  std::vector<std::size_t> offsets(shifts.size());
  for_each_element(prefix, [&](const GroupElement& row_start) {
    for (std::size_t i = 0; i < shifts.size(); ++i) {
      const GroupElement p = mul(shifts[i], row_start);
      GroupElement end = p;
      end[last] += static_cast<std::int64_t>(length) - 1;
      if (!window.contains(p) || !window.contains(end)) {
        throw Error(ErrorKind::window_exceeded, "window exceeded at " + p.str());
      }
      offsets[i] = static_cast<std::size_t>(window.index_of(p));
    }
    fn(std::span<const std::size_t>(offsets), length, row_start);
  });
}

}  // namespace furst
