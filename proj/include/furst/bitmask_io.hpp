#pragma once

#include <string>

#include "furst/set_spec.hpp"

namespace furst {

/// "FBM1 <group> <lo> <hi>\n" followed by ceil(size/8) bytes, element 0 at the
/// least significant bit of the first byte, pad bits zero. Coordinates of
/// multi-rank corners are comma separated; an empty window has lo > hi on
/// axis 0 and no payload.
std::string serialize_bitmask(const IndicatorWindow& window);
/// Throws config on a malformed header, short payload or nonzero pad bits.
IndicatorWindow parse_bitmask(const std::string& bytes);

}  // namespace furst
