#include "furst/bitmask_io.hpp"

#include <sstream>

#include "furst/error.hpp"

namespace furst {

namespace {

std::string corner(const Coords& c, std::size_t rank) {
  std::string s;
  for (std::size_t i = 0; i < rank; ++i) {
    if (i) s += ',';
    s += std::to_string(c[i]);
  }
  return s;
}

Coords parse_corner(const std::string& text, std::size_t rank) {
  Coords c{};
  std::size_t axis = 0;
  std::size_t pos = 0;
  while (true) {
    const auto comma = text.find(',', pos);
    const std::string tok = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (axis >= rank) throw Error(ErrorKind::config, "bitmask corner has too many coordinates: " + text);
    std::size_t used = 0;
    try {
      c[axis++] = std::stoll(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (tok.empty() || used != tok.size()) throw Error(ErrorKind::config, "bad bitmask coordinate: " + tok);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (axis != rank) throw Error(ErrorKind::config, "bitmask corner has too few coordinates: " + text);
  return c;
}

}  // namespace

std::string serialize_bitmask(const IndicatorWindow& window) {
  const Box& box = window.box;
  const std::size_t rank = box.group.rank();
  std::string out = "FBM1 " + box.group.name() + " " + corner(box.lo, rank) + " " + corner(box.hi, rank) + "\n";
  if (box.empty()) return out;
  const std::size_t n = static_cast<std::size_t>(box.size());
  std::string payload((n + 7) / 8, '\0');
  for (std::size_t i = 0; i < n; ++i) {
    if (window.bits.test(i)) payload[i / 8] = static_cast<char>(payload[i / 8] | (1u << (i % 8)));
  }
  return out + payload;
}

IndicatorWindow parse_bitmask(const std::string& bytes) {
  const auto nl = bytes.find('\n');
  if (nl == std::string::npos) throw Error(ErrorKind::config, "bitmask header missing");
  std::istringstream header(bytes.substr(0, nl));
  std::string magic, group, lo, hi, extra;
  if (!(header >> magic >> group >> lo >> hi) || (header >> extra) || magic != "FBM1") {
    throw Error(ErrorKind::config, "bad bitmask header: " + bytes.substr(0, nl));
  }
  IndicatorWindow w;
  try {
    w.box.group = GroupSpec::parse(group);
  } catch (const Error& e) {
    throw Error(ErrorKind::config, "bad bitmask header: " + std::string(e.what()));
  }
  const std::size_t rank = w.box.group.rank();
  w.box.lo = parse_corner(lo, rank);
  w.box.hi = parse_corner(hi, rank);
  const std::string payload = bytes.substr(nl + 1);
  if (w.box.empty()) {
    if (!payload.empty()) throw Error(ErrorKind::config, "payload after empty bitmask");
    return w;
  }
  const std::size_t n = static_cast<std::size_t>(w.box.size());
  if (payload.size() != (n + 7) / 8) throw Error(ErrorKind::config, "bitmask payload length mismatch");
  w.bits = BitVector(n);
  for (std::size_t i = 0; i < payload.size() * 8; ++i) {
    const bool bit = (static_cast<unsigned char>(payload[i / 8]) >> (i % 8)) & 1u;
    if (i >= n) {
      if (bit) throw Error(ErrorKind::config, "nonzero bitmask pad bits");
    } else if (bit) {
      w.bits.set(i);
    }
  }
  return w;
}

}  // namespace furst
