#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace warpcone {

// Shortest round-trip decimal form; CSV bodies stay byte-stable across runs.
inline std::string fmt_double(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  if (x == 0.0) return "0";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

}  // namespace warpcone
