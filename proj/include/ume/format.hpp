#pragma once

#include <charconv>
#include <cstdio>
#include <string>
#include <system_error>

namespace ume {

/// Shortest decimal that parses back to the same double.
inline std::string shortest(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) return std::to_string(v);
  return std::string(buf, end);
}

/// 17 significant digits, the fixed-width round-trip form used in CSV output.
inline std::string digits17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace ume
