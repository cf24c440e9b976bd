#pragma once

#include <cstdio>
#include <string>

namespace spinstat {

// 18 significant digits: enough for a lossless double round-trip through text.
inline std::string format_exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17e", v);
  return buf;
}

inline std::string format_short(double v, int digits = 3) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

}  // namespace spinstat
