#pragma once

#include <cstdio>
#include <string>

namespace bifurcate {

// 17 significant digits: lossless round-trip for IEEE doubles.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace bifurcate
