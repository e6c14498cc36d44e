#pragma once

#include <cstdio>
#include <ostream>
#include <string>

namespace seqrd::detail {

// 17 significant digits round-trips every finite double exactly.
inline std::string fmt17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// JSON has no literal for non-finite numbers; they are written as null.
inline void write_json_number(std::ostream& os, double x) {
  if (x != x || x == 1.0 / 0.0 || x == -1.0 / 0.0) {
    os << "null";
  } else {
    os << fmt17(x);
  }
}

}  // namespace seqrd::detail
