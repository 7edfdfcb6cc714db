#include "amscale/format.hpp"

#include <cmath>
#include <cstdio>

namespace amscale {

std::string format_real(double value) {
  if (!std::isfinite(value)) return "null";
  if (value == 0.0) return "0";  // folds -0 as well
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

}  // namespace amscale
