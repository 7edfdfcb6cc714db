#pragma once

#include <string>

namespace amscale {

// Shortest-independent rendering: always 17 significant digits, "null" for
// non-finite values. Output files depend on this being stable.
std::string format_real(double value);

}  // namespace amscale
