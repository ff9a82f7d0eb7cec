#include "robustdp/xreal.hpp"

#include <cstdio>

namespace robustdp {

std::string to_string(XReal x) {
  if (x.is_neg_inf()) return "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x.value());
  return buf;
}

}  // namespace robustdp
