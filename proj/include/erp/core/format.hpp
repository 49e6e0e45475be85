#pragma once

#include <cstdio>
#include <string>

namespace erp {

/// Fixed 6-significant-digit rendering used by every CSV writer, so reruns
/// with the same seed are byte-identical.
inline std::string format_sig6(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x == 0.0 ? 0.0 : x);
  return buf;
}

}  // namespace erp
