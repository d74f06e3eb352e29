#include "ylab/io.hpp"

#include <charconv>
#include <cmath>

namespace ylab {

std::string format_double(double value) {
  if (value == 0.0) return "0";  // also folds -0
  if (!std::isfinite(value)) return std::isnan(value) ? "nan" : (value > 0 ? "inf" : "-inf");
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

}  // namespace ylab
