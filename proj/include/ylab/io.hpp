#pragma once

// Output formatting shared by the writers.

#include <string>

namespace ylab {

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double value);

}  // namespace ylab
