#pragma once

#include <string>

namespace linrs {

/// Shortest round-trip decimal form, independent of the C locale. NaN and
/// infinities print as "nan", "inf" and "-inf".
std::string format_number(double value);

}  // namespace linrs
