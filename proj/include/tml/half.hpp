#pragma once

#include <cstdint>

namespace tml {

/// IEEE-754 binary32 -> binary16 bits, round to nearest even. Overflow goes
/// to infinity, NaN stays NaN (quiet).
std::uint16_t float_to_half(float f);

/// Exact binary16 -> binary32 conversion.
float half_to_float(std::uint16_t h);

}  // namespace tml
