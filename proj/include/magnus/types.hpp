#pragma once

#include <bit>
#include <cstdint>

namespace magnus {

using Index = std::uint64_t;   // row or column id
using Offset = std::uint64_t;  // position in col/val arrays
using Real = double;

inline constexpr Index ceil_pow2(Index x) { return x <= 1 ? 1 : std::bit_ceil(x); }
inline constexpr Index floor_pow2(Index x) { return x == 0 ? 0 : std::bit_floor(x); }
inline constexpr unsigned log2_pow2(Index x) { return static_cast<unsigned>(std::countr_zero(x)); }

}  // namespace magnus
