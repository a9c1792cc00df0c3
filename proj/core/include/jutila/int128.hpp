#pragma once

#include <cstdint>
#include <limits>
#include <string>

#include "jutila/errors.hpp"

namespace jutila {

using int128 = __int128;

inline constexpr int128 INT128_MAX_VALUE =
    (int128(0x7fffffffffffffffLL) << 64) | int128(0xffffffffffffffffULL);

std::string to_string(int128 v);

inline int128 checked_add(int128 a, int128 b) {
    int128 r;
    if (__builtin_add_overflow(a, b, &r)) throw OverflowError("int128 add overflow");
    return r;
}

// Multiply a wide accumulator by a small factor; the series code only ever
// multiplies table entries by pentagonal/Jacobi coefficients, which are small.
inline int128 checked_mul_small(int128 a, std::int64_t b) {
    if (b == 0 || a == 0) return 0;
    int128 aa = a < 0 ? -a : a;
    int128 bb = b < 0 ? int128(-(b + 1)) + 1 : int128(b);
    if (aa > INT128_MAX_VALUE / bb) throw OverflowError("int128 mul overflow");
    return a * int128(b);
}

inline double to_double(int128 v) { return static_cast<double>(v); }

}  // namespace jutila
