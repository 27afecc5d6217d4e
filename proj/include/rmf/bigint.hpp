#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>

namespace rmf {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline BigInt big_factorial(unsigned n) {
    BigInt r = 1;
    for (unsigned i = 2; i <= n; ++i) r *= i;
    return r;
}

inline BigInt big_pow(BigInt base, unsigned exp) {
    BigInt r = 1;
    while (exp) {
        if (exp & 1) r *= base;
        base *= base;
        exp >>= 1;
    }
    return r;
}

// Natural log of a positive big integer; usable far beyond double range.
inline double big_log(const BigInt& x) {
    if (x <= 0) return -std::numeric_limits<double>::infinity();
    const auto bits = boost::multiprecision::msb(x);
    if (bits < 1000) return std::log(x.convert_to<double>());
    const BigInt top = x >> (bits - 62);
    return std::log(top.convert_to<double>()) + static_cast<double>(bits - 62) * std::log(2.0);
}

inline double big_ratio(const BigInt& num, const BigInt& den) {
    return std::exp(big_log(num) - big_log(den));
}

}  // namespace rmf
