#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace qramsey {

using BigInt = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

inline BigInt pow2(unsigned e) { return BigInt(1) << e; }

// floor(x) for possibly negative rationals
inline BigInt rat_floor(const Rat& x) {
    BigInt q = numerator(x) / denominator(x);
    if (numerator(x) < 0 && q * denominator(x) != numerator(x)) --q;
    return q;
}

inline BigInt rat_ceil(const Rat& x) {
    BigInt q = numerator(x) / denominator(x);
    if (numerator(x) > 0 && q * denominator(x) != numerator(x)) ++q;
    return q;
}

inline std::int64_t to_i64(const BigInt& v) { return static_cast<std::int64_t>(v); }

inline double to_double(const Rat& x) { return static_cast<double>(x); }

// "p/q" with q omitted for integers
inline std::string rat_str(const Rat& x) {
    std::string s = numerator(x).str();
    if (denominator(x) != 1) {
        s += "/";
        s += denominator(x).str();
    }
    return s;
}

// Accepts "p/q", plain integers, and decimal literals like "0.25" (parsed exactly).
Rat parse_rat(const std::string& text);

}  // namespace qramsey
