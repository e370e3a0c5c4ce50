#pragma once

// Exact rational arithmetic used for every probability in the toolkit.
// Backed by Boost.Multiprecision so denominators can grow without overflow;
// this header adds the literal parsing and rendering the file format needs.

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdio>
#include <stdexcept>
#include <string>

namespace ascm {

using BigInt = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

inline Rat rat(long long num, long long den = 1) {
    if (den == 0) throw std::invalid_argument("rational with zero denominator");
    return Rat(BigInt(num), BigInt(den));
}

// Accepts "7", "9/13", "0.25". No exponents, no leading '.', no sign.
inline Rat parse_rational(const std::string& text) {
    auto bad = [&] { throw std::invalid_argument("malformed rational literal: " + text); };
    if (text.empty()) bad();
    // Validates and converts one run of digits. Built a digit at a time
    // because the BigInt string constructor reads a leading zero as octal.
    auto digits = [&](const std::string& s) {
        if (s.empty()) bad();
        BigInt v = 0;
        for (char c : s) {
            if (c < '0' || c > '9') bad();
            v = v * 10 + (c - '0');
        }
        return v;
    };
    auto slash = text.find('/');
    auto dot = text.find('.');
    if (slash != std::string::npos) {
        BigInt num = digits(text.substr(0, slash));
        BigInt den = digits(text.substr(slash + 1));
        if (den == 0) bad();
        return Rat(num, den);
    }
    if (dot != std::string::npos) {
        BigInt whole = digits(text.substr(0, dot));
        std::string frac = text.substr(dot + 1);
        BigInt scale = 1;
        for (size_t i = 0; i < frac.size(); ++i) scale *= 10;
        return Rat(whole * scale + digits(frac), scale);
    }
    return Rat(digits(text));
}

// Canonical exact form: "p/q", or just "p" when the denominator is 1.
inline std::string fraction_string(const Rat& r) {
    std::string s = numerator(r).str();
    if (denominator(r) != 1) s += "/" + denominator(r).str();
    return s;
}

// Human-readable decimal at 12 significant digits. The fraction is the
// authoritative value; this rendering is informational only.
inline std::string decimal_string(const Rat& r) {
    long double x = numerator(r).convert_to<long double>() /
                    denominator(r).convert_to<long double>();
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12Lg", x);
    return buf;
}

// Report cell carrying both renderings, e.g. "27/625 (0.0432)".
inline std::string prob_cell(const Rat& r) {
    return fraction_string(r) + " (" + decimal_string(r) + ")";
}

}  // namespace ascm
