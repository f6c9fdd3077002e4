#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <stdexcept>

namespace kmc {

/// Exact rational scalar. Doubles are dyadic, so lifting them is lossless;
/// every predicate that matters is decided in this type when the float fast
/// path is inconclusive.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

/// Exact lift of a finite double.
inline Rational to_rational(double v) {
    if (!std::isfinite(v)) throw std::invalid_argument("to_rational: non-finite input");
    return Rational(v);
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

inline int sign_of(const Rational& r) { return r.sign(); }

/// base^e for integer e >= 0 (0^0 = 1).
inline Rational rational_pow(const Rational& base, int e) {
    Rational r = 1;
    for (int i = 0; i < e; ++i) r *= base;
    return r;
}

inline BigInt binomial_big(int n, int j) {
    if (j < 0 || j > n) return 0;
    BigInt r = 1;
    for (int i = 1; i <= j; ++i) {
        r *= (n - j + i);
        r /= i;
    }
    return r;
}

}  // namespace kmc
