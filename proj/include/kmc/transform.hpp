#pragma once

#include <stdexcept>
#include <utility>

#include "kmc/numerics.hpp"

namespace kmc {

/// The cell map T_{a,b,c,d}: carries C_k(a,b) onto C_k(c,d), fixes the curve
/// x^k setwise, preserves k-monotonicity and uniform measure. Endpoints at 0
/// are admitted as the continuous extension of the interior case.
struct CellMap {
    int k;
    double a, b, c, d;

    CellMap(int k_, double a_, double b_, double c_, double d_)
        : k(k_), a(a_), b(b_), c(c_), d(d_) {
        if (k < 1) throw std::invalid_argument("CellMap: k must be >= 1");
        if (!(std::isfinite(a) && std::isfinite(b) && std::isfinite(c) && std::isfinite(d)))
            throw std::invalid_argument("CellMap: non-finite endpoint");
        if (!(0.0 <= a && a < b && 0.0 <= c && c < d))
            throw std::invalid_argument("CellMap: need 0 <= a < b and 0 <= c < d");
    }

    [[nodiscard]] double ratio() const { return (d - c) / (b - a); }
};

/// x' = c + (x-a) r,  y' = x'^k + (y - x^k) r^k  with r = (d-c)/(b-a).
inline Point apply_T(const CellMap& map, Point p) {
    const double r = map.ratio();
    const double xi = map.c + (p.x - map.a) * r;
    const double yi = powi(xi, map.k) + (p.y - powi(p.x, map.k)) * powi(r, map.k);
    return {xi, yi};
}

/// The same map in exact rational arithmetic.
inline std::pair<Rational, Rational> apply_T_exact(const CellMap& map, Point p) {
    const Rational r = (to_rational(map.d) - to_rational(map.c)) /
                       (to_rational(map.b) - to_rational(map.a));
    const Rational x = to_rational(p.x);
    const Rational y = to_rational(p.y);
    const Rational xi = to_rational(map.c) + (x - to_rational(map.a)) * r;
    const Rational yi = rational_pow(xi, map.k) +
                        (y - rational_pow(x, map.k)) * rational_pow(r, map.k);
    return {xi, yi};
}

/// The flattening G_k: (x, y) -> (x, y - x^k).
inline Point apply_G(int k, Point p) { return {p.x, p.y - powi(p.x, k)}; }

inline Point apply_G_inverse(int k, Point p) { return {p.x, p.y + powi(p.x, k)}; }

}  // namespace kmc
