#pragma once

#include <array>
#include <stdexcept>
#include <utility>

#include "kmc/chains.hpp"
#include "kmc/numerics.hpp"

namespace kmc {

namespace detail {

template <class T>
T pow_t(const T& base, int e) {
    T r(1);
    for (int i = 0; i < e; ++i) r = r * base;
    return r;
}

template <class T>
T phi_poly(int k, const T& a, const T& x) {
    return pow_t<T>(x, k) - pow_t<T>(x - a, k);
}

template <class T>
T psi_poly(int k, const T& a, const T& b, const T& x) {
    return pow_t<T>(x, k) - pow_t<T>(x - a, k - 1) * (x - b);
}

template <class T>
T phi_ik_poly(int i, int k, const T& a, const T& b, const T& x) {
    return pow_t<T>(x, k) - pow_t<T>(x - a, i - 1) * pow_t<T>(x - b, k + 1 - i);
}

/// Lower/upper cell boundary at abscissa x in [a, b]. The left half is always
/// (phi_k(a), psi_k(a, b)); on the right half which of phi_k(b), psi_k(b, a)
/// is which depends on the parity of k, so they are ordered by value here and
/// callers never branch on parity.
template <class T>
std::pair<T, T> cell_bounds_t(int k, const T& a, const T& b, const T& x) {
    if (x + x <= a + b) {
        return {phi_poly<T>(k, a, x), psi_poly<T>(k, a, b, x)};
    }
    T lo = phi_poly<T>(k, b, x);
    T hi = psi_poly<T>(k, b, a, x);
    if (hi < lo) std::swap(lo, hi);
    return {lo, hi};
}

}  // namespace detail

/// Phi_k(a)(x) = x^k - (x-a)^k.
inline double phi(int k, double a, double x) { return detail::phi_poly<double>(k, a, x); }

/// Psi_k(a,b)(x) = x^k - (x-a)^(k-1) (x-b).
inline double psi(int k, double a, double b, double x) {
    return detail::psi_poly<double>(k, a, b, x);
}

/// Phi_{i,k}(a,b)(x) = x^k - (x-a)^(i-1) (x-b)^(k+1-i), 1 <= i <= k+1.
/// Reduces to phi(k, a, .) at i = k+1 and to phi(k, b, .) at i = 1.
inline double phi_ik(int i, int k, double a, double b, double x) {
    if (i < 1 || i > k + 1) throw std::invalid_argument("phi_ik: i out of range");
    return detail::phi_ik_poly<double>(i, k, a, b, x);
}

/// The cell C_k(a,b): exactly the points p for which
/// (gamma_k(a)^k, p, gamma_k(b)^k) is a k-monotone chain.
struct Cell {
    int k;
    double a;
    double b;

    Cell(int k_, double a_, double b_) : k(k_), a(a_), b(b_) {
        if (k < 1) throw std::invalid_argument("Cell: k must be >= 1");
        if (!(std::isfinite(a) && std::isfinite(b) && 0.0 <= a && a < b))
            throw std::invalid_argument("Cell: need 0 <= a < b finite");
    }
};

struct CellBounds {
    double lower;
    double upper;
};

/// Boundary ordinates at x; requires a <= x <= b.
inline CellBounds cell_bounds(const Cell& cell, double x) {
    if (!(cell.a <= x && x <= cell.b))
        throw std::invalid_argument("cell_bounds: x outside [a, b]");
    auto [lo, hi] = detail::cell_bounds_t<double>(cell.k, cell.a, cell.b, x);
    return {lo, hi};
}

/// A(C_k(a,b)) = (b-a)^(k+1) / (k 2^(k-1)).
inline double area(const Cell& cell) {
    return powi(cell.b - cell.a, cell.k + 1) / (cell.k * powi(2.0, cell.k - 1));
}

/// Closed-cell membership with a small absolute tolerance shielding float
/// round-trip noise on the boundary polynomials.
inline bool contains(const Cell& cell, Point p, double tol = 1e-12) {
    if (!(cell.a <= p.x && p.x <= cell.b)) return false;
    auto [lo, hi] = detail::cell_bounds_t<double>(cell.k, cell.a, cell.b, p.x);
    return lo - tol <= p.y && p.y <= hi + tol;
}

/// Exact closed-cell membership in rational arithmetic.
inline bool contains_exact(const Cell& cell, Point p) {
    const Rational x = to_rational(p.x);
    const Rational a = to_rational(cell.a);
    const Rational b = to_rational(cell.b);
    if (x < a || x > b) return false;
    auto [lo, hi] = detail::cell_bounds_t<Rational>(cell.k, a, b, x);
    const Rational y = to_rational(p.y);
    return lo <= y && y <= hi;
}

/// gamma_k(a), gamma_k(b) and the two mid-abscissa boundary points. For k = 1
/// the cell is the square [a,b]^2 and its four corners are returned; for
/// k = 2 the lower mid point lies on the join of the two lower arcs, so the
/// cell is effectively a triangle and the 4-tuple is degenerate.
inline std::array<Point, 4> vertices(const Cell& cell) {
    if (cell.k == 1) {
        return {Point{cell.a, cell.a}, Point{cell.b, cell.b}, Point{cell.b, cell.a},
                Point{cell.a, cell.b}};
    }
    const double mid = 0.5 * (cell.a + cell.b);
    const CellBounds at_mid = cell_bounds(cell, mid);
    return {gamma_point(cell.k, cell.a), gamma_point(cell.k, cell.b),
            Point{mid, at_mid.lower}, Point{mid, at_mid.upper}};
}

}  // namespace kmc
