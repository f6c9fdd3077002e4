#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "kmc/cells.hpp"
#include "kmc/errors.hpp"
#include "kmc/rng.hpp"

namespace kmc {

/// Largest Poisson region area the sampler will accept.
inline constexpr double kMaxPoissonArea = 1e7;

/// A realization of the intensity-1 Poisson process restricted to a cell.
struct PoissonSample {
    Cell cell;
    std::vector<Point> points;
    double intensity;  // = area(cell)
};

inline std::vector<Point> sample_uniform_square(std::size_t n, RandomStream& rng) {
    std::vector<Point> pts;
    pts.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = rng.uniform01();
        const double y = rng.uniform01();
        pts.push_back({x, y});
    }
    return pts;
}

/// n i.i.d. uniform points in [0,1]^2, deterministic per RngSpec.
inline std::vector<Point> sample_uniform_square(std::size_t n, RngSpec spec) {
    RandomStream rng(spec);
    return sample_uniform_square(n, rng);
}

/// Abscissa CDF of the uniform distribution on a cell. The width of C_k(a,b)
/// at x is (x-a)^(k-1)(b-a) on the left half, mirrored on the right, which
/// integrates to a piecewise power law.
inline double cell_abscissa_cdf(const Cell& cell, double x) {
    const double w = cell.b - cell.a;
    if (x <= cell.a) return 0.0;
    if (x >= cell.b) return 1.0;
    const double scale = powi(2.0, cell.k - 1) / powi(w, cell.k);
    if (2.0 * x <= cell.a + cell.b) return powi(x - cell.a, cell.k) * scale;
    return 1.0 - powi(cell.b - x, cell.k) * scale;
}

/// Inverse of cell_abscissa_cdf (closed form).
inline double cell_abscissa_quantile(const Cell& cell, double u) {
    if (!(0.0 <= u && u <= 1.0)) throw std::invalid_argument("quantile: u outside [0, 1]");
    const double w = cell.b - cell.a;
    const double half_scale = std::ldexp(1.0, 1 - cell.k);  // 2^(1-k)
    if (u < 0.5) return cell.a + w * std::pow(u * half_scale, 1.0 / cell.k);
    return cell.b - w * std::pow((1.0 - u) * half_scale, 1.0 / cell.k);
}

inline std::vector<Point> sample_uniform_cell(const Cell& cell, std::size_t n,
                                              RandomStream& rng) {
    std::vector<Point> pts;
    pts.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = rng.uniform01();
        const double x = cell_abscissa_quantile(cell, u);
        auto [lo, hi] = detail::cell_bounds_t<double>(cell.k, cell.a, cell.b, x);
        const double y = lo + rng.uniform01() * (hi - lo);
        pts.push_back({x, y});
    }
    return pts;
}

/// n i.i.d. uniform points in the cell by inverse-CDF on the abscissa and a
/// uniform ordinate between the boundary arcs.
inline std::vector<Point> sample_uniform_cell(const Cell& cell, std::size_t n, RngSpec spec) {
    RandomStream rng(spec);
    return sample_uniform_cell(cell, n, rng);
}

inline PoissonSample sample_poisson_cell(const Cell& cell, RandomStream& rng) {
    const double lambda = area(cell);
    if (lambda > kMaxPoissonArea)
        throw GuardrailError("sample_poisson_cell: cell area exceeds guardrail");
    const long long n = rng.poisson(lambda);
    auto pts = sample_uniform_cell(cell, static_cast<std::size_t>(n), rng);
    return {cell, std::move(pts), lambda};
}

/// Intensity-1 Poisson process on the cell: N ~ Poisson(area), then N uniform
/// points, all from one stream.
inline PoissonSample sample_poisson_cell(const Cell& cell, RngSpec spec) {
    RandomStream rng(spec);
    return sample_poisson_cell(cell, rng);
}

struct PoissonPmfTail {
    double pmf;
    double tail_bound;
};

inline double poisson_pmf(double lambda, long long m) {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw std::invalid_argument("poisson_pmf: lambda must be positive");
    if (m < 0) throw std::invalid_argument("poisson_pmf: m must be >= 0");
    const double lm = static_cast<double>(m);
    return std::exp(lm * std::log(lambda) - lambda - std::lgamma(lm + 1.0));
}

/// P(X = m) together with the tail bound
/// P(X >= m) <= (m+1)/(m+1-lambda) P(X = m), valid only when m + 1 > lambda.
inline PoissonPmfTail poisson_pmf_and_tail(double lambda, long long m) {
    const double pmf = poisson_pmf(lambda, m);
    const double lm = static_cast<double>(m);
    if (!(lm + 1.0 > lambda))
        throw std::invalid_argument("poisson_pmf_and_tail: tail bound requires m + 1 > lambda");
    return {pmf, (lm + 1.0) / (lm + 1.0 - lambda) * pmf};
}

}  // namespace kmc
