#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace kmc {

/// Identifies one reproducible random substream. Identical (base_seed,
/// stream_id) pairs yield identical streams regardless of execution order or
/// thread count; experiments key stream_id by trial index.
struct RngSpec {
    std::uint64_t base_seed = 0;
    std::uint64_t stream_id = 0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(RngSpec spec) {
    std::uint64_t s = spec.base_seed;
    std::uint64_t h = splitmix64(s);
    s = h ^ (0x9e3779b97f4a7c15ULL * (spec.stream_id + 1));
    return splitmix64(s);
}

}  // namespace detail

/// Deterministic random stream over a fully specified engine (mt19937_64),
/// with doubles produced directly from the raw 64-bit output so that the
/// stream never depends on library distribution internals.
class RandomStream {
  public:
    explicit RandomStream(RngSpec spec) : eng_(detail::derive_seed(spec)) {}

    std::uint64_t next_u64() { return eng_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform01() { return (eng_() >> 11) * 0x1.0p-53; }

    /// Poisson draw: sequential-search inversion below lambda = 30, Hormann's
    /// transformed-rejection (PTRS) above. Both consume only uniform01().
    long long poisson(double lambda) {
        if (!(lambda >= 0.0) || !std::isfinite(lambda))
            throw std::invalid_argument("poisson: lambda must be finite and >= 0");
        if (lambda == 0.0) return 0;
        if (lambda < 30.0) return poisson_inversion(lambda);
        return poisson_ptrs(lambda);
    }

  private:
    long long poisson_inversion(double lambda) {
        long long x = 0;
        double p = std::exp(-lambda);
        double s = p;
        const double u = uniform01();
        while (u > s) {
            ++x;
            p *= lambda / static_cast<double>(x);
            s += p;
            if (x > 4'000'000) throw std::runtime_error("poisson inversion failed to terminate");
        }
        return x;
    }

    long long poisson_ptrs(double lambda) {
        const double slam = std::sqrt(lambda);
        const double loglam = std::log(lambda);
        const double b = 0.931 + 2.53 * slam;
        const double a = -0.059 + 0.02483 * b;
        const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        const double v_r = 0.9277 - 3.6224 / (b - 2.0);
        while (true) {
            const double u = uniform01() - 0.5;
            const double v = uniform01();
            const double us = 0.5 - std::fabs(u);
            const auto k = static_cast<long long>(
                std::floor((2.0 * a / us + b) * u + lambda + 0.43));
            if (us >= 0.07 && v <= v_r) return k;
            if (k < 0 || (us < 0.013 && v > us)) continue;
            const double lhs = std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b);
            const double rhs = -lambda + static_cast<double>(k) * loglam -
                               std::lgamma(static_cast<double>(k) + 1.0);
            if (lhs <= rhs) return k;
        }
    }

    std::mt19937_64 eng_;
};

}  // namespace kmc
