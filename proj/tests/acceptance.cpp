// Acceptance suite: one hard pass/fail line per criterion, exit 1 on any
// failure. Run with no arguments for all criteria or pass criterion numbers.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "kmc/experiments.hpp"
#include "kmc/io.hpp"
#include "kmc/sampling.hpp"
#include "kmc/solver.hpp"
#include "kmc/stats.hpp"
#include "kmc/transform.hpp"

using namespace kmc;

namespace {

int g_failures = 0;

#define REQUIRE_MSG(cond, msg)                                                      \
    do {                                                                            \
        if (!(cond)) {                                                              \
            std::cerr << "[FAIL] " << __FILE__ << ":" << __LINE__ << " " << msg     \
                      << "\n";                                                      \
            ++g_failures;                                                           \
            return false;                                                           \
        }                                                                           \
    } while (0)

double rand_in(RandomStream& rng, double lo, double hi) {
    return lo + (hi - lo) * rng.uniform01();
}

Chain random_cell_chain(RandomStream& rng, int k, double a, double b, int m) {
    std::vector<double> xs(m);
    for (auto& x : xs) x = rand_in(rng, a + 1e-9, b - 1e-9);
    std::sort(xs.begin(), xs.end());
    Chain chain;
    for (double x : xs) {
        auto [lo, hi] = detail::cell_bounds_t<double>(k, a, b, x);
        chain.points.push_back({x, rand_in(rng, lo, hi)});
    }
    return chain;
}

Chain jittered_curve_chain(RandomStream& rng, int k, double a, double b, int m,
                           double jitter) {
    std::vector<double> xs(m);
    for (auto& x : xs) x = rand_in(rng, a + 0.05 * (b - a), b - 0.05 * (b - a));
    std::sort(xs.begin(), xs.end());
    Chain chain;
    for (double x : xs) {
        auto [lo, hi] = detail::cell_bounds_t<double>(k, a, b, x);
        chain.points.push_back({x, powi(x, k) + jitter * (rng.uniform01() - 0.5) * (hi - lo)});
    }
    return chain;
}

Chain witness_chain(RandomStream& rng, int k, double a, double b, int samples) {
    const Cell cell(k, a, b);
    auto pts = sample_uniform_cell(cell, static_cast<std::size_t>(samples), rng);
    return solve_dp(std::move(pts), k, a, b).witness;
}

// 1. window validator == exhaustive validator, exact predicates
bool criterion_validator_equivalence() {
    RandomStream rng(RngSpec{900001, 0});
    int agreements = 0, total = 0;
    for (int k = 1; k <= 4; ++k) {
        for (int rep = 0; rep < 250; ++rep) {
            const int m = static_cast<int>(rng.next_u64() % 9);
            Chain interior;
            switch (rep % 3) {
                case 0: interior = random_cell_chain(rng, k, 0, 1, m); break;
                case 1: interior = jittered_curve_chain(rng, k, 0, 1, m, 0.35); break;
                default: interior = witness_chain(rng, k, 0, 1, std::max(m, 1)); break;
            }
            const BoundaryChain chain{k, 0, 1, interior};
            const auto windows = validate_windows(chain, PredicateMode::exact);
            const auto tuples = validate_exhaustive(chain, PredicateMode::exact);
            ++total;
            if (windows.valid == tuples.valid) ++agreements;
        }
    }
    REQUIRE_MSG(total == 1000, "expected 1000 chains, got " << total);
    REQUIRE_MSG(agreements == total,
                "validator disagreement on " << (total - agreements) << "/" << total);
    return true;
}

// 2. contains(C_k(a,b)) == single-point chain validity, exact predicates
bool criterion_cell_characterization() {
    RandomStream rng(RngSpec{900002, 0});
    for (int k = 1; k <= 5; ++k) {
        const Cell cell(k, 0, 1);
        int agreements = 0, total = 0;
        while (total < 10000) {
            const Point p{rng.uniform01(), rng.uniform01()};
            if (p.x <= 0.0 || p.x >= 1.0) continue;
            ++total;
            const bool member = contains_exact(cell, p);
            const bool valid =
                validate_windows(BoundaryChain{k, 0, 1, Chain{{p}}}, PredicateMode::exact)
                    .valid;
            if (member == valid) ++agreements;
        }
        REQUIRE_MSG(agreements == total,
                    "k=" << k << ": " << (total - agreements) << " disagreements");
    }
    return true;
}

// 3. quadrature of the boundary gap reproduces the closed-form area; a
// rejection-sampling estimate agrees within 3 sigma
bool criterion_area_formula() {
    RandomStream rng(RngSpec{900003, 0});
    static const double gl_x[8] = {-0.9602898564975363, -0.7966664774136267,
                                   -0.5255324099163290, -0.1834346424956498,
                                   0.1834346424956498,  0.5255324099163290,
                                   0.7966664774136267,  0.9602898564975363};
    static const double gl_w[8] = {0.1012285362903763, 0.2223810344533745,
                                   0.3137066458778873, 0.3626837833783620,
                                   0.3626837833783620, 0.3137066458778873,
                                   0.2223810344533745, 0.1012285362903763};
    auto integrate = [&](const Cell& cell, double lo, double hi) {
        constexpr int panels = 4;
        const double h = (hi - lo) / panels;
        double total = 0.0;
        for (int p = 0; p < panels; ++p) {
            const double mid = lo + (p + 0.5) * h;
            for (int i = 0; i < 8; ++i) {
                const auto bounds = cell_bounds(cell, mid + 0.5 * h * gl_x[i]);
                total += gl_w[i] * (bounds.upper - bounds.lower);
            }
        }
        return total * 0.5 * h;
    };

    for (int rep = 0; rep < 20; ++rep) {
        const int k = 1 + static_cast<int>(rng.next_u64() % 6);
        const double a = 2.0 * rng.uniform01();
        const double b = a + 0.4 + 2.0 * rng.uniform01();
        const Cell cell(k, a, b);
        const double mid = 0.5 * (a + b);
        const double quad = integrate(cell, a, mid) + integrate(cell, mid, b);
        REQUIRE_MSG(std::fabs(quad - area(cell)) <= 1e-9 * area(cell),
                    "quadrature mismatch at k=" << k << " a=" << a << " b=" << b << ": "
                                               << quad << " vs " << area(cell));

        // bounding box from a fine scan, padded so it surely contains the cell
        double y_lo = std::min(powi(a, k), powi(b, k));
        double y_hi = std::max(powi(a, k), powi(b, k));
        for (int g = 0; g <= 1024; ++g) {
            const double x = std::min(b, a + (b - a) * g / 1024.0);
            const auto bounds = cell_bounds(cell, x);
            y_lo = std::min(y_lo, bounds.lower);
            y_hi = std::max(y_hi, bounds.upper);
        }
        const double pad = 1e-6 * (y_hi - y_lo);
        y_lo -= pad;
        y_hi += pad;
        const double box_area = (b - a) * (y_hi - y_lo);
        const int draws = 100000;
        long long hits = 0;
        for (int i = 0; i < draws; ++i) {
            const Point p{rand_in(rng, a, b), rand_in(rng, y_lo, y_hi)};
            if (contains(cell, p)) ++hits;
        }
        const double p_true = area(cell) / box_area;
        const double freq = static_cast<double>(hits) / draws;
        const double sigma = std::sqrt(p_true * (1.0 - p_true) / draws);
        REQUIRE_MSG(std::fabs(freq - p_true) <= 3.0 * sigma + 3e-6,
                    "rejection estimate off at k=" << k << ": freq=" << freq
                                                   << " expected=" << p_true);
    }
    return true;
}

// 4. the cell map: image containment, uniformity, exact sign preservation
bool criterion_map_invariances() {
    const double a = 0.5, b = 2.0, c = 1.0, d = 1.75;
    for (int k = 1; k <= 4; ++k) {
        const CellMap map(k, a, b, c, d);
        const Cell source(k, a, b);
        const Cell target(k, c, d);
        RandomStream rng(RngSpec{900004, static_cast<std::uint64_t>(k)});

        const auto pts = sample_uniform_cell(source, 25000, rng);
        std::vector<long long> counts(100, 0);
        for (const Point p : pts) {
            const Point q = apply_T(map, p);
            REQUIRE_MSG(contains(target, q, 1e-9),
                        "image point escaped the target cell at k=" << k);
            const double u = cell_abscissa_cdf(target, q.x);
            auto [lo, hi] = detail::cell_bounds_t<double>(k, target.a, target.b, q.x);
            const double v = (q.y - lo) / (hi - lo);
            ++counts[std::min(9, static_cast<int>(u * 10.0)) * 10 +
                     std::min(9, std::max(0, static_cast<int>(v * 10.0)))];
        }
        const double stat = chi_square_uniform(counts, 25000.0);
        REQUIRE_MSG(stat < kChiSq99Dof999,
                    "chi-square " << stat << " exceeds 0.999 quantile at k=" << k);
    }

    RandomStream rng(RngSpec{900004, 99});
    int valid_count = 0;
    for (int rep = 0; rep < 1000; ++rep) {
        const int k = 1 + static_cast<int>(rng.next_u64() % 4);
        const CellMap map(k, a, b, c, d);
        Chain interior = rep % 2 == 0
                             ? witness_chain(rng, k, a, b, 7)
                             : random_cell_chain(rng, k, a, b,
                                                 2 + static_cast<int>(rng.next_u64() % 5));
        const BoundaryChain chain{k, a, b, interior};
        const bool was_valid = validate_windows(chain).valid;
        if (was_valid) ++valid_count;

        // exact per-window divided differences before and after
        std::vector<Rational> xs_src, ys_src, xs_dst, ys_dst;
        auto push_boundary = [&](std::vector<Rational>& xs, std::vector<Rational>& ys,
                                 double endpoint, int mult) {
            for (int i = 0; i < mult; ++i) {
                xs.push_back(to_rational(endpoint));
                ys.push_back(rational_pow(to_rational(endpoint), k));
            }
        };
        push_boundary(xs_src, ys_src, a, k);
        push_boundary(xs_dst, ys_dst, c, k);
        for (Point p : interior.points) {
            xs_src.push_back(to_rational(p.x));
            ys_src.push_back(to_rational(p.y));
            const auto [qx, qy] = apply_T_exact(map, p);
            xs_dst.push_back(qx);
            ys_dst.push_back(qy);
        }
        push_boundary(xs_src, ys_src, b, k);
        push_boundary(xs_dst, ys_dst, d, k);

        for (std::size_t i = 0; i + k < xs_src.size(); ++i) {
            const Rational before = detail::window_delta_rational(
                std::span<const Rational>(xs_src.data() + i, k + 1),
                std::span<const Rational>(ys_src.data() + i, k + 1), k);
            const Rational after = detail::window_delta_rational(
                std::span<const Rational>(xs_dst.data() + i, k + 1),
                std::span<const Rational>(ys_dst.data() + i, k + 1), k);
            REQUIRE_MSG(sign_of(before) == sign_of(after),
                        "window sign flipped under the map at k=" << k);
        }

        // the float image keeps its verdict
        Chain mapped;
        for (Point p : interior.points) mapped.points.push_back(apply_T(map, p));
        REQUIRE_MSG(validate_windows(BoundaryChain{k, c, d, mapped}).valid == was_valid,
                    "mapped chain verdict changed at k=" << k);
    }
    REQUIRE_MSG(valid_count >= 200, "too few valid chains in the mix: " << valid_count);
    return true;
}

// 5. solve_dp == solve_brute; solve_lis == solve_dp
bool criterion_solver_oracles() {
    RandomStream rng(RngSpec{900005, 0});
    for (int k = 1; k <= 3; ++k) {
        for (int rep = 0; rep < 500; ++rep) {
            const int n = 4 + static_cast<int>(rng.next_u64() % 9);
            std::vector<Point> pts;
            for (int i = 0; i < n; ++i) pts.push_back({rng.uniform01(), rng.uniform01()});
            const auto dp = solve_dp(pts, k, 0, 1);
            const auto brute = solve_brute(pts, k, 0, 1);
            REQUIRE_MSG(dp.length == brute.length, "dp " << dp.length << " != brute "
                                                         << brute.length << " at k=" << k);
            REQUIRE_MSG(
                validate_windows(BoundaryChain{k, 0, 1, dp.witness}).valid &&
                    validate_windows(BoundaryChain{k, 0, 1, brute.witness}).valid,
                "witness failed validation at k=" << k);
        }
    }
    for (int rep = 0; rep < 500; ++rep) {
        const int n = 20 + static_cast<int>(rng.next_u64() % 181);
        std::vector<Point> pts;
        for (int i = 0; i < n; ++i) pts.push_back({rng.uniform01(), rng.uniform01()});
        const auto lis = solve_lis(pts, 0, 1);
        const auto dp = solve_dp(pts, 1, 0, 1);
        REQUIRE_MSG(lis.length == dp.length,
                    "lis " << lis.length << " != dp " << dp.length << " at n=" << n);
        REQUIRE_MSG(validate_windows(BoundaryChain{1, 0, 1, lis.witness}).valid,
                    "lis witness failed validation");
    }
    return true;
}

// 6. k=1 growth law: mean L / sqrt(n) and the fitted exponent
bool criterion_hammersley() {
    const auto recs = run_uniform_trials(1, 10000, 200, 900006);
    double m = 0;
    for (const auto& r : recs) m += static_cast<double>(r.L);
    m /= static_cast<double>(recs.size());
    const double ratio = m / 100.0;
    REQUIRE_MSG(ratio > 1.80 && ratio < 2.00,
                "mean L/sqrt(n) = " << ratio << " outside [1.80, 2.00]");

    const auto report =
        estimate_alpha(1, {1000, 3162, 10000, 31623, 100000}, 50, 900106, Model::uniform);
    REQUIRE_MSG(report.exponent_hat.has_value(), "no exponent fitted");
    REQUIRE_MSG(*report.exponent_hat > 0.47 && *report.exponent_hat < 0.53,
                "exponent " << *report.exponent_hat << " outside [0.47, 0.53]");
    return true;
}

// 7. k=2 growth exponent
bool criterion_convex_exponent() {
    const auto report =
        estimate_alpha(2, {200, 500, 1000, 2000}, 100, 900007, Model::uniform);
    REQUIRE_MSG(report.exponent_hat.has_value(), "no exponent fitted");
    std::string per_n;
    for (const auto& s : report.per_n)
        per_n += " (n=" + std::to_string(static_cast<long long>(s.n)) +
                 ", mean=" + std::to_string(s.mean_l) + ")";
    REQUIRE_MSG(*report.exponent_hat > 0.28 && *report.exponent_hat < 0.40,
                "exponent " << *report.exponent_hat << " outside [0.28, 0.40];"
                            << " per-n means:" << per_n
                            << "; the ratio L/n^(1/3) is still rising at n=2000, so the"
                            << " finite-size exponent sits above the asymptotic window");
    return true;
}

// 8. superadditivity on every coupled realization
bool criterion_superadditivity() {
    RandomStream rng(RngSpec{900008, 0});
    for (int k = 1; k <= 2; ++k) {
        const double n = k == 1 ? 10.0 : 4.0;
        for (int rep = 0; rep < 100; ++rep) {
            const auto sample = sample_poisson_cell(Cell(k, 0, 2 * n), rng);
            const auto solve = [&](double lo, double hi) {
                return k == 1 ? solve_lis(sample.points, lo, hi).length
                              : solve_dp(sample.points, k, lo, hi).length;
            };
            const long long whole = solve(0, 2 * n);
            const long long left = solve(0, n);
            const long long right = solve(n, 2 * n);
            REQUIRE_MSG(whole >= left + right, "superadditivity violated at k="
                                                   << k << ": " << whole << " < " << left
                                                   << " + " << right);
        }
    }
    return true;
}

// 9. the greedy subcell construction beats n/6 with the predicted occupancy
bool criterion_lower_bound() {
    const double n = 60.0;
    const int subcells = 20;
    const int trials = 100;
    for (int k = 1; k <= 5; ++k) {
        long long occupied_total = 0;
        int cleared = 0;
        for (int t = 0; t < trials; ++t) {
            // restriction of the process to the union of subcells: one
            // independent Poisson sample per subcell
            std::vector<Point> pts;
            for (int i = 0; i < subcells; ++i) {
                const Cell sub(k, 3.0 * i, 3.0 * (i + 1));
                const RngSpec spec{900009 + static_cast<std::uint64_t>(k),
                                   static_cast<std::uint64_t>(t) * 64 +
                                       static_cast<std::uint64_t>(i)};
                const auto sample = sample_poisson_cell(sub, spec);
                pts.insert(pts.end(), sample.points.begin(), sample.points.end());
            }
            const Cell whole(k, 0, n);
            const auto greedy = solve_greedy_cells(PoissonSample{whole, pts, area(whole)});
            REQUIRE_MSG(
                validate_windows(BoundaryChain{k, 0, n, greedy.witness}).valid,
                "greedy chain failed validation at k=" << k);
            occupied_total += greedy.length;
            if (static_cast<double>(greedy.length) > n / 6.0) ++cleared;
        }
        REQUIRE_MSG(cleared >= 99, "length > n/6 in only " << cleared << "% of trials at k="
                                                           << k);
        const double occ_freq =
            static_cast<double>(occupied_total) / (static_cast<double>(trials) * subcells);
        const double threshold = 1.0 - std::exp(-1.0);
        const double sigma =
            std::sqrt(occ_freq * (1.0 - occ_freq) / (trials * subcells) + 1e-12);
        REQUIRE_MSG(occ_freq > threshold - 3.0 * sigma,
                    "occupancy " << occ_freq << " below 1 - 1/e at k=" << k);
    }
    return true;
}

// 10. concentration scale at k=1, n=10^4
bool criterion_concentration() {
    const auto report = concentration_experiment(1, 10000, 1000, 900010);
    const auto& slice = report.concentration.at(0);
    REQUIRE_MSG(slice.std_over_scale.has_value(), "no std computed");
    // regression ceiling from the pilot run; the theory gives sub-Gaussian
    // tails at this scale, not a point prediction
    REQUIRE_MSG(*slice.std_over_scale <= 2.5,
                "std / n^(1/4) = " << *slice.std_over_scale << " above the 2.5 ceiling");
    REQUIRE_MSG(slice.exceedance[0] >= slice.exceedance[1] &&
                    slice.exceedance[1] >= slice.exceedance[2],
                "exceedance frequencies not monotone: " << slice.exceedance[0] << ", "
                                                        << slice.exceedance[1] << ", "
                                                        << slice.exceedance[2]);
    REQUIRE_MSG(slice.exceedance[2] < 0.2,
                "exceedance at eps=3 is " << slice.exceedance[2]);
    return true;
}

// 11. Poisson vs binomial coupling bound at c = 3
bool criterion_coupling() {
    const auto report = coupling_check(1, 100, 1000, 900011);
    REQUIRE_MSG(report.within_bound[2],
                "deviation frequency " << report.deviation_freq[2] << " above bound "
                                       << report.bound[2] << " + slack " << report.slack[2]);
    const double se = std::sqrt(report.lambda / report.trials);
    REQUIRE_MSG(std::fabs(report.mean_poisson - report.lambda) < 3.0 * se,
                "poisson mean " << report.mean_poisson << " off from " << report.lambda);
    REQUIRE_MSG(std::fabs(report.mean_binomial - report.lambda) < 3.0 * se,
                "binomial mean " << report.mean_binomial << " off from " << report.lambda);
    return true;
}

struct Criterion {
    int id;
    const char* name;
    bool (*fn)();
};

const Criterion kCriteria[] = {
    {1, "validator equivalence (windows == exhaustive, exact)", criterion_validator_equivalence},
    {2, "cell characterization (contains == single-point validity)", criterion_cell_characterization},
    {3, "area formula (quadrature + rejection sampling)", criterion_area_formula},
    {4, "map invariances (containment, uniformity, sign preservation)", criterion_map_invariances},
    {5, "solver oracle equivalence (dp == brute, lis == dp)", criterion_solver_oracles},
    {6, "k=1 growth law (mean ratio and exponent)", criterion_hammersley},
    {7, "k=2 growth exponent", criterion_convex_exponent},
    {8, "superadditivity per realization", criterion_superadditivity},
    {9, "greedy lower-bound construction", criterion_lower_bound},
    {10, "concentration scale", criterion_concentration},
    {11, "Poisson-uniform coupling", criterion_coupling},
};

}  // namespace

int main(int argc, char** argv) {
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

    for (const auto& criterion : kCriteria) {
        if (!selected.empty() && !selected.count(criterion.id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        bool ok = false;
        try {
            ok = criterion.fn();
        } catch (const std::exception& e) {
            std::cerr << "[FAIL] criterion " << criterion.id << " raised: " << e.what()
                      << "\n";
            ++g_failures;
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::cout << (ok ? "[PASS] " : "[FAIL] ") << "criterion " << criterion.id << ": "
                  << criterion.name << " (" << secs << " s)\n";
    }
    return g_failures == 0 ? 0 : 1;
}
