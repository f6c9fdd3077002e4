#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "kmc/sampling.hpp"
#include "kmc/solver.hpp"
#include "kmc/stats.hpp"

namespace kmc {

enum class Model { uniform, poisson };

inline const char* model_name(Model m) { return m == Model::uniform ? "uniform" : "poisson"; }

/// One Monte Carlo realization. `n` is the point count in the uniform model
/// and the interval width in the Poisson model.
struct TrialRecord {
    int k = 1;
    Model model = Model::uniform;
    double n = 0.0;
    std::uint64_t stream_id = 0;
    long long L = 0;
    double wall_ms = 0.0;
};

struct PerNStats {
    double n = 0.0;
    int trials = 0;
    double mean_l = 0.0;
    std::optional<double> std_l;
    std::optional<double> ci_half_width;  // 95% normal approximation
};

struct LowerBoundStat {
    double n = 0.0;
    double mean_l_over_n = 0.0;
};

struct ConcentrationSlice {
    double n = 0.0;
    std::optional<double> std_l;
    std::optional<double> std_over_scale;  // std / n^(1/(2(k+1)))
    std::array<double, 3> exceedance{};    // freq of |L - mean| > eps scale, eps = 1,2,3
};

struct LimitShapeSlice {
    double n = 0.0;
    double mean_distance = 0.0;  // pooled over all witness points
    double max_distance = 0.0;
    double q50_trial_mean = 0.0;
    double q90_trial_mean = 0.0;
};

/// Aggregate report for the estimation experiments. Serialized verbatim as
/// snake_case JSON; wall times never enter a report, so reports are
/// byte-identical across re-runs and thread counts.
struct EstimateReport {
    int k = 1;
    Model model = Model::uniform;
    std::string base_domain;  // "unit_square" or "poisson_cell"
    std::vector<double> n_grid;
    std::vector<PerNStats> per_n;
    std::optional<double> alpha_hat;
    std::optional<std::pair<double, double>> alpha_ci;
    std::optional<double> exponent_hat;
    std::optional<std::pair<double, double>> exponent_ci;
    std::vector<LowerBoundStat> superadditive_lower_bounds;
    std::vector<ConcentrationSlice> concentration;
    std::vector<LimitShapeSlice> limit_shape;
};

struct CouplingReport {
    int k = 1;
    double n = 0.0;
    int trials = 0;
    double lambda = 0.0;
    double mean_poisson = 0.0;
    double mean_binomial = 0.0;
    std::array<double, 3> deviation_freq{};  // c = 1, 2, 3
    std::array<double, 3> bound{};           // 4 exp(-c^2/3)
    std::array<double, 3> slack{};           // 3 sigma binomial slack
    std::array<bool, 3> within_bound{};
};

/// Largest uniform-model n the default solver envelopes accept. Chosen so the
/// DP transition count stays under the default budget at desk scale.
inline long long default_max_uniform_n(int k) {
    switch (k) {
        case 1: return 1'000'000;
        case 2: return 2'000;
        case 3: return 120;
        case 4: return 60;
        case 5: return 40;
        case 6: return 30;
        case 7: return 24;
        default: return 0;
    }
}

/// Poisson-model width limit equivalent to the uniform envelope: the expected
/// in-cell point count of C_k(0,n) matches that of a uniform sample of the
/// maximal feasible size, which gives n <= max_n^(1/(k+1)).
inline double default_max_poisson_width(int k) {
    const auto max_n = static_cast<double>(default_max_uniform_n(k));
    if (max_n <= 0.0) return 0.0;
    return std::pow(max_n, 1.0 / (k + 1));
}

struct TrialOptions {
    std::uint64_t stream_offset = 0;
    double a_offset = 0.0;  // Poisson trials run over (a_offset, a_offset + n)
    int threads = 0;        // 0 = hardware concurrency
    long long dp_budget = kDefaultStateBudget;
    std::optional<long long> max_uniform_n;  // feasibility override
    std::optional<double> max_poisson_width;
};

namespace detail {

inline int resolve_threads(int requested, int jobs) {
    int t = requested > 0 ? requested
                          : static_cast<int>(std::thread::hardware_concurrency());
    if (t < 1) t = 1;
    return std::min(t, std::max(jobs, 1));
}

/// Runs body(0..count-1) on a small worker pool. Work is claimed through an
/// atomic counter, so ordering is arbitrary; callers index results by job id.
inline void parallel_for(int count, int threads, const std::function<void(int)>& body) {
    if (count <= 0) return;
    threads = resolve_threads(threads, count);
    if (threads == 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        while (true) {
            const int i = next.fetch_add(1);
            if (i >= count) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

struct ShapeStat {
    double sum = 0.0;
    double max = 0.0;
    long long count = 0;
};

inline SolveResult solve_instance(int k, std::vector<Point> pts, double a, double b,
                                  long long budget) {
    if (k == 1) return solve_lis(std::move(pts), a, b);
    return solve_dp(std::move(pts), k, a, b, budget);
}

}  // namespace detail

/// Per-point vertical distance |y - x^k| of a witness to the curve,
/// normalized by the local cell height.
inline std::vector<double> witness_gamma_distances(int k, double a, double b,
                                                   const Chain& witness) {
    const Cell cell(k, a, b);
    std::vector<double> dist;
    dist.reserve(witness.size());
    for (Point p : witness.points) {
        auto [lo, hi] = detail::cell_bounds_t<double>(k, a, b, p.x);
        const double height = hi - lo;
        dist.push_back(std::fabs(p.y - powi(p.x, k)) / height);
    }
    return dist;
}

namespace detail {

struct TrialData {
    TrialRecord rec;
    ShapeStat shape;
};

template <class MakeInstance>
std::vector<TrialData> run_trials(int k, Model model, double n, int trials,
                                  std::uint64_t base_seed, const TrialOptions& opts,
                                  bool capture_shape, MakeInstance&& make_instance) {
    if (trials < 0) throw std::invalid_argument("run_trials: negative trial count");
    std::vector<TrialData> out(static_cast<std::size_t>(trials));
    parallel_for(trials, opts.threads, [&](int t) {
        const std::uint64_t stream = opts.stream_offset + static_cast<std::uint64_t>(t);
        const RngSpec spec{base_seed, stream};
        const auto t0 = std::chrono::steady_clock::now();
        auto [pts, a, b] = make_instance(spec);
        SolveResult solved = solve_instance(k, std::move(pts), a, b, opts.dp_budget);
        const auto t1 = std::chrono::steady_clock::now();

        TrialData data;
        data.rec = {k, model, n, stream, solved.length,
                    std::chrono::duration<double, std::milli>(t1 - t0).count()};
        if (capture_shape) {
            const auto dist = witness_gamma_distances(k, a, b, solved.witness);
            for (double d : dist) {
                data.shape.sum += d;
                data.shape.max = std::max(data.shape.max, d);
            }
            data.shape.count = static_cast<long long>(dist.size());
        }
        out[static_cast<std::size_t>(t)] = std::move(data);
    });
    return out;
}

inline std::vector<TrialData> uniform_trials_ex(int k, long long n, int trials,
                                                std::uint64_t base_seed,
                                                const TrialOptions& opts, bool capture_shape) {
    if (n < 0) throw std::invalid_argument("run_uniform_trials: negative n");
    const long long max_n = opts.max_uniform_n.value_or(default_max_uniform_n(k));
    if (n > max_n)
        throw GuardrailError("run_uniform_trials: infeasible (k, n) combination");
    return run_trials(
        k, Model::uniform, static_cast<double>(n), trials, base_seed, opts, capture_shape,
        [&](RngSpec spec) {
            auto pts = sample_uniform_square(static_cast<std::size_t>(n), spec);
            return std::tuple<std::vector<Point>, double, double>(std::move(pts), 0.0, 1.0);
        });
}

inline std::vector<TrialData> poisson_trials_ex(int k, double n, int trials,
                                                std::uint64_t base_seed,
                                                const TrialOptions& opts, bool capture_shape) {
    if (!(n > 0.0) || !std::isfinite(n))
        throw std::invalid_argument("run_poisson_trials: need n > 0");
    const double max_w = opts.max_poisson_width.value_or(default_max_poisson_width(k));
    if (n > max_w + 1e-12)
        throw GuardrailError("run_poisson_trials: infeasible (k, n) combination");
    const double a = opts.a_offset;
    const Cell cell(k, a, a + n);
    return run_trials(k, Model::poisson, n, trials, base_seed, opts, capture_shape,
                      [&, cell](RngSpec spec) {
                          auto sample = sample_poisson_cell(cell, spec);
                          return std::tuple<std::vector<Point>, double, double>(
                              std::move(sample.points), cell.a, cell.b);
                      });
}

inline std::vector<TrialRecord> strip(const std::vector<TrialData>& data) {
    std::vector<TrialRecord> recs;
    recs.reserve(data.size());
    for (const auto& d : data) recs.push_back(d.rec);
    return recs;
}

inline PerNStats summarize(double n, const std::vector<TrialRecord>& recs) {
    PerNStats s;
    s.n = n;
    s.trials = static_cast<int>(recs.size());
    if (recs.empty()) return s;
    std::vector<double> ls;
    ls.reserve(recs.size());
    for (const auto& r : recs) ls.push_back(static_cast<double>(r.L));
    s.mean_l = mean(ls);
    if (ls.size() >= 2) {
        s.std_l = sample_std(ls);
        s.ci_half_width = 1.959963984540054 * *s.std_l / std::sqrt(static_cast<double>(ls.size()));
    }
    return s;
}

}  // namespace detail

/// Uniform-model trials: X_n in the unit square, exact solve, one record per
/// trial. Deterministic per (base_seed, stream_offset + trial index).
inline std::vector<TrialRecord> run_uniform_trials(int k, long long n, int trials,
                                                   std::uint64_t base_seed,
                                                   const TrialOptions& opts = {}) {
    return detail::strip(detail::uniform_trials_ex(k, n, trials, base_seed, opts, false));
}

/// Poisson-model trials over C_k(a_offset, a_offset + n).
inline std::vector<TrialRecord> run_poisson_trials(int k, double n, int trials,
                                                   std::uint64_t base_seed,
                                                   const TrialOptions& opts = {}) {
    return detail::strip(detail::poisson_trials_ex(k, n, trials, base_seed, opts, false));
}

namespace detail {

/// Constrained and free log-log fits over per-n mean lengths.
struct AlphaFit {
    double exponent;
    double alpha;
};

inline std::optional<AlphaFit> fit_alpha(const std::vector<double>& ns,
                                         const std::vector<double>& means,
                                         double fixed_exponent) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        if (means[i] > 0.0) {
            lx.push_back(std::log(ns[i]));
            ly.push_back(std::log(means[i]));
        }
    }
    if (lx.size() < 2) return std::nullopt;
    const LineFit free_fit = fit_line(lx, ly);
    double log_alpha = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) log_alpha += ly[i] - fixed_exponent * lx[i];
    log_alpha /= static_cast<double>(lx.size());
    return AlphaFit{free_fit.slope, std::exp(log_alpha)};
}

inline constexpr std::uint64_t kBootstrapStreamId = std::uint64_t(1) << 56;

}  // namespace detail

/// Least-squares estimation of the growth law: a free log-log exponent fit
/// plus a constant fit alpha at the model exponent (1/(k+1) for the uniform
/// model, 1 for the Poisson model). CIs are percentile bootstrap over trials
/// (1000 resamples). Poisson runs also report the per-n mean L/n lower
/// bounds, which approach the growth constant from below by superadditivity.
inline EstimateReport estimate_alpha(int k, const std::vector<double>& n_grid, int trials,
                                     std::uint64_t base_seed, Model model = Model::uniform,
                                     const TrialOptions& opts = {}) {
    if (n_grid.size() < 4)
        throw std::invalid_argument("estimate_alpha: need at least 4 grid values");
    for (std::size_t i = 1; i < n_grid.size(); ++i)
        if (!(n_grid[i] > n_grid[i - 1]))
            throw std::invalid_argument("estimate_alpha: n_grid must be ascending");
    if (trials < 1) throw std::invalid_argument("estimate_alpha: need trials >= 1");

    EstimateReport report;
    report.k = k;
    report.model = model;
    report.base_domain = model == Model::uniform ? "unit_square" : "poisson_cell";
    report.n_grid = n_grid;

    std::vector<std::vector<double>> ls_per_n;  // raw L values for bootstrap
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
        TrialOptions per = opts;
        per.stream_offset = opts.stream_offset + (static_cast<std::uint64_t>(i + 1) << 32);
        std::vector<TrialRecord> recs;
        if (model == Model::uniform) {
            recs = run_uniform_trials(k, static_cast<long long>(std::llround(n_grid[i])), trials,
                                      base_seed, per);
        } else {
            recs = run_poisson_trials(k, n_grid[i], trials, base_seed, per);
        }
        report.per_n.push_back(detail::summarize(n_grid[i], recs));
        std::vector<double> ls;
        for (const auto& r : recs) ls.push_back(static_cast<double>(r.L));
        ls_per_n.push_back(std::move(ls));
        if (model == Model::poisson)
            report.superadditive_lower_bounds.push_back(
                {n_grid[i], report.per_n.back().mean_l / n_grid[i]});
    }

    const double fixed_exp = model == Model::uniform ? 1.0 / (k + 1) : 1.0;
    std::vector<double> means;
    for (const auto& s : report.per_n) means.push_back(s.mean_l);
    const auto fit = detail::fit_alpha(n_grid, means, fixed_exp);
    if (!fit) throw std::invalid_argument("estimate_alpha: degenerate fit (fewer than 2 usable n)");
    report.exponent_hat = fit->exponent;
    report.alpha_hat = fit->alpha;

    // percentile bootstrap over trials, resampled independently per n
    constexpr int kResamples = 1000;
    RandomStream boot(RngSpec{base_seed, detail::kBootstrapStreamId + opts.stream_offset});
    std::vector<double> boot_exp, boot_alpha;
    boot_exp.reserve(kResamples);
    boot_alpha.reserve(kResamples);
    std::vector<double> boot_means(n_grid.size());
    for (int b = 0; b < kResamples; ++b) {
        for (std::size_t i = 0; i < n_grid.size(); ++i) {
            const auto& ls = ls_per_n[i];
            double s = 0.0;
            for (std::size_t t = 0; t < ls.size(); ++t)
                s += ls[boot.next_u64() % ls.size()];
            boot_means[i] = s / static_cast<double>(ls.size());
        }
        if (const auto bf = detail::fit_alpha(n_grid, boot_means, fixed_exp)) {
            boot_exp.push_back(bf->exponent);
            boot_alpha.push_back(bf->alpha);
        }
    }
    if (boot_exp.size() >= 100) {
        report.exponent_ci = {quantile(boot_exp, 0.025), quantile(boot_exp, 0.975)};
        report.alpha_ci = {quantile(boot_alpha, 0.025), quantile(boot_alpha, 0.975)};
    }
    return report;
}

/// Concentration probe at one n: empirical std, its ratio to the theoretical
/// scale n^(1/(2(k+1))), and exceedance frequencies at eps = 1, 2, 3.
inline EstimateReport concentration_experiment(int k, long long n, int trials,
                                               std::uint64_t base_seed,
                                               const TrialOptions& opts = {}) {
    const auto recs = run_uniform_trials(k, n, trials, base_seed, opts);
    EstimateReport report;
    report.k = k;
    report.model = Model::uniform;
    report.base_domain = "unit_square";
    report.n_grid = {static_cast<double>(n)};
    report.per_n.push_back(detail::summarize(static_cast<double>(n), recs));

    ConcentrationSlice slice;
    slice.n = static_cast<double>(n);
    if (recs.size() >= 2) {
        std::vector<double> ls;
        for (const auto& r : recs) ls.push_back(static_cast<double>(r.L));
        const double m = mean(ls);
        const double sd = sample_std(ls);
        const double scale = std::pow(static_cast<double>(n), 1.0 / (2.0 * (k + 1)));
        slice.std_l = sd;
        slice.std_over_scale = sd / scale;
        for (int e = 1; e <= 3; ++e) {
            long long hits = 0;
            for (double l : ls)
                if (std::fabs(l - m) > e * scale) ++hits;
            slice.exceedance[e - 1] = static_cast<double>(hits) / static_cast<double>(ls.size());
        }
    }
    report.concentration.push_back(slice);
    return report;
}

/// Paired Poisson-vs-binomial count experiment: N_Pi(0,n) against the number
/// of n^(k+1) uniform square points landing in C_k(0,1), drawn independently.
inline CouplingReport coupling_check(int k, long long n, int trials, std::uint64_t base_seed,
                                     const TrialOptions& opts = {}) {
    if (n < 1) throw std::invalid_argument("coupling_check: need n >= 1");
    if (trials < 1) throw std::invalid_argument("coupling_check: need trials >= 1");
    const double count = powi(static_cast<double>(n), k + 1);
    if (count > 1e7) throw GuardrailError("coupling_check: n^(k+1) exceeds count guardrail");
    const auto draws = static_cast<std::size_t>(count);
    const double lambda = count / (k * powi(2.0, k - 1));
    const Cell cell(k, 0.0, 1.0);

    std::vector<double> diff(static_cast<std::size_t>(trials));
    std::vector<double> pois(static_cast<std::size_t>(trials));
    std::vector<double> bino(static_cast<std::size_t>(trials));
    detail::parallel_for(trials, opts.threads, [&](int t) {
        RandomStream pstream(
            RngSpec{base_seed, opts.stream_offset + 2 * static_cast<std::uint64_t>(t)});
        RandomStream bstream(
            RngSpec{base_seed, opts.stream_offset + 2 * static_cast<std::uint64_t>(t) + 1});
        const auto np = static_cast<double>(pstream.poisson(lambda));
        long long nb = 0;
        for (std::size_t i = 0; i < draws; ++i) {
            const double x = bstream.uniform01();
            const double y = bstream.uniform01();
            if (contains(cell, {x, y})) ++nb;
        }
        pois[static_cast<std::size_t>(t)] = np;
        bino[static_cast<std::size_t>(t)] = static_cast<double>(nb);
        diff[static_cast<std::size_t>(t)] = np - static_cast<double>(nb);
    });

    CouplingReport report;
    report.k = k;
    report.n = static_cast<double>(n);
    report.trials = trials;
    report.lambda = lambda;
    report.mean_poisson = mean(pois);
    report.mean_binomial = mean(bino);
    const double scale = std::sqrt(lambda);
    for (int c = 1; c <= 3; ++c) {
        long long hits = 0;
        for (double d : diff)
            if (std::fabs(d) > c * scale) ++hits;
        const double freq = static_cast<double>(hits) / static_cast<double>(trials);
        const double bound = 4.0 * std::exp(-static_cast<double>(c * c) / 3.0);
        const double p = std::min(bound, 1.0);
        const double slack = 3.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
        report.deviation_freq[c - 1] = freq;
        report.bound[c - 1] = bound;
        report.slack[c - 1] = slack;
        report.within_bound[c - 1] = freq < bound + slack;
    }
    return report;
}

/// Observational probe of the limit-shape conjecture: normalized vertical
/// witness distances to the curve, per grid value.
inline EstimateReport limit_shape_probe(int k, const std::vector<long long>& n_grid, int trials,
                                        std::uint64_t base_seed, const TrialOptions& opts = {}) {
    if (n_grid.empty()) throw std::invalid_argument("limit_shape_probe: empty grid");
    EstimateReport report;
    report.k = k;
    report.model = Model::uniform;
    report.base_domain = "unit_square";

    for (std::size_t i = 0; i < n_grid.size(); ++i) {
        TrialOptions per = opts;
        per.stream_offset = opts.stream_offset + (static_cast<std::uint64_t>(i + 1) << 32);
        const auto data = detail::uniform_trials_ex(k, n_grid[i], trials, base_seed, per, true);
        report.n_grid.push_back(static_cast<double>(n_grid[i]));
        report.per_n.push_back(detail::summarize(static_cast<double>(n_grid[i]),
                                                 detail::strip(data)));

        LimitShapeSlice slice;
        slice.n = static_cast<double>(n_grid[i]);
        double sum = 0.0;
        long long count = 0;
        std::vector<double> trial_means;
        for (const auto& d : data) {
            sum += d.shape.sum;
            count += d.shape.count;
            slice.max_distance = std::max(slice.max_distance, d.shape.max);
            trial_means.push_back(d.shape.count > 0
                                      ? d.shape.sum / static_cast<double>(d.shape.count)
                                      : 0.0);
        }
        slice.mean_distance = count > 0 ? sum / static_cast<double>(count) : 0.0;
        if (!trial_means.empty()) {
            slice.q50_trial_mean = quantile(trial_means, 0.5);
            slice.q90_trial_mean = quantile(trial_means, 0.9);
        }
        report.limit_shape.push_back(slice);
    }
    return report;
}

}  // namespace kmc
