#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <cstdint>
#include <limits>
#include <unordered_map>
#include <vector>

#include "kmc/cells.hpp"
#include "kmc/chains.hpp"
#include "kmc/errors.hpp"
#include "kmc/sampling.hpp"

namespace kmc {

enum class SolveMethod { dp, brute, lis, greedy };

inline const char* method_name(SolveMethod m) {
    switch (m) {
        case SolveMethod::dp: return "dp";
        case SolveMethod::brute: return "brute";
        case SolveMethod::lis: return "lis";
        case SolveMethod::greedy: return "greedy";
    }
    return "?";
}

struct SolveResult {
    long long length = 0;
    Chain witness;
    SolveMethod method = SolveMethod::dp;
    long long states_explored = 0;
    bool degenerate_seen = false;
};

inline constexpr long long kDefaultStateBudget = 50'000'000;

namespace detail {

inline constexpr int kMaxSolverOrder = 7;
inline constexpr int kMaxDpPoints = 20000;
inline constexpr std::uint64_t kMaxDenseStates = std::uint64_t(1) << 24;

/// True iff (gamma_k(a)^k, p, gamma_k(b)^k) validates; the predicate-route
/// membership test the solvers use to discard points outside C_k(a,b).
inline bool single_point_admissible(int k, double a, double b, Point p,
                                    PredicateMode mode = PredicateMode::hybrid) {
    if (!(p.x > a && p.x < b)) return false;
    std::array<FlatNode, 2 * kMaxSolverOrder + 1> flat;
    const double ya = powi(a, k);
    const double yb = powi(b, k);
    for (int i = 0; i < k; ++i) flat[i] = {a, ya, true};
    flat[k] = {p.x, p.y, false};
    for (int i = 0; i < k; ++i) flat[k + 1 + i] = {b, yb, true};
    for (int i = 0; i <= k; ++i) {
        if (window_sign(std::span<const FlatNode>(flat.data() + i, k + 1), k, mode) < 0)
            return false;
    }
    return true;
}

/// Exact longest-chain DP. The state is the tuple of the last min(k, length)
/// chain points (pads standing for gamma_k(a) on the left); g(state) is the
/// best number of further points before closing at gamma_k(b). Every window
/// evaluated counts against the transition budget.
class DpEngine {
  public:
    using State = std::array<std::int32_t, kMaxSolverOrder>;

    DpEngine(std::vector<Point> pts, int k, double a, double b, long long budget)
        : pts_(std::move(pts)),
          k_(k),
          a_(a),
          b_(b),
          budget_(budget),
          n_(static_cast<int>(pts_.size())),
          ya_(powi(a, k)),
          yb_(powi(b, k)) {
        std::uint64_t states = 1;
        dense_ = true;
        for (int i = 0; i < k_; ++i) {
            states *= static_cast<std::uint64_t>(n_) + 1;
            if (states > kMaxDenseStates) {
                dense_ = false;
                break;
            }
        }
        if (dense_) dense_memo_.assign(states, kUnvisited);
    }

    SolveResult run() {
        State root = empty_state();
        const int best = g(root, 0);
        assert(best >= 0);  // the boundary-only chain always closes
        const long long solve_transitions = transitions_;
        budget_ = std::numeric_limits<long long>::max();  // reconstruction replays known edges

        SolveResult result;
        result.length = best;
        result.method = SolveMethod::dp;
        result.degenerate_seen = degenerate_;
        result.witness.points.reserve(best);

        // Walk the optimal edges preferring the smallest next index; this
        // yields the lexicographically smallest optimal index sequence.
        State state = root;
        int remaining = best;
        while (remaining > 0) {
            const int last = last_index(state);
            bool stepped = false;
            for (int j = (last < 0 ? 0 : last + 1); j < n_ && !stepped; ++j) {
                if (last >= 0 && !(pts_[j].x > pts_[last].x)) continue;
                if (transition_sign(state, j) < 0) continue;
                State next = advance(state, j);
                if (lookup(next) == remaining - 1) {
                    result.witness.points.push_back(pts_[j]);
                    state = next;
                    --remaining;
                    stepped = true;
                }
            }
            assert(stepped);
            if (!stepped) break;
        }
        result.states_explored = solve_transitions;
        return result;
    }

  private:
    static constexpr std::int32_t kUnvisited = INT32_MIN;
    static constexpr std::int32_t kImpossible = -1;

    [[nodiscard]] State empty_state() const {
        State s{};
        s.fill(n_);
        return s;
    }

    [[nodiscard]] int last_index(const State& s) const {
        return s[k_ - 1] == n_ ? -1 : s[k_ - 1];
    }

    [[nodiscard]] State advance(State s, int j) const {
        // shift the suffix window left by one; a pad falling off the front is
        // exactly one gamma_k(a) copy leaving the window
        for (int m = 0; m + 1 < k_; ++m) s[m] = s[m + 1];
        s[k_ - 1] = j;
        return s;
    }

    [[nodiscard]] std::uint64_t encode(const State& s) const {
        std::uint64_t key = 0;
        for (int m = 0; m < k_; ++m)
            key = key * (static_cast<std::uint64_t>(n_) + 1) + static_cast<std::uint64_t>(s[m]);
        return key;
    }

    std::int32_t& memo_slot(const State& s) {
        if (dense_) return dense_memo_[encode(s)];
        return map_memo_.try_emplace(s, kUnvisited).first->second;
    }

    std::int32_t lookup(const State& s) {
        return memo_slot(s);
    }

    void charge_budget() {
        ++transitions_;
        if (transitions_ > budget_) throw BudgetExceededError(best_complete_, transitions_);
    }

    /// Sign of the (k+1)-window (state padded with gamma_k(a), then point j).
    int transition_sign(const State& s, int j) {
        std::array<FlatNode, kMaxWindow> w;
        int idx = 0;
        for (int m = 0; m < k_; ++m) {
            if (s[m] == n_) {
                w[idx++] = {a_, ya_, true};
            } else {
                w[idx++] = {pts_[s[m]].x, pts_[s[m]].y, false};
            }
        }
        w[idx++] = {pts_[j].x, pts_[j].y, false};
        charge_budget();
        const int sg = window_sign(std::span<const FlatNode>(w.data(), k_ + 1), k_);
        if (sg == 0) degenerate_ = true;
        return sg;
    }

    /// All windows mixing the state's tail with gamma_k(b) copies.
    bool terminal_ok(const State& s) {
        for (int jj = 1; jj <= k_; ++jj) {
            std::array<FlatNode, kMaxWindow> w;
            int idx = 0;
            for (int m = jj - 1; m < k_; ++m) {
                if (s[m] == n_) {
                    w[idx++] = {a_, ya_, true};
                } else {
                    w[idx++] = {pts_[s[m]].x, pts_[s[m]].y, false};
                }
            }
            for (int i = 0; i < jj; ++i) w[idx++] = {b_, yb_, true};
            charge_budget();
            const int sg = window_sign(std::span<const FlatNode>(w.data(), k_ + 1), k_);
            if (sg == 0) degenerate_ = true;
            if (sg < 0) return false;
        }
        return true;
    }

    int g(const State& s, int depth) {
        {
            const std::int32_t cached = lookup(s);
            if (cached != kUnvisited) {
                if (cached >= 0 && depth + cached > best_complete_)
                    best_complete_ = depth + cached;
                return cached;
            }
        }
        int best = kImpossible;
        if (terminal_ok(s)) {
            best = 0;
            if (depth > best_complete_) best_complete_ = depth;
        }
        const int last = last_index(s);
        for (int j = (last < 0 ? 0 : last + 1); j < n_; ++j) {
            if (last >= 0 && !(pts_[j].x > pts_[last].x)) continue;
            if (transition_sign(s, j) < 0) continue;
            const int sub = g(advance(s, j), depth + 1);
            if (sub >= 0 && sub + 1 > best) best = sub + 1;
        }
        memo_slot(s) = best;
        if (best >= 0 && depth + best > best_complete_) best_complete_ = depth + best;
        return best;
    }

    struct StateHash {
        std::size_t operator()(const State& s) const {
            std::uint64_t h = 1469598103934665603ULL;
            for (std::int32_t v : s) {
                h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(v));
                h *= 1099511628211ULL;
            }
            return static_cast<std::size_t>(h);
        }
    };

    std::vector<Point> pts_;
    int k_;
    double a_, b_;
    long long budget_;
    int n_;
    double ya_, yb_;
    bool dense_ = false;
    std::vector<std::int32_t> dense_memo_;
    std::unordered_map<State, std::int32_t, StateHash> map_memo_;
    long long transitions_ = 0;
    long long best_complete_ = 0;
    bool degenerate_ = false;
};

inline void check_solver_inputs(const std::vector<Point>& points, int k, double a, double b) {
    if (k < 1) throw std::invalid_argument("solver: k must be >= 1");
    if (!(std::isfinite(a) && std::isfinite(b) && a < b))
        throw std::invalid_argument("solver: need finite a < b");
    for (Point p : points)
        if (!finite(p)) throw std::invalid_argument("solver: non-finite point");
}

inline void sort_points(std::vector<Point>& points) {
    std::sort(points.begin(), points.end(), [](Point l, Point r) {
        if (l.x != r.x) return l.x < r.x;
        return l.y < r.y;
    });
}

}  // namespace detail

/// Exact maximum chain length over all valid boundary chains, by dynamic
/// programming over k-tuple suffixes. Points outside C_k(a,b) are filtered
/// out first. Throws BudgetExceededError when the transition budget runs out,
/// carrying the best complete length seen so far.
inline SolveResult solve_dp(std::vector<Point> points, int k, double a, double b,
                            long long state_budget = kDefaultStateBudget) {
    detail::check_solver_inputs(points, k, a, b);
    if (k > detail::kMaxSolverOrder)
        throw GuardrailError("solve_dp: order above supported maximum");
    if (state_budget <= 0) throw std::invalid_argument("solve_dp: budget must be positive");

    std::vector<Point> kept;
    kept.reserve(points.size());
    for (Point p : points)
        if (detail::single_point_admissible(k, a, b, p)) kept.push_back(p);
    if (static_cast<int>(kept.size()) > detail::kMaxDpPoints)
        throw GuardrailError("solve_dp: too many in-cell points");
    detail::sort_points(kept);

    detail::DpEngine engine(std::move(kept), k, a, b, state_budget);
    return engine.run();
}

/// Literal enumeration over all subsets (n <= 14): the oracle for solve_dp.
inline SolveResult solve_brute(std::vector<Point> points, int k, double a, double b) {
    detail::check_solver_inputs(points, k, a, b);
    std::vector<Point> kept;
    for (Point p : points)
        if (a < p.x && p.x < b) kept.push_back(p);
    if (kept.size() > 14) throw GuardrailError("solve_brute: more than 14 candidate points");
    detail::sort_points(kept);

    const int n = static_cast<int>(kept.size());
    SolveResult best;
    best.method = SolveMethod::brute;
    std::vector<int> best_indices;

    std::vector<int> indices;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        indices.clear();
        Chain chain;
        bool ok = true;
        for (int i = 0; i < n && ok; ++i) {
            if (!(mask >> i & 1u)) continue;
            if (!chain.points.empty() && !(kept[i].x > chain.points.back().x)) ok = false;
            chain.points.push_back(kept[i]);
            indices.push_back(i);
        }
        if (!ok) continue;
        ++best.states_explored;
        const auto report = validate_windows(BoundaryChain{k, a, b, chain});
        if (report.degenerate) best.degenerate_seen = true;
        if (!report.valid) continue;
        const auto len = static_cast<long long>(chain.size());
        if (len > best.length ||
            (len == best.length && len > 0 && indices < best_indices)) {
            best.length = len;
            best.witness = std::move(chain);
            best_indices = indices;
        }
    }
    return best;
}

/// k = 1 fast path: patience sorting for the longest nondecreasing chain in
/// [a,b]^2, O(n log n).
inline SolveResult solve_lis(std::vector<Point> points, double a, double b) {
    detail::check_solver_inputs(points, 1, a, b);
    std::vector<Point> kept;
    kept.reserve(points.size());
    for (Point p : points)
        if (a < p.x && p.x < b && a <= p.y && p.y <= b) kept.push_back(p);
    // ties in x sorted by descending y so no two equal-x points can chain
    std::sort(kept.begin(), kept.end(), [](Point l, Point r) {
        if (l.x != r.x) return l.x < r.x;
        return l.y > r.y;
    });
    kept.erase(std::unique(kept.begin(), kept.end(),
                           [](Point l, Point r) { return l.x == r.x && l.y == r.y; }),
               kept.end());

    const int n = static_cast<int>(kept.size());
    std::vector<double> tails;       // smallest tail ordinate per length
    std::vector<int> tail_index;     // point index of each pile top
    std::vector<int> parent(n, -1);
    for (int i = 0; i < n; ++i) {
        const double y = kept[i].y;
        const auto it = std::upper_bound(tails.begin(), tails.end(), y);
        const auto pos = static_cast<std::size_t>(it - tails.begin());
        parent[i] = pos > 0 ? tail_index[pos - 1] : -1;
        if (it == tails.end()) {
            tails.push_back(y);
            tail_index.push_back(i);
        } else {
            *it = y;
            tail_index[pos] = i;
        }
    }

    SolveResult result;
    result.method = SolveMethod::lis;
    result.states_explored = n;
    result.length = static_cast<long long>(tails.size());
    if (!tails.empty()) {
        std::vector<Point> chain;
        for (int i = tail_index.back(); i >= 0; i = parent[i]) chain.push_back(kept[i]);
        std::reverse(chain.begin(), chain.end());
        result.witness.points = std::move(chain);
    }
    if (!result.witness.empty()) {
        const auto report = validate_windows(BoundaryChain{1, a, b, result.witness});
        result.degenerate_seen = report.degenerate;
        assert(report.valid);
    }
    return result;
}

/// The constructive lower bound: cut [a,b] at a + 3i, take the smallest-x
/// sample point in every occupied subcell. The resulting chain is always a
/// valid boundary chain over (a,b).
inline SolveResult solve_greedy_cells(const PoissonSample& sample) {
    const Cell& cell = sample.cell;
    if (!(cell.b - cell.a >= 3.0))
        throw std::invalid_argument("solve_greedy_cells: need b - a >= 3");
    const int subcells = static_cast<int>(std::floor((cell.b - cell.a) / 3.0 + 1e-12));

    SolveResult result;
    result.method = SolveMethod::greedy;
    std::vector<int> pick(subcells, -1);
    for (int i = 0; i < static_cast<int>(sample.points.size()); ++i) {
        const Point p = sample.points[i];
        const int c = static_cast<int>(std::floor((p.x - cell.a) / 3.0));
        if (c < 0 || c >= subcells) continue;
        ++result.states_explored;
        const Cell sub(cell.k, cell.a + 3.0 * c, cell.a + 3.0 * (c + 1));
        if (!(p.x > sub.a && p.x < sub.b) || !contains(sub, p)) continue;
        if (pick[c] < 0 || p.x < sample.points[pick[c]].x ||
            (p.x == sample.points[pick[c]].x && p.y < sample.points[pick[c]].y))
            pick[c] = i;
    }
    for (int c = 0; c < subcells; ++c)
        if (pick[c] >= 0) result.witness.points.push_back(sample.points[pick[c]]);
    result.length = static_cast<long long>(result.witness.size());
    assert(validate_windows(BoundaryChain{cell.k, cell.a, cell.b, result.witness}).valid);
    return result;
}

/// Concatenation of valid chains over (a,b) and (b,c) into one over (a,c).
inline BoundaryChain concatenate(const BoundaryChain& left, const BoundaryChain& right) {
    if (left.k != right.k) throw std::invalid_argument("concatenate: mismatched k");
    if (left.b != right.a) throw std::invalid_argument("concatenate: endpoints do not meet");
    if (!validate_windows(left).valid || !validate_windows(right).valid)
        throw std::invalid_argument("concatenate: invalid input chain");
    BoundaryChain joined{left.k, left.a, right.b, left.interior};
    joined.interior.points.insert(joined.interior.points.end(), right.interior.points.begin(),
                                  right.interior.points.end());
    assert(validate_windows(joined).valid);
    return joined;
}

}  // namespace kmc
