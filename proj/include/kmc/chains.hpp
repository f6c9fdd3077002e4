#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "kmc/errors.hpp"
#include "kmc/numerics.hpp"

namespace kmc {

/// A chain: points with strictly increasing abscissae.
struct Chain {
    std::vector<Point> points;

    [[nodiscard]] std::size_t size() const { return points.size(); }
    [[nodiscard]] bool empty() const { return points.empty(); }
};

/// The multiset chain (gamma_k(a)^k, p_1..p_m, gamma_k(b)^k). Interior points
/// must lie strictly inside (a, b).
struct BoundaryChain {
    int k = 1;
    double a = 0.0;
    double b = 1.0;
    Chain interior;
};

/// Flattened index range [first, last] of a failing window. The first k
/// flattened entries are the gamma_k(a) copies, then the interior, then the
/// gamma_k(b) copies.
struct WindowRef {
    int first = 0;
    int last = 0;
};

struct ValidationReport {
    bool valid = false;
    bool degenerate = false;  // some window had Delta_k = 0
    std::optional<WindowRef> first_failing_window;
};

inline void check_well_formed(const BoundaryChain& chain) {
    if (chain.k < 1) throw std::invalid_argument("BoundaryChain: k must be >= 1");
    if (!(std::isfinite(chain.a) && std::isfinite(chain.b) && chain.a < chain.b))
        throw std::invalid_argument("BoundaryChain: need finite a < b");
    double prev = chain.a;
    bool first = true;
    for (Point p : chain.interior.points) {
        if (!finite(p)) throw std::invalid_argument("BoundaryChain: non-finite point");
        if (!(p.x > chain.a && p.x < chain.b))
            throw std::invalid_argument("BoundaryChain: interior point not strictly inside (a, b)");
        if (!first && !(p.x > prev))
            throw std::invalid_argument("BoundaryChain: abscissae must strictly increase");
        prev = p.x;
        first = false;
    }
}

/// Flattened node list gamma_k(a)^k, p_1..p_m, gamma_k(b)^k (length m + 2k).
inline std::vector<FlatNode> flatten(const BoundaryChain& chain) {
    std::vector<FlatNode> flat;
    flat.reserve(chain.interior.size() + 2 * chain.k);
    const double ya = powi(chain.a, chain.k);
    const double yb = powi(chain.b, chain.k);
    for (int i = 0; i < chain.k; ++i) flat.push_back({chain.a, ya, true});
    for (Point p : chain.interior.points) flat.push_back({p.x, p.y, false});
    for (int i = 0; i < chain.k; ++i) flat.push_back({chain.b, yb, true});
    return flat;
}

/// Window validator: k-monotone iff every consecutive (k+1)-window of the
/// flattened sequence has nonnegative sign. Zero-sign windows validate but
/// are flagged degenerate.
inline ValidationReport validate_windows(const BoundaryChain& chain,
                                         PredicateMode mode = PredicateMode::hybrid) {
    check_well_formed(chain);
    const auto flat = flatten(chain);
    const int windows = static_cast<int>(flat.size()) - chain.k;
    ValidationReport report;
    report.valid = true;
    for (int i = 0; i < windows; ++i) {
        const int s = detail::window_sign(
            std::span<const FlatNode>(flat.data() + i, chain.k + 1), chain.k, mode);
        if (s == 0) report.degenerate = true;
        if (s < 0 && report.valid) {
            report.valid = false;
            report.first_failing_window = WindowRef{i, i + chain.k};
        }
    }
    return report;
}

/// Exhaustive validator: every (k+1)-element sub-multiset of the flattened
/// sequence must have nonnegative sign. Intended as the oracle for
/// validate_windows; refuses flattened lengths above 40. A failing run
/// reports validity only (no window range maps to an arbitrary tuple).
inline ValidationReport validate_exhaustive(const BoundaryChain& chain,
                                            PredicateMode mode = PredicateMode::hybrid) {
    check_well_formed(chain);
    const int m = static_cast<int>(chain.interior.size());
    const int k = chain.k;
    if (m + 2 * k > 40)
        throw GuardrailError("validate_exhaustive: flattened length exceeds 40");

    const double ya = powi(chain.a, k);
    const double yb = powi(chain.b, k);
    ValidationReport report;
    report.valid = true;

    std::vector<FlatNode> tuple(k + 1);
    std::vector<int> pick;
    for (int ja = 0; ja <= k; ++ja) {
        for (int jb = 0; jb <= k; ++jb) {
            const int s = k + 1 - ja - jb;
            if (s < 0 || s > m) continue;
            // iterate size-s subsets of the interior in lexicographic order
            pick.resize(s);
            for (int i = 0; i < s; ++i) pick[i] = i;
            while (true) {
                int idx = 0;
                for (int i = 0; i < ja; ++i) tuple[idx++] = {chain.a, ya, true};
                for (int i = 0; i < s; ++i) {
                    const Point p = chain.interior.points[pick[i]];
                    tuple[idx++] = {p.x, p.y, false};
                }
                for (int i = 0; i < jb; ++i) tuple[idx++] = {chain.b, yb, true};
                const int sg = detail::window_sign(
                    std::span<const FlatNode>(tuple.data(), k + 1), k, mode);
                if (sg == 0) report.degenerate = true;
                if (sg < 0) report.valid = false;

                if (s == 0) break;
                int pos = s - 1;
                while (pos >= 0 && pick[pos] == m - s + pos) --pos;
                if (pos < 0) break;
                ++pick[pos];
                for (int i = pos + 1; i < s; ++i) pick[i] = pick[i - 1] + 1;
            }
        }
    }
    return report;
}

/// Probe of the nesting property: the same interior reinterpreted at order j
/// with endpoints gamma_j(a), gamma_j(b).
inline bool nesting_check(const BoundaryChain& chain, int j,
                          PredicateMode mode = PredicateMode::hybrid) {
    if (j < 1 || j > chain.k) throw std::invalid_argument("nesting_check: j out of range");
    BoundaryChain lowered{j, chain.a, chain.b, chain.interior};
    return validate_windows(lowered, mode).valid;
}

}  // namespace kmc
