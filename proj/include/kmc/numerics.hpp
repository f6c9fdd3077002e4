#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include "kmc/rational.hpp"

namespace kmc {

/// Planar point. Both coordinates must be finite; being binary floats they
/// lift exactly to rationals, which is what makes the exact predicates exact.
struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline bool finite(Point p) { return std::isfinite(p.x) && std::isfinite(p.y); }

/// base^e for small integer e >= 0, by repeated multiplication (0^0 = 1).
inline double powi(double base, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= base;
    return r;
}

inline double binomial(int n, int j) {
    if (j < 0 || j > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= j; ++i) r = r * double(n - j + i) / double(i);
    return r;
}

/// The curve x -> (x, x^k).
inline Point gamma_point(int degree, double x) { return {x, powi(x, degree)}; }

/// One node of a multiset chain: either a simple point (multiplicity 1) or a
/// point on the graph of x^generator_degree repeated `multiplicity` times.
struct Node {
    double x = 0.0;
    double y = 0.0;
    int multiplicity = 1;
    int generator_degree = -1;  // >= 0 only for nodes pinned to x^degree

    static Node point(double px, double py) { return Node{px, py, 1, -1}; }

    /// gamma_degree(x) with the given multiplicity. The ordinate is derived
    /// from x, never stored independently, so it cannot drift off the curve.
    static Node gamma(int degree, double px, int mult) {
        return Node{px, powi(px, degree), mult, degree};
    }

    [[nodiscard]] bool on_curve() const { return generator_degree >= 0; }
};

/// Flattened node as consumed by the divided-difference kernels. `on_curve`
/// marks entries whose exact ordinate is x^degree (recomputed when lifting to
/// rationals, since the stored double may round).
struct FlatNode {
    double x;
    double y;
    bool on_curve;
};

inline constexpr int kMaxWindow = 16;  // max flattened window length for sign predicates

/// Relative magnitude below which the float fast path refuses to decide a
/// sign and the exact rational path takes over.
inline constexpr double kFastPathRelTol = 1e-9;

enum class PredicateMode {
    hybrid,  ///< float table first, exact rational fallback near zero
    exact,   ///< rational arithmetic only
};

namespace detail {

template <class T>
T confluent_value(int degree, int order, const T& x) {
    // Divided difference of order `order` of x^degree at a single repeated
    // abscissa: f^(order)(x)/order! = C(degree, order) x^(degree-order).
    if constexpr (std::is_same_v<T, double>) {
        return binomial(degree, order) * powi(x, degree - order);
    } else {
        if (order > degree) return T(0);
        return T(binomial_big(degree, order)) * rational_pow(x, degree - order);
    }
}

/// In-place Newton sweep over a flattened window.
/// On entry d[i] holds the ordinates; after level j, d[i] = Delta_j over the
/// flattened sub-window (i-j .. i). On return d[i] is the i-th Newton
/// coefficient Delta_i(p_0..p_i) and d.back() the full-window difference.
/// Runs of equal abscissae take the confluent base value for x^curve_degree.
/// When T is double, |d[i]| over the whole sweep is accumulated in *max_abs.
template <class T>
void newton_sweep(std::span<const T> xs, std::span<T> d, int curve_degree,
                  double* max_abs = nullptr) {
    const int len = static_cast<int>(xs.size());
    if constexpr (std::is_same_v<T, double>) {
        if (max_abs) {
            for (int i = 0; i < len; ++i) *max_abs = std::max(*max_abs, std::fabs(d[i]));
        }
    }
    for (int j = 1; j < len; ++j) {
        for (int i = len - 1; i >= j; --i) {
            if (xs[i] == xs[i - j]) {
                if (curve_degree < 0)
                    throw std::invalid_argument(
                        "divided differences: repeated abscissa without a generator function");
                d[i] = confluent_value<T>(curve_degree, j, xs[i]);
            } else {
                d[i] = (d[i] - d[i - 1]) / (xs[i] - xs[i - j]);
            }
            if constexpr (std::is_same_v<T, double>) {
                if (max_abs) *max_abs = std::max(*max_abs, std::fabs(d[i]));
            }
        }
    }
}

/// Full-window divided difference of a flattened window, float arithmetic.
inline double window_delta_float(std::span<const FlatNode> w, int curve_degree,
                                 double* max_abs = nullptr) {
    const int len = static_cast<int>(w.size());
    if (len > kMaxWindow) throw std::invalid_argument("window too long");
    std::array<double, kMaxWindow> xs, d;
    for (int i = 0; i < len; ++i) {
        xs[i] = w[i].x;
        d[i] = w[i].y;
    }
    newton_sweep<double>(std::span<const double>(xs.data(), len),
                         std::span<double>(d.data(), len), curve_degree, max_abs);
    return d[len - 1];
}

/// Full-window divided difference over rational coordinates (for inputs that
/// are themselves exact values rather than lifted doubles).
inline Rational window_delta_rational(std::span<const Rational> xs,
                                      std::span<const Rational> ys, int curve_degree) {
    if (xs.size() != ys.size() || xs.empty())
        throw std::invalid_argument("window_delta_rational: size mismatch");
    std::vector<Rational> d(ys.begin(), ys.end());
    newton_sweep<Rational>(xs, d, curve_degree);
    return d.back();
}

inline int window_sign_exact(std::span<const FlatNode> w, int curve_degree) {
    const int len = static_cast<int>(w.size());
    std::vector<Rational> xs(len), d(len);
    for (int i = 0; i < len; ++i) {
        xs[i] = to_rational(w[i].x);
        d[i] = w[i].on_curve ? rational_pow(xs[i], curve_degree) : to_rational(w[i].y);
    }
    newton_sweep<Rational>(std::span<const Rational>(xs.data(), len),
                           std::span<Rational>(d.data(), len), curve_degree);
    return sign_of(d[len - 1]);
}

/// Exact sign of the full-window divided difference, with the float fast
/// path taken first in hybrid mode.
inline int window_sign(std::span<const FlatNode> w, int curve_degree,
                       PredicateMode mode = PredicateMode::hybrid) {
    if (mode == PredicateMode::hybrid) {
        double max_abs = 0.0;
        const double delta = window_delta_float(w, curve_degree, &max_abs);
        if (std::fabs(delta) > kFastPathRelTol * max_abs)
            return delta > 0.0 ? 1 : -1;
    }
    return window_sign_exact(w, curve_degree);
}

}  // namespace detail

/// An ordered multiset chain: simple points and confluent nodes with strictly
/// increasing abscissae. All confluent nodes must share one generator degree.
class NodeSequence {
  public:
    NodeSequence() = default;

    explicit NodeSequence(std::vector<Node> nodes) : nodes_(std::move(nodes)) {
        int degree = -1;
        double prev_x = -std::numeric_limits<double>::infinity();
        flat_len_ = 0;
        for (const Node& n : nodes_) {
            if (!std::isfinite(n.x) || !std::isfinite(n.y))
                throw std::invalid_argument("NodeSequence: non-finite coordinate");
            if (n.multiplicity < 1)
                throw std::invalid_argument("NodeSequence: multiplicity must be >= 1");
            if (n.multiplicity > 1) {
                if (!n.on_curve())
                    throw std::invalid_argument(
                        "NodeSequence: multiplicity node without generator function");
                if (degree >= 0 && n.generator_degree != degree)
                    throw std::invalid_argument(
                        "NodeSequence: mixed generator degrees");
                degree = n.generator_degree;
                if (n.multiplicity > n.generator_degree + 1)
                    throw std::invalid_argument(
                        "NodeSequence: multiplicity exceeds generator degree + 1");
            }
            if (n.on_curve() && n.y != powi(n.x, n.generator_degree))
                throw std::invalid_argument("NodeSequence: curve node off its curve");
            if (!(n.x > prev_x))
                throw std::invalid_argument("NodeSequence: abscissae must strictly increase");
            prev_x = n.x;
            flat_len_ += n.multiplicity;
        }
        curve_degree_ = degree;
    }

    static NodeSequence of_points(std::span<const Point> pts) {
        std::vector<Node> nodes;
        nodes.reserve(pts.size());
        for (Point p : pts) nodes.push_back(Node::point(p.x, p.y));
        return NodeSequence(std::move(nodes));
    }

    [[nodiscard]] const std::vector<Node>& nodes() const { return nodes_; }
    [[nodiscard]] int flattened_length() const { return flat_len_; }

    /// Generator degree shared by the confluent nodes, or -1 if none.
    [[nodiscard]] int curve_degree() const { return curve_degree_; }

    [[nodiscard]] std::vector<FlatNode> flattened() const {
        std::vector<FlatNode> flat;
        flat.reserve(flat_len_);
        for (const Node& n : nodes_)
            for (int i = 0; i < n.multiplicity; ++i) flat.push_back({n.x, n.y, n.on_curve()});
        return flat;
    }

  private:
    std::vector<Node> nodes_;
    int flat_len_ = 0;
    int curve_degree_ = -1;
};

/// Triangular divided-difference table; entry(i, j) = Delta_j over the
/// flattened sub-window starting at flattened index i. T is double or
/// Rational per the caller's request.
template <class T>
class DiffTable {
  public:
    explicit DiffTable(const NodeSequence& seq) : len_(seq.flattened_length()) {
        if (len_ == 0) throw std::invalid_argument("DiffTable: empty sequence");
        const auto flat = seq.flattened();
        const int degree = seq.curve_degree();
        xs_.resize(len_);
        for (int i = 0; i < len_; ++i) {
            if constexpr (std::is_same_v<T, double>) {
                xs_[i] = flat[i].x;
            } else {
                xs_[i] = to_rational(flat[i].x);
            }
        }
        cols_.resize(len_);
        cols_[0].resize(len_);
        for (int i = 0; i < len_; ++i) {
            if constexpr (std::is_same_v<T, double>) {
                cols_[0][i] = flat[i].y;
            } else {
                cols_[0][i] = flat[i].on_curve ? rational_pow(xs_[i], degree)
                                               : to_rational(flat[i].y);
            }
        }
        for (int j = 1; j < len_; ++j) {
            cols_[j].resize(len_ - j);
            for (int i = 0; i + j < len_; ++i) {
                if (xs_[i + j] == xs_[i]) {
                    if (degree < 0)
                        throw std::invalid_argument(
                            "DiffTable: repeated abscissa without a generator function");
                    cols_[j][i] = detail::confluent_value<T>(degree, j, xs_[i]);
                } else {
                    cols_[j][i] = (cols_[j - 1][i + 1] - cols_[j - 1][i]) / (xs_[i + j] - xs_[i]);
                }
            }
        }
    }

    [[nodiscard]] int length() const { return len_; }

    [[nodiscard]] const T& entry(int i, int j) const {
        if (j < 0 || j >= len_ || i < 0 || i + j >= len_)
            throw std::invalid_argument("DiffTable: index out of range");
        return cols_[j][i];
    }

    /// Newton coefficients Delta_j(p_0..p_j), j = 0..len-1.
    [[nodiscard]] std::vector<T> newton_coefficients() const {
        std::vector<T> c(len_);
        for (int j = 0; j < len_; ++j) c[j] = cols_[j][0];
        return c;
    }

    [[nodiscard]] const std::vector<T>& abscissae() const { return xs_; }

  private:
    int len_;
    std::vector<T> xs_;
    std::vector<std::vector<T>> cols_;  // cols_[j][i] = Delta_j starting at i
};

/// Delta_j of the whole sequence (float arithmetic). The flattened length
/// must be exactly j + 1.
inline double divided_difference(const NodeSequence& seq, int order) {
    if (order < 0 || seq.flattened_length() != order + 1)
        throw std::invalid_argument("divided_difference: flattened length must equal order + 1");
    const auto flat = seq.flattened();
    return detail::window_delta_float(flat, seq.curve_degree());
}

/// Delta_j of the whole sequence in exact rational arithmetic.
inline Rational divided_difference_exact(const NodeSequence& seq, int order) {
    if (order < 0 || seq.flattened_length() != order + 1)
        throw std::invalid_argument("divided_difference: flattened length must equal order + 1");
    DiffTable<Rational> table(seq);
    return table.entry(0, order);
}

/// Sign of Delta_k of a (k+1)-tuple in {-1, 0, +1}; 0 iff the tuple fails
/// k-general position. Hybrid mode answers from the float table when the
/// result is comfortably away from zero and falls back to rationals
/// otherwise, so the returned sign is always the exact one.
inline int sign_of_tuple(const NodeSequence& seq, int k,
                         PredicateMode mode = PredicateMode::hybrid) {
    if (k < 0 || seq.flattened_length() != k + 1)
        throw std::invalid_argument("sign_of_tuple: flattened length must equal k + 1");
    if (seq.curve_degree() >= 0 && seq.curve_degree() != k)
        throw std::invalid_argument("sign_of_tuple: generator degree differs from k");
    const auto flat = seq.flattened();
    return detail::window_sign(flat, k, mode);
}

/// Evaluate the (Hermite-extended) Newton form at x. Repeated abscissae enter
/// the basis products with their multiplicity.
inline double newton_eval(const NodeSequence& seq, double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("newton_eval: non-finite x");
    if (seq.flattened_length() < 1) throw std::invalid_argument("newton_eval: empty sequence");
    DiffTable<double> table(seq);
    const auto& xs = table.abscissae();
    const auto c = table.newton_coefficients();
    const int len = table.length();
    double p = c[len - 1];
    for (int i = len - 2; i >= 0; --i) p = p * (x - xs[i]) + c[i];
    return p;
}

/// Rational-mode Newton evaluation; exact for exactly representable inputs.
inline Rational newton_eval_exact(const NodeSequence& seq, const Rational& x) {
    if (seq.flattened_length() < 1) throw std::invalid_argument("newton_eval: empty sequence");
    DiffTable<Rational> table(seq);
    const auto& xs = table.abscissae();
    const auto c = table.newton_coefficients();
    const int len = table.length();
    Rational p = c[len - 1];
    for (int i = len - 2; i >= 0; --i) p = p * (x - xs[i]) + c[i];
    return p;
}

/// True iff the k+1 points do not lie on a polynomial graph of degree at most
/// k-1, i.e. Delta_k != 0. Duplicate abscissae are rejected.
inline bool is_general_position(std::span<const Point> pts, int k) {
    if (static_cast<int>(pts.size()) != k + 1)
        throw std::invalid_argument("is_general_position: need exactly k + 1 points");
    std::vector<Point> sorted(pts.begin(), pts.end());
    std::sort(sorted.begin(), sorted.end(), [](Point a, Point b) { return a.x < b.x; });
    for (std::size_t i = 1; i < sorted.size(); ++i)
        if (sorted[i].x == sorted[i - 1].x)
            throw std::invalid_argument("is_general_position: duplicate abscissae");
    return sign_of_tuple(NodeSequence::of_points(sorted), k) != 0;
}

}  // namespace kmc
