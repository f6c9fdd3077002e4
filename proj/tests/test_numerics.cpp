#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <vector>

#include "kmc/numerics.hpp"
#include "test_support.hpp"

using namespace kmc;
using kmc::testing::complete_homogeneous;

TEST_CASE("divided differences match the worked examples", "[numerics]") {
    // slope of the identity
    NodeSequence id({Node::point(0, 0), Node::point(1, 1)});
    CHECK(divided_difference(id, 1) == 1.0);

    // confluent node gamma_3(2)^4: f'''(2)/3! = 1 for f = x^3
    NodeSequence confluent({Node::gamma(3, 2.0, 4)});
    CHECK(divided_difference(confluent, 3) == 1.0);

    // mixed confluent table: columns (0,0,1), (0,1), (1)
    NodeSequence mixed({Node::gamma(2, 0.0, 2), Node::point(1, 1)});
    CHECK(divided_difference(mixed, 2) == 1.0);
    DiffTable<double> table(mixed);
    CHECK(table.entry(0, 0) == 0.0);
    CHECK(table.entry(1, 0) == 0.0);
    CHECK(table.entry(2, 0) == 1.0);
    CHECK(table.entry(0, 1) == 0.0);  // f'(0)/1!
    CHECK(table.entry(1, 1) == 1.0);
    CHECK(table.entry(0, 2) == 1.0);

    // hand computation ((0-0.5)/0.5 - 1)/1
    NodeSequence tent({Node::point(0, 0), Node::point(0.5, 0.5), Node::point(1, 0)});
    CHECK(divided_difference(tent, 2) == -2.0);
}

TEST_CASE("divided difference error paths", "[numerics]") {
    NodeSequence two({Node::point(0, 0), Node::point(1, 1)});
    CHECK_THROWS_AS(divided_difference(two, 2), std::invalid_argument);
    CHECK_THROWS_AS(NodeSequence({Node{0.0, 0.0, 3, -1}}), std::invalid_argument);
    CHECK_THROWS_AS(NodeSequence({Node::point(0, std::nan(""))}), std::invalid_argument);
    CHECK_THROWS_AS(NodeSequence({Node::point(0, 0), Node::point(0, 1)}),
                    std::invalid_argument);
    // multiplicity above degree + 1 is meaningless for x^k
    CHECK_THROWS_AS(NodeSequence({Node::gamma(2, 1.0, 4)}), std::invalid_argument);
}

TEST_CASE("sign_of_tuple worked examples", "[numerics]") {
    std::vector<Point> dec{{0, 0}, {1, -1}};
    CHECK(sign_of_tuple(NodeSequence::of_points(dec), 1) == -1);

    std::vector<Point> conv{{0, 0}, {0.5, 0.1}, {1, 1}};
    CHECK(sign_of_tuple(NodeSequence::of_points(conv), 2) == 1);

    // k+1 distinct points on the curve x^k have Delta_k = 1
    RandomStream rng(RngSpec{101, 0});
    for (int k = 1; k <= 6; ++k) {
        std::vector<Point> pts;
        double x = 0.1;
        for (int i = 0; i <= k; ++i) {
            x += 0.2 + rng.uniform01();
            pts.push_back(gamma_point(k, x));
        }
        CHECK(sign_of_tuple(NodeSequence::of_points(pts), k) == 1);
        CHECK(sign_of_tuple(NodeSequence::of_points(pts), k, PredicateMode::exact) == 1);
    }
}

TEST_CASE("is_general_position", "[numerics]") {
    std::vector<Point> collinear{{0, 0}, {1, 1}, {2, 2}};
    CHECK_FALSE(is_general_position(collinear, 2));
    std::vector<Point> flat{{0, 0}, {1, 0}};
    CHECK_FALSE(is_general_position(flat, 1));
    std::vector<Point> parabola{{0, 0}, {1, 1}, {2, 4}};
    CHECK(is_general_position(parabola, 2));
    std::vector<Point> dup{{0, 0}, {0, 1}, {2, 4}};
    CHECK_THROWS_AS(is_general_position(dup, 2), std::invalid_argument);
}

TEST_CASE("newton_eval worked examples", "[numerics]") {
    NodeSequence id({Node::point(0, 0), Node::point(1, 1)});
    CHECK(newton_eval(id, 0.5) == 0.5);

    // interpolation uniqueness: 4 points on x^3 reproduce x^3 exactly in
    // rational mode
    std::vector<Node> cubic;
    for (double x : {0.25, 0.5, 1.25, 2.0}) cubic.push_back(Node::point(x, x * x * x));
    NodeSequence seq(std::move(cubic));
    for (double x : {-1.0, 0.1, 3.75}) {
        const Rational rx = to_rational(x);
        CHECK(newton_eval_exact(seq, rx) == rational_pow(rx, 3));
    }

    NodeSequence hermite({Node::gamma(2, 0.0, 2), Node::point(1, 1)});
    CHECK(newton_eval(hermite, 2.0) == 4.0);
    CHECK_THROWS_AS(newton_eval(hermite, std::nan("")), std::invalid_argument);
}

TEST_CASE("newton form reproduces nodes and derivative constraints", "[numerics]") {
    RandomStream rng(RngSpec{2024, 1});
    for (int rep = 0; rep < 50; ++rep) {
        const int k = 2 + static_cast<int>(rng.next_u64() % 4);  // 2..5
        const int mult = 2 + static_cast<int>(rng.next_u64() % (std::min(k, 3) - 1 + 1));
        const double x0 = 0.5 + rng.uniform01();
        std::vector<Node> nodes{Node::gamma(k, x0, mult)};
        double x = x0;
        while (static_cast<int>(nodes.size()) + mult - 1 < k + 1) {
            x += 0.3 + rng.uniform01();
            nodes.push_back(Node::point(x, rng.uniform01() * 3.0));
        }
        NodeSequence seq(nodes);

        // exact reproduction of every simple node ordinate
        for (const Node& n : nodes) {
            if (n.multiplicity == 1)
                CHECK(newton_eval_exact(seq, to_rational(n.x)) == to_rational(n.y));
        }
        // P(x0) = x0^k and P'(x0) = k x0^(k-1) via central differences
        const double h = 1e-6;
        const double p_mid = newton_eval(seq, x0);
        CHECK(std::fabs(p_mid - powi(x0, k)) <= 1e-9 * std::max(1.0, powi(x0, k)));
        const double deriv = (newton_eval(seq, x0 + h) - newton_eval(seq, x0 - h)) / (2 * h);
        const double expect = k * powi(x0, k - 1);
        CHECK(std::fabs(deriv - expect) <= 1e-6 * std::max(1.0, std::fabs(expect)));
    }
}

TEST_CASE("permutation invariance of exact divided differences", "[numerics]") {
    RandomStream rng(RngSpec{7, 3});
    for (int rep = 0; rep < 200; ++rep) {
        const int k = 1 + static_cast<int>(rng.next_u64() % 5);
        std::vector<Point> pts;
        double x = 0.0;
        for (int i = 0; i <= k; ++i) {
            x += 0.05 + rng.uniform01();
            pts.push_back({x, 4.0 * (rng.uniform01() - 0.5)});
        }
        const Rational reference =
            divided_difference_exact(NodeSequence::of_points(pts), k);

        std::vector<Point> shuffled = pts;
        for (std::size_t i = shuffled.size(); i > 1; --i)
            std::swap(shuffled[i - 1], shuffled[rng.next_u64() % i]);
        // the recursion itself permits any node order as long as repeated
        // abscissae stay adjacent; with distinct simple points any order works
        std::vector<Rational> xs, ys;
        for (Point p : shuffled) {
            xs.push_back(to_rational(p.x));
            ys.push_back(to_rational(p.y));
        }
        CHECK(detail::window_delta_rational(xs, ys, -1) == reference);
    }
}

TEST_CASE("divided differences on the curve match the symmetric-function oracle",
          "[numerics]") {
    // Delta_j of x^k over any nodes equals the complete homogeneous symmetric
    // polynomial h_(k-j), computed independently by enumeration.
    RandomStream rng(RngSpec{11, 4});
    for (int rep = 0; rep < 100; ++rep) {
        const int k = 1 + static_cast<int>(rng.next_u64() % 6);
        const int j = static_cast<int>(rng.next_u64() % (k + 1));
        std::vector<Rational> xs, ys;
        double x = 0.0;
        for (int i = 0; i <= j; ++i) {
            x += 0.05 + rng.uniform01();
            const Rational rx = to_rational(x);
            xs.push_back(rx);
            ys.push_back(rational_pow(rx, k));
        }
        CHECK(detail::window_delta_rational(xs, ys, k) == complete_homogeneous(k - j, xs));
    }
    // and the confluent base case agrees with the same oracle at a repeated node
    for (int k = 1; k <= 6; ++k) {
        for (int j = 0; j <= k; ++j) {
            const Rational x = to_rational(1.375);
            const std::vector<Rational> rep(static_cast<std::size_t>(j) + 1, x);
            CHECK(detail::confluent_value<Rational>(k, j, x) ==
                  complete_homogeneous(k - j, rep));
        }
    }
}

TEST_CASE("confluent consistency: recursion converges to the confluent value",
          "[numerics]") {
    RandomStream rng(RngSpec{13, 5});
    for (int rep = 0; rep < 100; ++rep) {
        // j = k is exact for every spacing (the leading coefficient), so the
        // convergence statement is about j < k
        const int k = 2 + static_cast<int>(rng.next_u64() % 5);
        const int j = 1 + static_cast<int>(rng.next_u64() % (k - 1));
        const double x0 = 0.1 + 2.0 * rng.uniform01();
        const Rational confluent = detail::confluent_value<Rational>(k, j, to_rational(x0));
        Rational first_err(-1);
        Rational prev_err(-1);
        for (double h : {1e-2, 1e-3, 1e-4}) {
            std::vector<Rational> xs, ys;
            for (int i = 0; i <= j; ++i) {
                const Rational rx = to_rational(x0) + to_rational(i * h);
                xs.push_back(rx);
                ys.push_back(rational_pow(rx, k));
            }
            Rational err = detail::window_delta_rational(xs, ys, k) - confluent;
            if (err < 0) err = -err;
            if (prev_err >= 0) CHECK(err < prev_err);
            if (first_err < 0) first_err = err;
            prev_err = err;
        }
        // the error is linear in the spacing, so two decades of h must shrink
        // it far more than 50x
        CHECK(prev_err * 50 < first_err);
    }
}

TEST_CASE("leading-coefficient law", "[numerics]") {
    RandomStream rng(RngSpec{17, 6});
    for (int rep = 0; rep < 100; ++rep) {
        const int k = 1 + static_cast<int>(rng.next_u64() % 5);
        // random degree-k polynomial with dyadic coefficients
        std::vector<double> coef(static_cast<std::size_t>(k) + 1);
        for (auto& c : coef) c = 4.0 * (rng.uniform01() - 0.5);
        if (coef[k] == 0.0) coef[k] = 1.0;
        std::vector<Rational> xs, ys;
        double x = 0.0;
        for (int i = 0; i <= k; ++i) {
            x += 0.1 + rng.uniform01();
            const Rational rx = to_rational(x);
            Rational val(0);
            for (int d = k; d >= 0; --d) val = val * rx + to_rational(coef[d]);
            xs.push_back(rx);
            ys.push_back(val);
        }
        CHECK(detail::window_delta_rational(xs, ys, -1) == to_rational(coef[k]));
    }
}

TEST_CASE("hybrid sign agrees with float sign away from zero", "[numerics]") {
    RandomStream rng(RngSpec{19, 7});
    int decided_fast = 0;
    for (int rep = 0; rep < 100000; ++rep) {
        const int k = 1 + static_cast<int>(rng.next_u64() % 4);
        std::vector<FlatNode> w;
        double x = 0.0;
        for (int i = 0; i <= k; ++i) {
            x += 0.05 + rng.uniform01();
            w.push_back({x, 4.0 * (rng.uniform01() - 0.5), false});
        }
        double max_abs = 0.0;
        const double delta = detail::window_delta_float(w, k, &max_abs);
        if (std::fabs(delta) > kFastPathRelTol * max_abs) {
            ++decided_fast;
            const int exact = detail::window_sign_exact(w, k);
            CHECK((delta > 0 ? 1 : -1) == exact);
        }
    }
    CHECK(decided_fast > 99000);  // the fast path should almost always decide
}

TEST_CASE("DiffTable invariants", "[numerics]") {
    NodeSequence seq({Node::gamma(3, 0.5, 3), Node::point(1.0, 0.25), Node::point(2.0, 8.0)});
    DiffTable<Rational> table(seq);
    REQUIRE(table.length() == 5);
    // entry(i, 0) is the ordinate of flattened node i
    CHECK(table.entry(0, 0) == rational_pow(to_rational(0.5), 3));
    CHECK(table.entry(3, 0) == to_rational(0.25));
    // windows inside the confluent run carry C(k, j) x^(k-j)
    for (int j = 1; j <= 2; ++j)
        for (int i = 0; i + j <= 2; ++i)
            CHECK(table.entry(i, j) ==
                  detail::confluent_value<Rational>(3, j, to_rational(0.5)));
}
