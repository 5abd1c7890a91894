#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "sgp/chaos.hpp"
#include "sgp/rng.hpp"

using namespace sgp;
using Catch::Approx;

namespace {
// extended-precision recurrence value at the double closest to 0.7,
// frozen before the build
constexpr double kH10At07 = 685.48795707489987125;
// Wallis-product value of A(2)
constexpr double kA2 = 1.2533141373155002512;
// zeta-series value of A(4), cross-checked against partial products
constexpr double kA4 = 1.0354600839057597494;

ChaosElement random_element(std::uint64_t tag, int n_terms, int max_coord,
                            int max_exp) {
    ChaosElement e;
    for (int k = 0; k < n_terms; ++k) {
        std::vector<MultiIndex::Entry> entries;
        const int support = 1 + static_cast<int>(2.99 * u64_to_unit(mix3(tag, k, 0)));
        for (int s = 0; s < support; ++s) {
            const auto coord = static_cast<std::uint32_t>(
                1 + (max_coord - 1) * u64_to_unit(mix3(tag, k, 2 * s + 1)));
            const auto expnt = static_cast<std::uint32_t>(
                1 + (max_exp - 1) * u64_to_unit(mix3(tag, k, 2 * s + 2)));
            bool dup = false;
            for (const auto& en : entries) dup = dup || en.first == coord;
            if (!dup) entries.push_back({coord, expnt});
        }
        e += ChaosElement::basis(MultiIndex(entries),
                                 -1.0 + 2.0 * u64_to_unit(mix3(tag, k, 99)));
    }
    return e;
}

// brute-force convolution oracle over string-keyed pair sums; shares no code
// with wick_product
std::vector<std::pair<std::string, double>> brute_convolution(
    const ChaosElement& f, const ChaosElement& g) {
    std::vector<std::pair<std::string, double>> raw;
    for (const auto& [a, ca] : f.terms())
        for (const auto& [b, cb] : g.terms())
            raw.emplace_back((a + b).to_string(), ca * cb);
    std::sort(raw.begin(), raw.end());
    std::vector<std::pair<std::string, double>> folded;
    for (const auto& [k, v] : raw) {
        if (!folded.empty() && folded.back().first == k) folded.back().second += v;
        else folded.emplace_back(k, v);
    }
    folded.erase(std::remove_if(folded.begin(), folded.end(),
                                [](const auto& p) { return p.second == 0.0; }),
                 folded.end());
    return folded;
}
} // namespace

TEST_CASE("hermite polynomials") {
    REQUIRE(hermite_poly(2, 1.0) == 0.0);   // x^2 - 1 at 1
    REQUIRE(hermite_poly(3, 2.0) == 2.0);   // x^3 - 3x at 2
    REQUIRE(hermite_poly(10, 0.7) == Approx(kH10At07).epsilon(1e-12));
    REQUIRE(hermite_poly(0, 5.0) == 1.0);
    REQUIRE_THROWS_AS(hermite_poly(-1, 0.0), std::invalid_argument);
}

TEST_CASE("wick product basics") {
    const auto e1 = MultiIndex::unit(1);

    SECTION("H_{e1} <> H_{e1} = H_{2 e1}") {
        const auto p = wick_product(ChaosElement::basis(e1), ChaosElement::basis(e1));
        REQUIRE(p.term_count() == 1);
        REQUIRE(p.coeff(MultiIndex::unit(1, 2)) == 1.0);
    }
    SECTION("(1 + Z1) <> (1 + Z1) = 1 + 2 H_{e1} + H_{2e1}") {
        ChaosElement f = ChaosElement::constant(1.0) + ChaosElement::basis(e1);
        const auto p = wick_product(f, f);
        REQUIRE(p.coeff(MultiIndex()) == 1.0);
        REQUIRE(p.coeff(e1) == 2.0);
        REQUIRE(p.coeff(MultiIndex::unit(1, 2)) == 1.0);
        REQUIRE(p.term_count() == 3);
    }
    SECTION("constant factor reduces to scalar multiplication") {
        const auto f = random_element(31, 12, 8, 3);
        const auto p = wick_product(f, ChaosElement::constant(2.5));
        for (const auto& [a, c] : f.terms()) REQUIRE(p.coeff(a) == 2.5 * c);
    }
    SECTION("random 50-term products match the brute-force oracle") {
        const auto f = random_element(32, 50, 10, 4);
        const auto g = random_element(33, 50, 10, 4);
        const auto p = wick_product(f, g);
        const auto oracle = brute_convolution(f, g);
        REQUIRE(p.term_count() == oracle.size());
        for (const auto& [key, val] : oracle) {
            bool found = false;
            for (const auto& [a, c] : p.terms())
                if (a.to_string() == key) {
                    REQUIRE(c == Approx(val).margin(1e-12));
                    found = true;
                }
            REQUIRE(found);
        }
    }
}

TEST_CASE("wick product is commutative and associative") {
    for (int trial = 0; trial < 8; ++trial) {
        const auto f = random_element(40 + trial, 20, 8, 3);
        const auto g = random_element(50 + trial, 20, 8, 3);
        const auto h = random_element(60 + trial, 20, 8, 3);
        const auto fg = wick_product(f, g);
        const auto gf = wick_product(g, f);
        for (const auto& [a, c] : fg.terms())
            REQUIRE(gf.coeff(a) == Approx(c).margin(1e-12));
        const auto lhs = wick_product(fg, h);
        const auto rhs = wick_product(f, wick_product(g, h));
        REQUIRE(lhs.term_count() == rhs.term_count());
        for (const auto& [a, c] : lhs.terms())
            REQUIRE(rhs.coeff(a) == Approx(c).margin(1e-10));
    }
}

TEST_CASE("kondratiev weighted sums") {
    SECTION("single-term examples") {
        const auto he1 = ChaosElement::basis(MultiIndex::unit(1));
        REQUIRE(he1.kondratiev_norm_sq({2, NormSide::Distribution}) ==
                Approx(0.25).margin(1e-15));
        const auto he2 = ChaosElement::basis(MultiIndex::unit(2));
        REQUIRE(he2.kondratiev_norm_sq({2, NormSide::Distribution}) ==
                Approx(1.0 / 16.0).margin(1e-15));
        const auto mixed =
            ChaosElement::basis(MultiIndex::unit(1, 2) + MultiIndex::unit(3));
        REQUIRE(mixed.kondratiev_norm_sq({1, NormSide::Distribution}) ==
                Approx(1.0 / 24.0).margin(1e-15)); // 2^{-2} * 6^{-1}
    }
    SECTION("test-side weights carry the squared factorial") {
        const auto a = MultiIndex::unit(1, 3); // alpha! = 6
        const auto e = ChaosElement::basis(a, 1.0);
        REQUIRE(e.kondratiev_norm_sq({1, NormSide::Test}) ==
                Approx(36.0 * std::pow(2.0, 3)).margin(1e-12));
    }
    SECTION("norm monotonicity in the level") {
        const auto f = random_element(70, 25, 9, 4);
        const double n0 = f.kondratiev_norm(0);
        const double n1 = f.kondratiev_norm(1);
        const double n2 = f.kondratiev_norm(2);
        REQUIRE(n2 <= n1 * (1.0 + 1e-14));
        REQUIRE(n1 <= n0 * (1.0 + 1e-14));
        REQUIRE(n0 <= f.gaussian_norm() * (1.0 + 1e-14));
    }
}

TEST_CASE("gaussian norms") {
    REQUIRE(ChaosElement::basis(MultiIndex::unit(1, 3)).gaussian_norm() ==
            Approx(std::sqrt(6.0)));
    REQUIRE(ChaosElement::zero().gaussian_norm() == 0.0);
    std::vector<double> c{0.3, -0.4, 1.2, 0.1};
    double l2 = 0.0;
    for (double x : c) l2 += x * x;
    REQUIRE(ChaosElement::first_chaos(c).gaussian_norm() ==
            Approx(std::sqrt(l2)).margin(1e-15));
}

TEST_CASE("vage constant") {
    REQUIRE(vage_constant(2, 0) == Approx(kA2).margin(1e-8));
    REQUIRE(vage_constant(4, 0) == Approx(kA4).margin(1e-10));
    REQUIRE_THROWS_AS(vage_constant(2, 1), std::invalid_argument);
    REQUIRE_THROWS_AS(vage_constant(1, 0), std::invalid_argument);
}

TEST_CASE("vage inequality on random pairs") {
    const double a2 = vage_constant(2, 0);
    for (int trial = 0; trial < 200; ++trial) {
        const auto h = random_element(100 + trial, 10, 7, 3);
        const auto u = random_element(400 + trial, 10, 7, 3);
        const double lhs = wick_product(h, u).kondratiev_norm(2);
        const double rhs = a2 * h.kondratiev_norm(0) * u.kondratiev_norm(2);
        REQUIRE(lhs <= rhs * (1.0 + 1e-12));
    }
}

TEST_CASE("first-chaos wick square structure") {
    std::vector<double> c{0.5, -1.0, 2.0};
    const auto x = ChaosElement::first_chaos(c);
    const auto sq = wick_product(x, x);
    REQUIRE(sq.coeff(MultiIndex::unit(1, 2)) == Approx(0.25));
    REQUIRE(sq.coeff(MultiIndex::unit(1) + MultiIndex::unit(2)) == Approx(-1.0));
    REQUIRE(sq.coeff(MultiIndex::unit(2) + MultiIndex::unit(3)) == Approx(-4.0));
    REQUIRE(sq.coeff(MultiIndex::unit(3, 2)) == Approx(4.0));
    // no constant term: the Gaussian square X^2 = X^{<>2} + sum c^2 keeps the
    // variance outside the Wick square
    REQUIRE(sq.coeff(MultiIndex()) == 0.0);
}

TEST_CASE("debug serialization format") {
    auto e = ChaosElement::basis(MultiIndex::unit(1, 2) + MultiIndex::unit(3), 0.5);
    REQUIRE(e.debug_string() == "alpha=1:2,3:1 coeff=0.5\n");
}

TEST_CASE("multi-index validation") {
    REQUIRE_THROWS_AS(MultiIndex::unit(0), std::invalid_argument);
    const MultiIndex a({{2, 1}, {1, 3}});
    REQUIRE(a.total_degree() == 4);
    REQUIRE(a.factorial() == 6.0);
    REQUIRE(a.max_coordinate() == 2);
    const auto b = a + a;
    REQUIRE(b.exponent(1) == 6);
    REQUIRE(b.exponent(2) == 2);
}
