#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "sgp/covariance.hpp"
#include "sgp/processes.hpp"
#include "sgp/rng.hpp"

using namespace sgp;
using Catch::Approx;

namespace {
const TruncationBudget kBudget{24, 20, 1e-10};

std::vector<double> uniform_grid(double a, double b, std::size_t n) {
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i)
        t[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return t;
}
} // namespace

TEST_CASE("build_X basics") {
    const auto m = SpectralMeasure::aifs(0.25);
    const auto spec = generate_spectrum(2, 64);
    const auto times = uniform_grid(0.0, 1.0, 101);
    const auto X = build_X(m, spec, times, kBudget);

    SECTION("coefficients vanish at t = 0") {
        REQUIRE(X.sum_sq(0) == 0.0);
    }
    SECTION("chaos variance approaches r(1) within the deficit") {
        const CovarianceKernel ck(m, kBudget, 2.0);
        const double r1 = ck.variance(1.0);
        const double gap = r1 - X.sum_sq(100);
        REQUIRE(gap >= -1e-9);           // truncation only undershoots
        REQUIRE(gap <= X.deficits[100] * r1 + 1e-6);
    }
    SECTION("a non-spectral-pair is refused with a diagnostic") {
        std::vector<double> freqs(64);
        for (std::size_t n = 0; n < 64; ++n) freqs[n] = kTwoPi * static_cast<double>(n);
        const auto wrong = listed_spectrum(std::move(freqs));
        try {
            (void)build_X(m, wrong, times, kBudget);
            FAIL("expected SpectralPairError");
        } catch (const SpectralPairError& e) {
            REQUIRE(e.deficit > 0.01);
        }
    }
}

TEST_CASE("build_W unit variance and orthonormal sampling") {
    const auto m = SpectralMeasure::aifs(0.25);
    const auto spec = generate_spectrum(2, 256);
    // include t = lambda_1 = 2 pi in the grid
    std::vector<double> times{0.25, 1.0, kTwoPi};
    const auto W = build_W(m, spec, times, kBudget);

    SECTION("sum of squares is within the deficit of 1") {
        for (std::size_t i = 0; i < times.size(); ++i) {
            REQUIRE(W.sum_sq(i) <= 1.0 + 1e-9);
            REQUIRE(W.sum_sq(i) >= 1.0 - W.deficits[i] - 1e-9);
        }
    }
    SECTION("evaluation at a spectrum point picks the matching coordinate") {
        REQUIRE(W.coeff(2, 1) == Approx(1.0).margin(1e-12)); // sigma_hat(0)
        for (std::size_t n = 0; n < W.n_basis; ++n)
            if (n != 1) REQUIRE(std::fabs(W.coeff(2, n)) <= 1e-9);
    }
}

TEST_CASE("increment norm of W matches the closed product form") {
    const auto m = SpectralMeasure::aifs(0.25);
    const auto spec = generate_spectrum(2, 16384, false);
    const std::vector<double> times{0.3, 0.7, 1.0, 2.0};
    const auto W = build_W(m, spec, times, kBudget);
    auto closed = [&](double dt) {
        return 2.0 * (1.0 - m.sigma_hat_real(dt, kBudget).value);
    };
    auto inc_sq = [&](std::size_t i, std::size_t j) {
        double s = 0.0;
        for (std::size_t n = 0; n < W.n_basis; ++n) {
            const double d = W.coeff(i, n) - W.coeff(j, n);
            s += d * d;
        }
        return s;
    };
    REQUIRE(inc_sq(1, 0) == Approx(closed(0.4)).margin(1e-6));
    REQUIRE(inc_sq(3, 2) == Approx(closed(1.0)).margin(1e-6));
}

TEST_CASE("sampling is reproducible and seed-determined") {
    const auto m = SpectralMeasure::aifs(0.25);
    const auto spec = generate_spectrum(2, 32);
    const auto times = uniform_grid(0.0, 1.0, 21);
    const auto X = build_X(m, spec, times, kBudget);

    SECTION("zero coefficients give identically zero paths") {
        CoefficientPath zero = X;
        std::fill(zero.coeffs.begin(), zero.coeffs.end(), 0.0);
        const auto e = sample_paths(zero, 10, 7);
        for (double v : e.values) REQUIRE(v == 0.0);
    }
    SECTION("repeat with the same seed is bit-identical, any thread count") {
        const auto e1 = sample_paths(X, 300, 12345, 1);
        const auto e2 = sample_paths(X, 300, 12345, 4);
        REQUIRE(e1.values == e2.values);
        REQUIRE(e1.draws == e2.draws);
        const auto e3 = sample_paths(X, 300, 54321, 1);
        REQUIRE(e1.values != e3.values);
    }
    SECTION("draws are standard normal in bulk") {
        const auto e = sample_paths(X, 4000, 99);
        double s1 = 0.0, s2 = 0.0;
        for (double z : e.draws) {
            s1 += z;
            s2 += z * z;
        }
        const double n = static_cast<double>(e.draws.size());
        REQUIRE(std::fabs(s1 / n) < 4.0 / std::sqrt(n));
        REQUIRE(s2 / n == Approx(1.0).margin(5.0 * std::sqrt(2.0 / n)));
    }
}

TEST_CASE("monte carlo covariance agrees with the kernel") {
    const auto m = SpectralMeasure::aifs(0.25);
    const auto spec = generate_spectrum(2, 64);
    const auto times = uniform_grid(0.0, 2.0, 41);
    const auto X = build_X(m, spec, times, kBudget);
    const auto e = sample_paths(X, 4000, 2024);
    const CovarianceKernel ck(m, kBudget, 2.5);
    const auto stats = e.summarize();

    for (int trial = 0; trial < 10; ++trial) {
        const auto i = static_cast<std::size_t>(40.99 * u64_to_unit(mix3(71, trial, 0)));
        const auto j = static_cast<std::size_t>(40.99 * u64_to_unit(mix3(71, trial, 1)));
        const double kij = ck.kernel(times[i], times[j]);
        const double kii = ck.kernel(times[i], times[i]);
        const double kjj = ck.kernel(times[j], times[j]);
        const double se =
            std::sqrt((kii * kjj + kij * kij) / static_cast<double>(e.n_paths - 1));
        REQUIRE(std::fabs(e.sample_covariance(i, j) - kij) <= 4.0 * se + 1e-12);
    }
    for (std::size_t i = 0; i < times.size(); i += 10)
        REQUIRE(std::fabs(stats.mean[i]) <=
                4.0 * std::sqrt(std::max(stats.variance[i], 1e-12) /
                                static_cast<double>(e.n_paths)));
}

TEST_CASE("derivative bound and decay") {
    const auto m = SpectralMeasure::aifs(0.25);
    const auto spec = generate_spectrum(2, 64);
    // dyadic ladder of gaps below t = 1
    std::vector<double> times{0.9, 0.95, 0.975, 0.9875, 1.0};
    const auto X = build_X(m, spec, times, kBudget);
    const auto W = build_W(m, spec, times, kBudget);

    REQUIRE_THROWS_AS(derivative_check(X, W, 1.0, 1.0), std::invalid_argument);

    double prev = 0.0;
    for (std::size_t k = 0; k + 1 < times.size(); ++k) {
        const double gap = 1.0 - times[k];
        const double v = derivative_check(X, W, 1.0, times[k]);
        REQUIRE(v <= gap / std::sqrt(3.0) + 1e-9);
        if (k > 0) {
            const double ratio = v / prev;
            REQUIRE(ratio > 0.25);
            REQUIRE(ratio < 0.75); // first-order decay in the gap
        }
        prev = v;
    }
}

TEST_CASE("lipschitz bound for X increments") {
    const auto m = SpectralMeasure::aifs(0.25);
    const auto spec = generate_spectrum(2, 128);
    const auto times = uniform_grid(0.0, 2.0, 81);
    const auto X = build_X(m, spec, times, kBudget);
    for (int trial = 0; trial < 100; ++trial) {
        auto i = static_cast<std::size_t>(80.99 * u64_to_unit(mix3(72, trial, 0)));
        auto j = static_cast<std::size_t>(80.99 * u64_to_unit(mix3(72, trial, 1)));
        if (i == j) continue;
        if (i > j) std::swap(i, j);
        double s = 0.0;
        for (std::size_t n = 0; n < X.n_basis; ++n) {
            const double d = X.coeff(j, n) - X.coeff(i, n);
            s += d * d;
        }
        REQUIRE(std::sqrt(s) <= (times[j] - times[i]) * (1.0 + 1e-9));
    }
}

TEST_CASE("stationarity of W increments") {
    const auto m = SpectralMeasure::aifs(0.25);
    const auto spec = generate_spectrum(2, 16384, false);
    // pairs (t, t - d) and (s, s - d) share the gap d
    std::vector<double> times;
    std::vector<double> gaps;
    for (int i = 0; i < 12; ++i) {
        const double d = 0.05 + 2.0 * u64_to_unit(mix3(73, i, 0));
        const double t1 = -2.0 + 4.0 * u64_to_unit(mix3(73, i, 1));
        const double t2 = -2.0 + 4.0 * u64_to_unit(mix3(73, i, 2));
        gaps.push_back(d);
        times.push_back(t1);
        times.push_back(t1 - d);
        times.push_back(t2);
        times.push_back(t2 - d);
    }
    std::vector<double> sorted = times;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    const auto W = build_W(m, spec, sorted, kBudget);
    auto norm_inc = [&](double a, double b) {
        const std::size_t ia = W.time_index(a), ib = W.time_index(b);
        double s = 0.0;
        for (std::size_t n = 0; n < W.n_basis; ++n) {
            const double d = W.coeff(ia, n) - W.coeff(ib, n);
            s += d * d;
        }
        return std::sqrt(s);
    };
    for (std::size_t i = 0; i < gaps.size(); ++i) {
        const double n1 = norm_inc(times[4 * i], times[4 * i + 1]);
        const double n2 = norm_inc(times[4 * i + 2], times[4 * i + 3]);
        REQUIRE(std::fabs(n1 - n2) <= 1e-8);
    }
}

TEST_CASE("covariance reproduction by chaos inner products") {
    const auto m = SpectralMeasure::aifs(0.25);
    const auto spec = generate_spectrum(2, 256);
    const auto times = uniform_grid(0.0, 1.5, 31);
    const auto X = build_X(m, spec, times, kBudget);
    const CovarianceKernel ck(m, kBudget, 2.0);
    for (std::size_t i = 0; i < times.size(); i += 6)
        for (std::size_t j = 0; j < times.size(); j += 7) {
            double dot = 0.0;
            for (std::size_t n = 0; n < X.n_basis; ++n)
                dot += X.coeff(i, n) * X.coeff(j, n);
            const double gap = std::fabs(dot - ck.kernel(times[i], times[j]));
            REQUIRE(gap <= 2e-4); // tail of the truncated expansion
        }
}

TEST_CASE("kernel representation of the expansion coefficients") {
    // c_n(t) = Re[ i * int e^{i lambda_n u} (e^{-iut}-1)/u dsigma(u) ]
    const auto m = SpectralMeasure::aifs(0.25);
    const auto spec = generate_spectrum(2, 8);
    const std::vector<double> times{0.8};
    const auto X = build_X(m, spec, times, kBudget);
    for (std::size_t n = 0; n < 8; ++n) {
        const double l = spec.freqs[n];
        const double t = times[0];
        const auto v = m.integrate_complex(
            [l, t](double u) -> std::complex<double> {
                std::complex<double> chi;
                if (std::fabs(u) < 1e-8) chi = {t, 0.5 * t * t * u};
                else chi = std::complex<double>(std::sin(t * u), 1.0 - std::cos(t * u)) / u;
                // chi = i (e^{-iut}-1)/u up to conjugation bookkeeping below
                return std::complex<double>(std::cos(l * u), std::sin(l * u)) *
                       std::conj(chi);
            },
            kBudget);
        REQUIRE(v.value.real() == Approx(X.coeff(0, n)).margin(1e-6));
    }
}

TEST_CASE("periodic bridge") {
    const auto br = brownian_bridge_process(10000);

    SECTION("pinned endpoints") {
        REQUIRE(br.variance_series(0.0) == 0.0);
        REQUIRE(br.variance_series(kPi) == Approx(0.0).margin(1e-12));
    }
    SECTION("x coefficient zeros at sin multiples") {
        REQUIRE(br.x_coeff(2, kPi / 2.0) == Approx(0.0).margin(1e-15));
    }
    SECTION("series variance equals the atomic covariance route") {
        const CovarianceKernel ck(br.measure, kBudget, 4.0);
        for (double t : {0.4, 1.0, kPi / 2.0, 2.5})
            REQUIRE(ck.variance(t) == Approx(br.variance_series(t)).margin(1e-12));
    }
    SECTION("shape fit against t (pi - t)") {
        const auto ts = uniform_grid(0.1, kPi - 0.1, 101);
        double num = 0.0, den = 0.0;
        for (double t : ts) {
            const double shape = t * (kPi - t);
            num += br.variance_series(t) * shape;
            den += shape * shape;
        }
        const double c = num / den;
        REQUIRE(c == Approx(0.5).margin(2e-3));
        for (double t : ts) {
            const double shape = c * t * (kPi - t);
            REQUIRE(std::fabs(br.variance_series(t) - shape) / shape <= 1e-3);
        }
    }
    SECTION("closed-form paths populate the expected coordinates") {
        const auto xp = br.x_path({0.5, 1.0});
        REQUIRE(xp.coeff(0, 0) == Approx(std::sqrt(kPi / 2.0) * std::sin(0.5)));
        REQUIRE(xp.coeff(1, 2) ==
                Approx(std::sqrt(kPi / 2.0) * std::sin(3.0) / 3.0));
        const auto wp = br.w_path({0.5});
        REQUIRE(wp.coeff(0, 1) == Approx(std::sqrt(kPi / 2.0) * std::cos(1.0)));
        // Kondratiev weights of the coordinates: ||Z_n||_2^2 = (2n)^{-2}
        const auto z3 = ChaosElement::basis(MultiIndex::unit(3));
        REQUIRE(z3.kondratiev_norm_sq({2, NormSide::Distribution}) ==
                Approx(1.0 / 36.0));
    }
    SECTION("difference quotient of X converges to W only in the weak norms") {
        const auto n_max = std::size_t{400};
        const auto b2 = brownian_bridge_process(n_max);
        const double t = 1.0;
        for (double gap : {0.02, 0.01, 0.005}) {
            const auto xp = b2.x_path({t - gap, t});
            const auto wp = b2.w_path({t});
            std::vector<double> dq(n_max);
            for (std::size_t n = 0; n < n_max; ++n)
                dq[n] = (xp.coeff(1, n) - xp.coeff(0, n)) / gap - wp.coeff(0, n);
            const auto diff = ChaosElement::first_chaos(dq);
            // Gaussian norm does not shrink with the gap...
            REQUIRE(diff.gaussian_norm() > 0.5);
            // ...but the H_{-4} norm does
            REQUIRE(diff.kondratiev_norm(4) <= 2.0 * gap);
        }
    }
}

TEST_CASE("ornstein-uhlenbeck spectral density") {
    const auto ou = ou_process(1.0, 0.0, 1.0);

    SECTION("variance quadrature matches the half-rate law") {
        REQUIRE(ou.variance_quadrature(0.0, kBudget) == Approx(0.0).margin(1e-10));
        for (double t : {0.5, 1.0, 2.0, 4.0})
            REQUIRE(ou.variance_quadrature(t, kBudget) ==
                    Approx(ou.variance_half_rate(t)).margin(1e-6));
    }
    SECTION("stationary limit") {
        REQUIRE(ou.variance_quadrature(40.0, kBudget) ==
                Approx(ou.stationary_variance()).margin(1e-5));
    }
    SECTION("fitted decay rate reports the discrepancy against 2 theta") {
        const auto fit = ou.fit_exponential_rate(kBudget);
        REQUIRE(fit.rate == Approx(1.0).margin(5e-3));
        REQUIRE(fit.max_residual <= 1e-6);
        REQUIRE(fit.rate_mismatch_vs_classical ==
                Approx(1.0).margin(5e-3)); // rate theta, not 2 theta
    }
    SECTION("parameter validation") {
        REQUIRE_THROWS_AS(ou_process(0.0, 0.0, 1.0), std::invalid_argument);
        REQUIRE_THROWS_AS(ou_process(1.0, 0.0, 0.0), std::invalid_argument);
    }
}
