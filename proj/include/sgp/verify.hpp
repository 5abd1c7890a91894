#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "sgp/chaos.hpp"
#include "sgp/config.hpp"
#include "sgp/covariance.hpp"
#include "sgp/processes.hpp"
#include "sgp/rng.hpp"
#include "sgp/spectral_measure.hpp"
#include "sgp/spectrum.hpp"
#include "sgp/wick_ito.hpp"

namespace sgp {

// Named invariants runnable from the command line.  Each check reports the
// measured value against its bound; `pass` carries the verdict so callers
// need no knowledge of the comparison direction.

struct CheckResult {
    std::string name;
    double measured = 0.0;
    double bound = 0.0;
    bool pass = false;
    std::string note;
};

inline std::vector<CheckResult> run_verification(const ExperimentConfig& cfg) {
    std::vector<CheckResult> out;
    const SpectralMeasure measure = cfg.make_measure();
    const Spectrum spectrum = cfg.make_spectrum();
    const TruncationBudget& budget = cfg.budget;

    // deterministic pseudo-random draws for the check suite
    auto uniform = [&](std::uint64_t stream, std::uint64_t counter, double lo,
                       double hi) {
        return lo + (hi - lo) * u64_to_unit(mix3(cfg.seed, stream, counter));
    };

    // Parseval spectral-pair identity and positivity of the partial sums
    {
        double worst = 0.0, most_negative = 0.0;
        for (int i = 0; i < 40; ++i) {
            const double t = uniform(1, i, -10.0, 10.0);
            const double d = parseval_deficit(measure, spectrum, t, budget);
            worst = std::max(worst, d);
            most_negative = std::min(most_negative, d);
        }
        out.push_back({"parseval-deficit", worst, cfg.deficit_threshold,
                       worst <= cfg.deficit_threshold,
                       "max truncation deficit over random t in [-10,10]"});
        out.push_back({"parseval-positivity", -most_negative, 1e-9,
                       -most_negative <= 1e-9,
                       "partial sums must not exceed 1"});
    }

    // Orthonormality of the exponential family along the spectrum
    {
        const std::size_t n_ortho = std::min<std::size_t>(16, spectrum.size());
        double worst = 0.0;
        for (std::size_t i = 0; i < n_ortho; ++i)
            for (std::size_t j = 0; j < i; ++j) {
                const double v = std::fabs(
                    measure.sigma_hat_real(spectrum.freqs[i] - spectrum.freqs[j], budget)
                        .value);
                worst = std::max(worst, v);
            }
        const double at0 =
            std::fabs(measure.sigma_hat_real(0.0, budget).value - 1.0);
        out.push_back({"orthonormality", std::max(worst, at0), 1e-9,
                       std::max(worst, at0) <= 1e-9,
                       "sigma_hat at spectrum differences; sigma_hat(0)=1"});
    }

    // Invariance of the AIFS measure under its own maps
    if (measure.kind() == MeasureKind::Aifs) {
        double worst = 0.0;
        for (int trial = 0; trial < 20; ++trial) {
            double coef[7];
            for (int d = 0; d <= 6; ++d) coef[d] = uniform(2, trial * 8 + d, -1.0, 1.0);
            auto f = [&coef](double x) {
                double acc = 0.0;
                for (int d = 6; d >= 0; --d) acc = acc * x + coef[d];
                return acc;
            };
            worst = std::max(worst, measure.invariance_residual(f, budget));
        }
        out.push_back({"ifs-invariance", worst, 1e-8, worst <= 1e-8,
                       "pushforward identity on random degree-6 polynomials"});
    }

    // sigma_hat vs direct integration of e^{itu}
    {
        double worst = 0.0;
        for (int i = 0; i < 50; ++i) {
            const double t = uniform(3, i, -8.0, 8.0);
            const auto direct = measure.integrate_complex(
                [t](double u) {
                    return std::complex<double>(std::cos(t * u), std::sin(t * u));
                },
                budget);
            const auto sh = measure.sigma_hat(t, budget);
            worst = std::max(worst, std::abs(direct.value - sh.value));
        }
        out.push_back({"sigma-hat-consistency", worst, 1e-8, worst <= 1e-8,
                       "transform equals integral of e^{itu}"});
    }

    // Process-level checks need a genuine spectral pair; run them guarded so
    // a designed-failure spectrum still reports the Parseval failure above.
    bool pair_ok = true;
    try {
        detail::check_pair(measure, spectrum, {0.0, 1.0}, budget,
                           cfg.deficit_threshold);
    } catch (const SpectralPairError&) {
        pair_ok = false;
    }

    if (pair_ok && measure.kind() == MeasureKind::Aifs) {
        const auto times = cfg.make_grid();
        const auto X = build_X(measure, spectrum, times, budget, cfg.deficit_threshold);
        const auto W = build_W(measure, spectrum, times, budget, cfg.deficit_threshold);

        {
            double worst_ratio = 0.0;
            for (int i = 0; i < 100; ++i) {
                const std::size_t ia = static_cast<std::size_t>(
                    uniform(4, 2 * i, 0.0, static_cast<double>(times.size())));
                const std::size_t ib = static_cast<std::size_t>(
                    uniform(4, 2 * i + 1, 0.0, static_cast<double>(times.size())));
                if (ia == ib) continue;
                const std::size_t a = std::min(ia, ib), b = std::max(ia, ib);
                double s = 0.0;
                for (std::size_t n = 0; n < X.n_basis; ++n) {
                    const double d = X.coeff(b, n) - X.coeff(a, n);
                    s += d * d;
                }
                worst_ratio =
                    std::max(worst_ratio, std::sqrt(s) / (times[b] - times[a]));
            }
            out.push_back({"lipschitz-X", worst_ratio, 1.0 + 1e-9,
                           worst_ratio <= 1.0 + 1e-9,
                           "||X(t)-X(s)|| / |t-s| over random grid pairs"});
        }

        {
            double worst = 0.0;
            for (std::size_t i = 0; i < times.size(); ++i)
                worst = std::max(worst, std::fabs(W.sum_sq(i) - 1.0));
            out.push_back({"unit-variance-W", worst, cfg.deficit_threshold,
                           worst <= cfg.deficit_threshold,
                           "|sum c_n(t)^2 - 1| on the time grid"});
        }

        {
            // covariance reproduction: chaos inner products against the kernel
            CovarianceKernel ck(measure, budget,
                                std::max(std::fabs(cfg.t_min), std::fabs(cfg.t_max)));
            double worst = 0.0;
            for (int i = 0; i < 25; ++i) {
                const std::size_t ia = static_cast<std::size_t>(
                    uniform(5, 2 * i, 0.0, static_cast<double>(times.size())));
                const std::size_t ib = static_cast<std::size_t>(
                    uniform(5, 2 * i + 1, 0.0, static_cast<double>(times.size())));
                double dot = 0.0;
                for (std::size_t n = 0; n < X.n_basis; ++n)
                    dot += X.coeff(ia, n) * X.coeff(ib, n);
                worst = std::max(
                    worst, std::fabs(dot - ck.kernel(times[ia], times[ib])));
            }
            const double bound = cfg.deficit_threshold + 1e-7;
            out.push_back({"covariance-reproduction", worst, bound, worst <= bound,
                           "sum c_n(t) c_n(s) vs K(t,s)"});
        }
    }

    // Vage constant and inequality
    {
        const double a2 = vage_constant(2, 0);
        const double target = std::sqrt(kPi / 2.0);
        out.push_back({"vage-constant", std::fabs(a2 - target), 1e-8,
                       std::fabs(a2 - target) <= 1e-8, "A(2) vs sqrt(pi/2)"});

        double worst = 0.0;
        for (int trial = 0; trial < 50; ++trial) {
            ChaosElement h, u;
            for (int k = 0; k < 6; ++k) {
                const auto c1 = static_cast<std::uint32_t>(
                    1 + static_cast<std::uint32_t>(uniform(6, trial * 31 + 5 * k, 0, 6)));
                const auto e1 = static_cast<std::uint32_t>(
                    1 + static_cast<std::uint32_t>(uniform(6, trial * 31 + 5 * k + 1, 0, 3)));
                h += ChaosElement::basis(MultiIndex::unit(c1, e1),
                                         uniform(6, trial * 31 + 5 * k + 2, -1, 1));
                const auto c2 = static_cast<std::uint32_t>(
                    1 + static_cast<std::uint32_t>(uniform(6, trial * 31 + 5 * k + 3, 0, 6)));
                u += ChaosElement::basis(MultiIndex::unit(c2, 1),
                                         uniform(6, trial * 31 + 5 * k + 4, -1, 1));
            }
            const double lhs = wick_product(h, u).kondratiev_norm(2);
            const double rhs = a2 * h.kondratiev_norm(0) * u.kondratiev_norm(2);
            if (rhs > 0.0) worst = std::max(worst, lhs / rhs);
        }
        out.push_back({"vage-inequality", worst, 1.0 + 1e-12, worst <= 1.0 + 1e-12,
                       "||h<>u||_2 <= A(2) ||h||_0 ||u||_2 on random pairs"});
    }

    // Wick-Ito mesh convergence and the Ito drift term (compact run)
    if (pair_ok && measure.kind() == MeasureKind::Aifs) {
        Spectrum spec_small = generate_spectrum(cfg.m, std::min<std::size_t>(cfg.count, 64));
        std::vector<double> fine((1u << 12) + 1);
        for (std::size_t i = 0; i < fine.size(); ++i)
            fine[i] = static_cast<double>(i) / (1u << 12);
        const auto Xf = build_X(measure, spec_small, fine, budget, cfg.deficit_threshold);

        PolynomialIntegrand yx;
        yx.a1 = [](std::size_t) { return 1.0; };
        WickItoOptions opt;
        opt.tol = 1e-4;
        opt.min_level = 4;
        try {
            const auto res = wick_ito_integral_poly(yx, Xf, opt);
            out.push_back({"wick-ito-order", res.fitted_order, 0.9,
                           res.fitted_order >= 0.9,
                           "fitted mesh-convergence order (>= bound passes)"});
        } catch (const ConvergenceError&) {
            out.push_back({"wick-ito-order", 0.0, 0.9, false,
                           "refinement cap hit before Cauchy tolerance"});
        }

        CovarianceKernel ck(measure, budget, 1.0);
        WickItoOptions iopt;
        iopt.tol = 1e-7;
        iopt.min_level = 4;
        try {
            const auto rep = ito_formula_check_polynomial(ItoPoly::Square, Xf, ck, iopt);
            const double bound = 1e-5;
            out.push_back({"ito-square-residual", rep.residual, bound,
                           rep.residual <= bound,
                           "chaos-coefficient residual of the drift identity"});
        } catch (const ConvergenceError&) {
            out.push_back({"ito-square-residual", 0.0, 1e-5, false,
                           "Wick integral did not converge"});
        }
    }

    return out;
}

} // namespace sgp
