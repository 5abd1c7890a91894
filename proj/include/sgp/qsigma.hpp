#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

#include "sgp/common.hpp"
#include "sgp/quadrature.hpp"
#include "sgp/spectral_measure.hpp"
#include "sgp/spectrum.hpp"

namespace sgp {

// The operator Q_sigma from L2(dsigma) into L2(R,dx), realized through the
// unitary W e_{lambda_n} = h_n onto the Hermite-function basis:
//
//   (Q_sigma psi)(x) = sum_n ( int sigma_hat(y - lambda_n) psi(y) dy ) h_n(x),
//
// with the equivalent frequency form of the coefficients
//   coeff_n = <psi_hat, e_{lambda_n}>_{L2(dsigma)}
//           = int psi_hat(u) e^{-i lambda_n u} dsigma(u).
//
// Norm identity:  ||Q_sigma psi||^2_{L2(dx)} = int |psi_hat|^2 dsigma, with
// the a-priori bound ||Q psi|| <= sqrt(K) (||psi||_1^2 + ||psi'||_1^2)^{1/2},
// K = int dsigma/(1+u^2).  The adjoint acts through the kernel
//   (X(phi))(y) = sum_n <h_n, phi> sigma_hat(y - lambda_n),
// absolutely convergent pointwise by Cauchy-Schwarz against the Parseval
// identity.
//
// Test functions are Gaussians c e^{-a(x-b)^2}: their Fourier transforms are
// exact, which keeps every route certified.

struct GaussianTestFunction {
    double a = 1.0;     // width parameter, > 0
    double b = 0.0;     // center
    double scale = 1.0;

    double psi(double x) const {
        const double d = x - b;
        return scale * std::exp(-a * d * d);
    }

    // psi_hat(u) = int e^{iux} psi(x) dx = scale sqrt(pi/a) e^{-u^2/(4a)} e^{iub}
    std::complex<double> psi_hat(double u) const {
        const double mag = scale * std::sqrt(kPi / a) * std::exp(-u * u / (4.0 * a));
        return {mag * std::cos(u * b), mag * std::sin(u * b)};
    }

    double psi_hat_sq(double u) const {
        const double mag = scale * std::sqrt(kPi / a) * std::exp(-u * u / (4.0 * a));
        return mag * mag;
    }

    double l1_norm() const { return std::fabs(scale) * std::sqrt(kPi / a); }

    // int |psi'| = 2 |scale| (the Gaussian rises and falls once)
    double l1_norm_d1() const { return 2.0 * std::fabs(scale); }

    double psi_d2(double x) const {
        const double d = x - b;
        return scale * (4.0 * a * a * d * d - 2.0 * a) * std::exp(-a * d * d);
    }

    double l1_norm_d2() const {
        const double w = effective_half_width();
        return sampled_l1_norm([this](double x) { return psi_d2(x); }, b - w, b + w);
    }

    // beyond this the Gaussian contributes < 1e-15 of its mass
    double effective_half_width() const { return 9.0 / std::sqrt(a) + 1.0; }
};

// Orthonormal Hermite function h_n(x) (L2(R,dx) basis), stable normalized
// recurrence htilde_{k+1} = x sqrt(2/(k+1)) htilde_k - sqrt(k/(k+1)) htilde_{k-1}.
inline double hermite_fn(int n, double x) {
    if (n < 0) throw std::invalid_argument("hermite_fn: n must be >= 0");
    const double h0 = std::exp(-0.5 * x * x) / std::pow(kPi, 0.25);
    if (n == 0) return h0;
    double hm = 0.0, hc = h0;
    for (int k = 0; k < n; ++k) {
        const double hn = x * std::sqrt(2.0 / (k + 1)) * hc -
                          std::sqrt(static_cast<double>(k) / (k + 1)) * hm;
        hm = hc;
        hc = hn;
    }
    return hc;
}

// Hermite-function coordinates of Q_sigma psi, by the y-side integrals
// coeff_n = int sigma_hat(y - lambda_n) psi(y) dy over the effective
// support of psi.
inline std::vector<double> q_sigma_coefficients(const GaussianTestFunction& psi,
                                                const Spectrum& spectrum,
                                                const SpectralMeasure& measure,
                                                std::size_t count,
                                                const TruncationBudget& budget) {
    if (count > spectrum.size())
        throw std::invalid_argument("q_sigma_coefficients: count exceeds spectrum");
    if (!measure.is_even())
        throw std::invalid_argument("q_sigma_coefficients: even measure required");
    const double w = psi.effective_half_width();
    std::vector<double> out(count);
    if (measure.kind() == MeasureKind::Aifs) {
        double maxarg = 0.0;
        for (std::size_t n = 0; n < count; ++n)
            maxarg = std::max(maxarg, std::fabs(psi.b) + w + std::fabs(spectrum.freqs[n]));
        const AifsSigmaHat sh(measure, maxarg, 0.1 * budget.abs_tol);
        for (std::size_t n = 0; n < count; ++n) {
            const double l = spectrum.freqs[n];
            out[n] = adaptive_quadrature(
                [&](double y) { return sh(y - l) * psi.psi(y); }, psi.b - w,
                psi.b + w, budget.abs_tol);
        }
    } else {
        for (std::size_t n = 0; n < count; ++n) {
            const double l = spectrum.freqs[n];
            out[n] = adaptive_quadrature(
                [&](double y) {
                    return measure.sigma_hat_real(y - l, budget).value * psi.psi(y);
                },
                psi.b - w, psi.b + w, budget.abs_tol);
        }
    }
    return out;
}

// Frequency-side oracle for the same coefficients,
// coeff_n = int psi_hat(u) e^{-i lambda_n u} dsigma(u) by cascade quadrature.
inline std::vector<double> q_sigma_coefficients_freq(
    const GaussianTestFunction& psi, const Spectrum& spectrum,
    const SpectralMeasure& measure, std::size_t count,
    const TruncationBudget& budget) {
    if (count > spectrum.size())
        throw std::invalid_argument("q_sigma_coefficients_freq: count exceeds spectrum");
    std::vector<double> out(count);
    for (std::size_t n = 0; n < count; ++n) {
        const double l = spectrum.freqs[n];
        const auto v = measure.integrate_complex(
            [&](double u) {
                return psi.psi_hat(u) *
                       std::complex<double>(std::cos(l * u), -std::sin(l * u));
            },
            budget);
        out[n] = v.value.real();
    }
    return out;
}

struct NormIdentityReport {
    double coeff_sq_sum = 0.0; // sum_{n<count} coeff_n^2
    double integral = 0.0;     // int |psi_hat|^2 dsigma
    double rel_error = 0.0;
    double apriori_lhs = 0.0;  // ||Q psi||
    double apriori_rhs = 0.0;  // sqrt(K) (||psi||_1^2 + ||psi'||_1^2)^{1/2}
    bool apriori_ok = false;
};

// Parseval route vs direct quadrature of int |psi_hat|^2 dsigma, plus the
// a-priori continuity bound.
inline NormIdentityReport norm_identity_check(const GaussianTestFunction& psi,
                                              const Spectrum& spectrum,
                                              const SpectralMeasure& measure,
                                              std::size_t count,
                                              const TruncationBudget& budget) {
    NormIdentityReport rep;
    const auto coeffs = q_sigma_coefficients(psi, spectrum, measure, count, budget);
    for (double c : coeffs) rep.coeff_sq_sum += c * c;
    rep.integral =
        measure.integrate([&](double u) { return psi.psi_hat_sq(u); }, budget).value;
    rep.rel_error = std::fabs(rep.coeff_sq_sum - rep.integral) / rep.integral;
    rep.apriori_lhs = std::sqrt(rep.coeff_sq_sum);
    const double K = measure.admissibility_constant(budget);
    const double l1 = psi.l1_norm(), l1d = psi.l1_norm_d1();
    rep.apriori_rhs = std::sqrt(K) * std::sqrt(l1 * l1 + l1d * l1d);
    rep.apriori_ok = rep.apriori_lhs <= rep.apriori_rhs * (1.0 + 1e-12);
    return rep;
}

// Pointwise adjoint kernel (X(phi))(y) = sum_n phi_n sigma_hat(y - lambda_n)
// for phi given by its Hermite-function coefficients.
inline double adjoint_kernel(const std::vector<double>& phi_coeffs, double y,
                             const Spectrum& spectrum,
                             const SpectralMeasure& measure,
                             const TruncationBudget& budget) {
    if (phi_coeffs.size() > spectrum.size())
        throw std::invalid_argument("adjoint_kernel: more coefficients than frequencies");
    double maxarg = 0.0;
    for (std::size_t n = 0; n < phi_coeffs.size(); ++n)
        maxarg = std::max(maxarg, std::fabs(y - spectrum.freqs[n]));
    double acc = 0.0;
    if (measure.kind() == MeasureKind::Aifs) {
        const AifsSigmaHat sh(measure, maxarg,
                              budget.abs_tol / (phi_coeffs.size() + 1.0));
        for (std::size_t n = 0; n < phi_coeffs.size(); ++n)
            acc += phi_coeffs[n] * sh(y - spectrum.freqs[n]);
    } else {
        for (std::size_t n = 0; n < phi_coeffs.size(); ++n)
            acc += phi_coeffs[n] *
                   measure.sigma_hat_real(y - spectrum.freqs[n], budget).value;
    }
    return acc;
}

struct BilinearFormReport {
    double via_coefficients = 0.0; // sum_n coeff_n(psi) phi_n
    double via_adjoint = 0.0;      // int psi(y) X(phi)(y) dy
    double via_tsigma = 0.0;       // int psi_hat (T_sigma phi)^* dsigma
    double tsigma_imag = 0.0;      // imaginary remainder of the third route
    double max_deviation = 0.0;
};

// <Q_sigma psi, phi> computed three ways; returns the max pairwise gap.
inline BilinearFormReport bilinear_form_check(const GaussianTestFunction& psi,
                                              const std::vector<double>& phi_coeffs,
                                              const Spectrum& spectrum,
                                              const SpectralMeasure& measure,
                                              const TruncationBudget& budget) {
    BilinearFormReport rep;
    const auto coeffs =
        q_sigma_coefficients(psi, spectrum, measure, phi_coeffs.size(), budget);
    for (std::size_t n = 0; n < phi_coeffs.size(); ++n)
        rep.via_coefficients += coeffs[n] * phi_coeffs[n];

    const double w = psi.effective_half_width();
    rep.via_adjoint = adaptive_quadrature(
        [&](double y) {
            return psi.psi(y) * adjoint_kernel(phi_coeffs, y, spectrum, measure, budget);
        },
        psi.b - w, psi.b + w, budget.abs_tol * 10.0);

    // (T_sigma phi)(u) = sum_n phi_n e^{i lambda_n u}
    const auto v = measure.integrate_complex(
        [&](double u) {
            std::complex<double> t{0.0, 0.0};
            for (std::size_t n = 0; n < phi_coeffs.size(); ++n) {
                const double lu = spectrum.freqs[n] * u;
                t += phi_coeffs[n] * std::complex<double>(std::cos(lu), -std::sin(lu));
            }
            return psi.psi_hat(u) * t;
        },
        budget);
    rep.via_tsigma = v.value.real();
    rep.tsigma_imag = v.value.imag();

    rep.max_deviation = std::max({std::fabs(rep.via_coefficients - rep.via_adjoint),
                                  std::fabs(rep.via_coefficients - rep.via_tsigma),
                                  std::fabs(rep.via_adjoint - rep.via_tsigma)});
    return rep;
}

struct MollifiedIndicatorReport {
    std::vector<int> bandwidths;                 // mollification indices n
    std::vector<std::vector<double>> coeffs;     // Q s_n coefficients per n
    std::vector<double> cauchy_increments;       // ||Q s_n - Q s_{next}||_2
    std::vector<double> deviation_vs_indicator;  // sup |coeff - c(t)| per n
};

// Mollified approximation of Q_sigma 1_[0,t]: the smoothing s_n has
//   s_n_hat(u) = (e^{itu}-1)/(iu) e^{-u^2/(2 n^2)}
// (Gaussian mollifier of bandwidth n), whose Q-coefficients converge to the
// indicator coefficients c_k(t) = int_0^t sigma_hat(y-lambda_k) dy.
inline MollifiedIndicatorReport mollified_indicator(
    double t, const std::vector<int>& bandwidths, const SpectralMeasure& measure,
    const Spectrum& spectrum, std::size_t count,
    const std::vector<double>& indicator_coeffs, const TruncationBudget& budget) {
    if (count > spectrum.size())
        throw std::invalid_argument("mollified_indicator: count exceeds spectrum");
    MollifiedIndicatorReport rep;
    rep.bandwidths = bandwidths;
    for (int nb : bandwidths) {
        if (nb < 1)
            throw std::invalid_argument("mollified_indicator: bandwidth must be >= 1");
        std::vector<double> c(count);
        for (std::size_t k = 0; k < count; ++k) {
            const double l = spectrum.freqs[k];
            const auto v = measure.integrate_complex(
                [&](double u) -> std::complex<double> {
                    // (e^{itu}-1)/(iu) -> t as u -> 0
                    std::complex<double> chi;
                    if (std::fabs(u) < 1e-8) {
                        chi = {t, 0.5 * t * t * u};
                    } else {
                        chi = std::complex<double>(std::sin(t * u), 1.0 - std::cos(t * u)) / u;
                    }
                    const double damp = std::exp(-u * u / (2.0 * static_cast<double>(nb) * nb));
                    const double lu = l * u;
                    return chi * damp * std::complex<double>(std::cos(lu), -std::sin(lu));
                },
                budget);
            c[k] = v.value.real();
        }
        if (!indicator_coeffs.empty()) {
            double dev = 0.0;
            for (std::size_t k = 0; k < std::min(count, indicator_coeffs.size()); ++k)
                dev = std::max(dev, std::fabs(c[k] - indicator_coeffs[k]));
            rep.deviation_vs_indicator.push_back(dev);
        }
        rep.coeffs.push_back(std::move(c));
    }
    for (std::size_t i = 0; i + 1 < rep.coeffs.size(); ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < count; ++k) {
            const double d = rep.coeffs[i][k] - rep.coeffs[i + 1][k];
            s += d * d;
        }
        rep.cauchy_increments.push_back(std::sqrt(s));
    }
    return rep;
}

} // namespace sgp
