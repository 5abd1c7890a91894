#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "sgp/common.hpp"
#include "sgp/spectral_measure.hpp"

namespace sgp {

// Lacunary spectra Lambda_m attached to the AIFS measure with ratio 1/(2m):
//
//   Lambda_m = 2*pi * { sum_j b_j (2m)^j : b_j in {0, m/2} }.
//
// Writing b_j = (m/2) * bit_j, the n-th smallest element corresponds to the
// binary digits of n read in base 2m, so enumeration in ascending order is
// exact integer arithmetic:  lambda_n = pi * m * sum_j bit_j(n) (2m)^j.
// Elements are stored both as doubles (radians) and as the exact integer
// twice_q with lambda = pi * twice_q.

enum class SpectrumKind { AifsDigit, Listed };

struct Spectrum {
    SpectrumKind kind = SpectrumKind::Listed;
    int m = 0;                        // generator, AifsDigit only
    std::vector<double> freqs;        // ascending, radians
    std::vector<std::int64_t> twice_q; // exact 2*(lambda/2pi), AifsDigit only
    double tail_mass_bound = std::numeric_limits<double>::quiet_NaN();

    std::size_t size() const { return freqs.size(); }
};

// Exact twice_q of the n-th smallest element: m * sum_j bit_j(n) (2m)^j.
inline std::int64_t spectrum_element_twice_q(int m, std::uint64_t n) {
    std::int64_t v = 0;
    std::int64_t base_pow = 1;
    const std::int64_t base = 2 * static_cast<std::int64_t>(m);
    while (n) {
        if (v > (std::numeric_limits<std::int64_t>::max() >> 4))
            throw std::invalid_argument("spectrum element overflows exact arithmetic");
        if (n & 1) v += static_cast<std::int64_t>(m) * base_pow;
        base_pow *= base;
        n >>= 1;
    }
    return v;
}

double parseval_deficit(const SpectralMeasure& measure, const Spectrum& spectrum,
                        double t, const TruncationBudget& budget);

inline Spectrum generate_spectrum(int m, std::size_t count,
                                  bool probe_tail_mass = true) {
    if (m < 2) throw std::invalid_argument("generate_spectrum: m must be >= 2");
    if (count < 1) throw std::invalid_argument("generate_spectrum: count must be >= 1");
    if (count > (1u << 24))
        throw std::invalid_argument("generate_spectrum: count too large");
    Spectrum s;
    s.kind = SpectrumKind::AifsDigit;
    s.m = m;
    s.freqs.reserve(count);
    s.twice_q.reserve(count);
    for (std::size_t n = 0; n < count; ++n) {
        const std::int64_t tq = spectrum_element_twice_q(m, n);
        s.twice_q.push_back(tq);
        s.freqs.push_back(kPi * static_cast<double>(tq));
    }
    if (probe_tail_mass) {
        const SpectralMeasure sigma = SpectralMeasure::aifs(0.5 / m);
        TruncationBudget b;
        b.abs_tol = 1e-12;
        double worst = 0.0;
        for (double t : {0.3, 1.1, 2.7, 5.5, 9.3}) {
            const double d = parseval_deficit(sigma, s, t, b);
            if (d > worst) worst = d;
        }
        s.tail_mass_bound = worst;
    }
    return s;
}

inline Spectrum listed_spectrum(std::vector<double> freqs) {
    for (std::size_t i = 1; i < freqs.size(); ++i)
        if (!(freqs[i] > freqs[i - 1]))
            throw std::invalid_argument("listed_spectrum: frequencies must be strictly increasing");
    Spectrum s;
    s.kind = SpectrumKind::Listed;
    s.freqs = std::move(freqs);
    return s;
}

// 1 - sum_{n<N} |sigma_hat(t - lambda_n)|^2.  Nonnegative (up to tolerance)
// when (sigma, Lambda) is a spectral pair; doubles as the expansion
// truncation diagnostic.
inline double parseval_deficit(const SpectralMeasure& measure,
                               const Spectrum& spectrum, double t,
                               const TruncationBudget& budget) {
    double sum = 0.0;
    if (measure.kind() == MeasureKind::Aifs) {
        double maxarg = 0.0;
        for (double l : spectrum.freqs)
            maxarg = std::max(maxarg, std::fabs(t - l));
        const AifsSigmaHat sh(measure, maxarg,
                              budget.abs_tol / (4.0 * spectrum.size() + 4.0));
        for (double l : spectrum.freqs) {
            const double v = sh(t - l);
            sum += v * v;
        }
    } else {
        for (double l : spectrum.freqs) {
            const auto v = measure.sigma_hat(t - l, budget);
            sum += std::norm(v.value);
        }
    }
    return 1.0 - sum;
}

// K of the exponential Lipschitz lemma: ||e_t - e_s|| <= K |t-s| with
// K^2 = int u^2 dsigma(u).  Returns the integral (the squared constant),
// matching the constant listed in the lemma.
inline double exponential_lipschitz_constant(const SpectralMeasure& measure,
                                             const TruncationBudget& budget) {
    if (!measure.has_compact_support())
        throw IntegrabilityError(
            "exponential_lipschitz_constant: unbounded support; use the "
            "p-weighted admissibility variant");
    return measure.integrate([](double u) { return u * u; }, budget).value;
}

} // namespace sgp
