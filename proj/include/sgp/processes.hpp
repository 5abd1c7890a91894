#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "sgp/chaos.hpp"
#include "sgp/common.hpp"
#include "sgp/covariance.hpp"
#include "sgp/quadrature.hpp"
#include "sgp/rng.hpp"
#include "sgp/spectral_measure.hpp"
#include "sgp/spectrum.hpp"

namespace sgp {

// Truncated first-chaos expansions of the process X_sigma and its derivative
// W_sigma over a spectral pair (sigma, Lambda):
//
//   X_sigma(t) = sum_n ( int_0^t sigma_hat(y - lambda_n) dy ) Z_n
//   W_sigma(t) = sum_n sigma_hat(t - lambda_n) Z_n
//
// Column j of a CoefficientPath holds the coefficient of Z_j, the Gaussian
// coordinate living at multi-index position j+1.  Truncation quality is
// tracked by the Parseval deficit 1 - sum_n sigma_hat(t-lambda_n)^2 attached
// per time node.

enum class PathKind { X, W };

class SpectralPairError : public std::runtime_error {
public:
    SpectralPairError(const std::string& what, double deficit_)
        : std::runtime_error(what), deficit(deficit_) {}
    double deficit;
};

struct CoefficientPath {
    PathKind kind = PathKind::X;
    std::vector<double> times;
    std::size_t n_basis = 0;
    std::vector<double> coeffs;   // row-major [time][basis]
    Spectrum spectrum;
    std::vector<double> deficits; // per time; empty when not a spectral pair

    double coeff(std::size_t i, std::size_t n) const {
        return coeffs[i * n_basis + n];
    }

    const double* row(std::size_t i) const { return &coeffs[i * n_basis]; }

    std::size_t time_index(double t) const {
        for (std::size_t i = 0; i < times.size(); ++i)
            if (std::fabs(times[i] - t) <= 1e-12 * std::max(1.0, std::fabs(t)))
                return i;
        throw std::invalid_argument("CoefficientPath: time not on the grid");
    }

    // sum_n c_n(t_i)^2 (the chaos norm^2 of the first-chaos element)
    double sum_sq(std::size_t i) const {
        double s = 0.0;
        const double* r = row(i);
        for (std::size_t n = 0; n < n_basis; ++n) s += r[n] * r[n];
        return s;
    }

    ChaosElement element_at(std::size_t i) const {
        std::vector<double> c(row(i), row(i) + n_basis);
        return ChaosElement::first_chaos(c);
    }
};

namespace detail {

inline void check_times(const std::vector<double>& times) {
    if (times.empty())
        throw std::invalid_argument("coefficient path: empty time grid");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw std::invalid_argument("coefficient path: times must be increasing");
}

inline void check_pair(const SpectralMeasure& measure, const Spectrum& spectrum,
                       const std::vector<double>& times,
                       const TruncationBudget& budget, double threshold) {
    double worst = 0.0;
    const double lo = times.front(), hi = times.back();
    for (double t : {lo, 0.5 * (lo + hi), hi}) {
        const double d = parseval_deficit(measure, spectrum, t, budget);
        worst = std::max(worst, std::fabs(d));
    }
    if (worst > threshold)
        throw SpectralPairError(
            "spectral pair validation failed: Parseval deficit " +
                std::to_string(worst) + " exceeds threshold " +
                std::to_string(threshold) +
                " (raise the basis size N or loosen the threshold)",
            worst);
}

} // namespace detail

// X_sigma coefficients c_n(t) = int_0^t sigma_hat(y - lambda_n) dy on the
// given grid, by cumulative panel quadrature of the certified sigma_hat.
inline CoefficientPath build_X(const SpectralMeasure& measure,
                               const Spectrum& spectrum,
                               const std::vector<double>& times,
                               const TruncationBudget& budget,
                               double deficit_threshold = 1e-2) {
    detail::check_times(times);
    detail::check_pair(measure, spectrum, times, budget, deficit_threshold);

    const std::size_t N = spectrum.size();
    const std::size_t T = times.size();
    CoefficientPath path;
    path.kind = PathKind::X;
    path.times = times;
    path.n_basis = N;
    path.spectrum = spectrum;
    path.coeffs.assign(T * N, 0.0);

    if (measure.kind() == MeasureKind::Aifs) {
        double maxarg = std::fabs(times.front()) + std::fabs(times.back());
        for (double l : spectrum.freqs)
            maxarg = std::max(maxarg, std::fabs(times.back() - l) +
                                          std::fabs(times.front()) + 1.0);
        const AifsSigmaHat sh(measure, maxarg, 0.1 * budget.abs_tol);
        for (std::size_t n = 0; n < N; ++n) {
            const double l = spectrum.freqs[n];
            auto f = [&](double y) { return sh(y - l); };
            double acc = gauss_legendre_composite(f, 0.0, times[0], 0.25, 12);
            path.coeffs[0 * N + n] = acc;
            for (std::size_t i = 1; i < T; ++i) {
                const double len = times[i] - times[i - 1];
                // GL4 is already overkill on short segments of an entire
                // function with unit-scale derivatives
                acc += gauss_legendre_composite(f, times[i - 1], times[i], 0.25,
                                                len < 0.02 ? 4 : 12);
                path.coeffs[i * N + n] = acc;
            }
        }
    } else if (measure.kind() == MeasureKind::Atomic && measure.is_even()) {
        // int_0^t sigma_hat(y-l) dy = sum_k w_k [sin((t-l)u_k)+sin(l u_k)]/u_k
        const auto& u = measure.atom_points();
        const auto& w = measure.atom_weights();
        for (std::size_t n = 0; n < N; ++n) {
            const double l = spectrum.freqs[n];
            for (std::size_t i = 0; i < T; ++i) {
                const double t = times[i];
                double acc = 0.0;
                for (std::size_t k = 0; k < u.size(); ++k) {
                    if (u[k] == 0.0) acc += w[k] * t;
                    else acc += w[k] * (std::sin((t - l) * u[k]) + std::sin(l * u[k])) / u[k];
                }
                path.coeffs[i * N + n] = acc;
            }
        }
    } else {
        throw std::invalid_argument(
            "build_X: expansion requires an AIFS or even atomic spectral pair");
    }

    path.deficits.resize(T);
    for (std::size_t i = 0; i < T; ++i)
        path.deficits[i] = parseval_deficit(measure, spectrum, times[i], budget);
    return path;
}

// W_sigma coefficients c_n(t) = sigma_hat(t - lambda_n).
inline CoefficientPath build_W(const SpectralMeasure& measure,
                               const Spectrum& spectrum,
                               const std::vector<double>& times,
                               const TruncationBudget& budget,
                               double deficit_threshold = 1e-2) {
    detail::check_times(times);
    detail::check_pair(measure, spectrum, times, budget, deficit_threshold);

    const std::size_t N = spectrum.size();
    const std::size_t T = times.size();
    CoefficientPath path;
    path.kind = PathKind::W;
    path.times = times;
    path.n_basis = N;
    path.spectrum = spectrum;
    path.coeffs.assign(T * N, 0.0);
    path.deficits.assign(T, 0.0);

    if (measure.kind() == MeasureKind::Aifs) {
        double maxarg = 0.0;
        for (double l : spectrum.freqs)
            maxarg = std::max(maxarg,
                              std::max(std::fabs(times.back() - l),
                                       std::fabs(times.front() - l)));
        const AifsSigmaHat sh(measure, maxarg, budget.abs_tol / (4.0 * N));
        for (std::size_t i = 0; i < T; ++i) {
            double sum = 0.0;
            for (std::size_t n = 0; n < N; ++n) {
                const double v = sh(times[i] - spectrum.freqs[n]);
                path.coeffs[i * N + n] = v;
                sum += v * v;
            }
            path.deficits[i] = 1.0 - sum;
        }
    } else {
        for (std::size_t i = 0; i < T; ++i) {
            double sum = 0.0;
            for (std::size_t n = 0; n < N; ++n) {
                const double v =
                    measure.sigma_hat_real(times[i] - spectrum.freqs[n], budget).value;
                path.coeffs[i * N + n] = v;
                sum += v * v;
            }
            path.deficits[i] = 1.0 - sum;
        }
    }
    return path;
}

// Realized trajectories X^{(m)}(t_i) = sum_n c_n(t_i) Z_n^{(m)}.
// Draws are counter-based in (seed, path, n): reproducible and independent
// of evaluation order, so the path loop can be chunked across threads.
struct PathEnsemble {
    std::uint64_t seed = 0;
    std::size_t n_paths = 0;
    std::size_t n_times = 0;
    std::size_t n_basis = 0;
    std::vector<double> values; // [path][time]
    std::vector<double> draws;  // [path][basis]

    double value(std::size_t m, std::size_t i) const { return values[m * n_times + i]; }
    double draw(std::size_t m, std::size_t n) const { return draws[m * n_basis + n]; }

    struct Summary {
        std::vector<double> mean, variance, std_error;
    };

    Summary summarize() const {
        Summary s;
        s.mean.assign(n_times, 0.0);
        s.variance.assign(n_times, 0.0);
        s.std_error.assign(n_times, 0.0);
        for (std::size_t i = 0; i < n_times; ++i) {
            double m1 = 0.0;
            for (std::size_t m = 0; m < n_paths; ++m) m1 += value(m, i);
            m1 /= static_cast<double>(n_paths);
            double v = 0.0;
            for (std::size_t m = 0; m < n_paths; ++m) {
                const double d = value(m, i) - m1;
                v += d * d;
            }
            v /= static_cast<double>(n_paths - 1);
            s.mean[i] = m1;
            s.variance[i] = v;
            s.std_error[i] = std::sqrt(v / static_cast<double>(n_paths));
        }
        return s;
    }

    // Unbiased sample covariance between two time indices.
    double sample_covariance(std::size_t i, std::size_t j) const {
        double mi = 0.0, mj = 0.0;
        for (std::size_t m = 0; m < n_paths; ++m) {
            mi += value(m, i);
            mj += value(m, j);
        }
        mi /= static_cast<double>(n_paths);
        mj /= static_cast<double>(n_paths);
        double c = 0.0;
        for (std::size_t m = 0; m < n_paths; ++m)
            c += (value(m, i) - mi) * (value(m, j) - mj);
        return c / static_cast<double>(n_paths - 1);
    }
};

inline PathEnsemble sample_paths(const CoefficientPath& path, std::size_t n_paths,
                                 std::uint64_t seed, int threads = 1) {
    if (n_paths < 1)
        throw std::invalid_argument("sample_paths: need at least one path");
    PathEnsemble e;
    e.seed = seed;
    e.n_paths = n_paths;
    e.n_times = path.times.size();
    e.n_basis = path.n_basis;
    e.values.assign(n_paths * e.n_times, 0.0);
    e.draws.assign(n_paths * e.n_basis, 0.0);

    auto work = [&](std::size_t m0, std::size_t m1) {
        for (std::size_t m = m0; m < m1; ++m) {
            double* z = &e.draws[m * e.n_basis];
            for (std::size_t n = 0; n < e.n_basis; ++n)
                z[n] = standard_normal(seed, m, n);
            for (std::size_t i = 0; i < e.n_times; ++i) {
                const double* c = path.row(i);
                double s = 0.0;
                for (std::size_t n = 0; n < e.n_basis; ++n) s += c[n] * z[n];
                e.values[m * e.n_times + i] = s;
            }
        }
    };

    threads = std::max(1, threads);
    if (threads == 1 || n_paths < 64) {
        work(0, n_paths);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (n_paths + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            const std::size_t a = t * chunk;
            const std::size_t b = std::min(n_paths, a + chunk);
            if (a >= b) break;
            pool.emplace_back(work, a, b);
        }
        for (auto& th : pool) th.join();
    }
    return e;
}

// || (X(t)-X(s))/(t-s) - W(t) ||_W for nodes t, s of the common grid; the
// proof of the derivative theorem bounds this by |t-s|/sqrt(3).
inline double derivative_check(const CoefficientPath& xpath,
                               const CoefficientPath& wpath, double t, double s) {
    if (t == s) throw std::invalid_argument("derivative_check: t == s");
    const std::size_t it = xpath.time_index(t);
    const std::size_t is = xpath.time_index(s);
    const std::size_t iw = wpath.time_index(t);
    if (xpath.n_basis != wpath.n_basis)
        throw std::invalid_argument("derivative_check: basis size mismatch");
    double acc = 0.0;
    for (std::size_t n = 0; n < xpath.n_basis; ++n) {
        const double dq =
            (xpath.coeff(it, n) - xpath.coeff(is, n)) / (t - s) - wpath.coeff(iw, n);
        acc += dq * dq;
    }
    return std::sqrt(acc);
}

// ---- closed-form example processes (oracles) ------------------------------

// Periodic Brownian bridge: atoms of unit mass at the even positive
// integers 2, 4, ..., 2*n_max.  Closed-form expansion
//   X(t) = sqrt(pi/2) sum_{n>=1} sin(nt)/n Z_n,
//   W(t) = sqrt(pi/2) sum_{n>=1} cos(nt) Z_n,
// with column j holding Z_{j+1} (Gaussian coordinate j+1), so the n-th
// term has ||Z_n||_2^2 = (2n)^{-2} in the Kondratiev scale.
struct BridgeProcess {
    std::size_t n_max = 0;
    SpectralMeasure measure = SpectralMeasure::aifs(0.25); // replaced in ctor
    Spectrum spectrum;

    double x_coeff(std::size_t n, double t) const { // n >= 1
        return std::sqrt(kPi / 2.0) * std::sin(n * t) / static_cast<double>(n);
    }
    double w_coeff(std::size_t n, double t) const {
        return std::sqrt(kPi / 2.0) * std::cos(n * t);
    }

    CoefficientPath x_path(const std::vector<double>& times) const {
        detail::check_times(times);
        CoefficientPath p;
        p.kind = PathKind::X;
        p.times = times;
        p.n_basis = n_max;
        p.spectrum = spectrum;
        p.coeffs.assign(times.size() * n_max, 0.0);
        for (std::size_t i = 0; i < times.size(); ++i)
            for (std::size_t j = 0; j < n_max; ++j)
                p.coeffs[i * n_max + j] = x_coeff(j + 1, times[i]);
        return p;
    }

    CoefficientPath w_path(const std::vector<double>& times) const {
        detail::check_times(times);
        CoefficientPath p;
        p.kind = PathKind::W;
        p.times = times;
        p.n_basis = n_max;
        p.spectrum = spectrum;
        p.coeffs.assign(times.size() * n_max, 0.0);
        for (std::size_t i = 0; i < times.size(); ++i)
            for (std::size_t j = 0; j < n_max; ++j)
                p.coeffs[i * n_max + j] = w_coeff(j + 1, times[i]);
        return p;
    }

    // r(t) = 2 sum_{n<=n_max} (1 - cos(2nt))/(2n)^2, the variance series
    // evaluated directly over the atoms
    double variance_series(double t) const {
        double s = 0.0;
        for (std::size_t n = 1; n <= n_max; ++n) {
            const double tn = 2.0 * static_cast<double>(n);
            s += 2.0 * (1.0 - std::cos(tn * t)) / (tn * tn);
        }
        return s;
    }

    // crude tail estimate sum_{n>n_max} 1/n^2 ~= 1/n_max for the dropped atoms
    double series_tail_bound() const { return 1.0 / static_cast<double>(n_max); }
};

inline BridgeProcess brownian_bridge_process(std::size_t n_max = 10000) {
    if (n_max < 1)
        throw std::invalid_argument("brownian_bridge_process: n_max must be >= 1");
    BridgeProcess b;
    b.n_max = n_max;
    std::vector<double> pts(n_max), wts(n_max, 1.0), freqs(n_max);
    for (std::size_t n = 1; n <= n_max; ++n) {
        pts[n - 1] = 2.0 * static_cast<double>(n);
        freqs[n - 1] = static_cast<double>(n);
    }
    b.measure = SpectralMeasure::atomic(std::move(pts), std::move(wts));
    b.spectrum = listed_spectrum(std::move(freqs));
    return b;
}

// Ornstein-Uhlenbeck: spectral density (alpha^2/(2 pi theta)) theta u^2 /
// (theta^2 + u^2).  The measure has infinite total mass but is admissible;
// only the variance-type integrals are used.
struct OuProcess {
    double theta = 1.0, mu = 0.0, alpha = 1.0;
    SpectralMeasure measure = SpectralMeasure::aifs(0.25); // replaced in ctor

    // int (1-cos(tu))/u^2 dsigma(u), the single-factor form of Theorem 9.2
    double variance_quadrature(double t, const TruncationBudget& budget) const {
        CovarianceKernel ck(measure, budget, std::max(1.0, std::fabs(t)));
        return 0.5 * ck.variance(t);
    }

    double stationary_variance() const { return alpha * alpha / (2.0 * theta); }

    // the classical OU conditional-variance law (rate 2 theta) and the
    // half-rate law that the stated spectral density actually produces
    double variance_classical(double t) const {
        return stationary_variance() * (1.0 - std::exp(-2.0 * theta * t));
    }
    double variance_half_rate(double t) const {
        return stationary_variance() * (1.0 - std::exp(-theta * t));
    }

    struct RateFit {
        double amplitude = 0.0;
        double rate = 0.0;
        double max_residual = 0.0; // of the fit, against quadrature values
        double classical_rate = 0.0;
        double rate_mismatch_vs_classical = 0.0;
    };

    RateFit fit_exponential_rate(const TruncationBudget& budget) const {
        RateFit fit;
        fit.amplitude = stationary_variance();
        fit.classical_rate = 2.0 * theta;
        // least squares of log(1 - I/A) = -r t on t in [0.25,4]/theta
        double sxx = 0.0, sxy = 0.0;
        std::vector<double> ts, ys;
        for (int i = 0; i < 24; ++i) {
            const double t = (0.25 + i * (3.75 / 23.0)) / theta;
            const double I = variance_quadrature(t, budget);
            const double frac = 1.0 - I / fit.amplitude;
            if (frac <= 1e-12) continue;
            ts.push_back(t);
            ys.push_back(std::log(frac));
        }
        for (std::size_t i = 0; i < ts.size(); ++i) {
            sxx += ts[i] * ts[i];
            sxy += ts[i] * ys[i];
        }
        fit.rate = -sxy / sxx;
        for (std::size_t i = 0; i < ts.size(); ++i) {
            const double model = fit.amplitude * (1.0 - std::exp(-fit.rate * ts[i]));
            const double I = fit.amplitude * (1.0 - std::exp(ys[i]));
            fit.max_residual = std::max(fit.max_residual, std::fabs(model - I));
        }
        fit.rate_mismatch_vs_classical = std::fabs(fit.rate - fit.classical_rate);
        return fit;
    }
};

inline OuProcess ou_process(double theta, double mu, double alpha) {
    if (theta == 0.0) throw std::invalid_argument("ou_process: theta must be nonzero");
    if (!(alpha > 0.0)) throw std::invalid_argument("ou_process: alpha must be > 0");
    OuProcess p;
    p.theta = theta;
    p.mu = mu;
    p.alpha = alpha;
    const double a2 = alpha * alpha;
    const double th = theta;
    p.measure = SpectralMeasure::density(
        [a2, th](double u) {
            return (a2 / (2.0 * kPi)) * (u * u) / (th * th + u * u);
        },
        std::numeric_limits<double>::infinity(), /*even=*/true,
        /*integrability_exponent=*/1, /*tail_envelope=*/a2 / (2.0 * kPi));
    return p;
}

} // namespace sgp
