#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "sgp/common.hpp"
#include "sgp/quadrature.hpp"
#include "sgp/spectral_measure.hpp"

namespace sgp {

// Covariance kernel K_sigma(t,s), variance r(t) = ||Q_sigma 1_[0,t]||^2 and
// its derivative r'(t), all reduced to integrals of sigma_hat:
//
//   K(t,s) = int_0^t int_0^s sigma_hat(v-w) dw dv
//   r(t)   = K(t,t) = 2 int (1-cos(tu))/u^2 dsigma(u)
//   r'(t)  = 2 int_0^t sigma_hat(s) ds       (even sigma)
//          = 2 int sin(tu)/u dsigma(u)       (general)
//
// For the AIFS (singular) case sigma_hat is cheap and the frequency side is
// the expensive one, so a single cached grid of sigma_hat over the working
// range serves every call: the grid holds value and exact derivative per
// node, each cell is the cubic Hermite interpolant, and the antiderivatives
//   Phi1 = int_0^x sigma_hat,  Phi2 = int_0^x Phi1
// are accumulated cell-exactly.  For even sigma,
//   K(t,s) = Phi2(t) + Phi2(s) - Phi2(t-s),   r(t) = 2 Phi2(t).
//
// Atomic measures evaluate in closed form; densities integrate on the
// frequency side (with tail splitting for unbounded supports, which is the
// only route available when sigma has infinite total mass, e.g. the
// Ornstein-Uhlenbeck spectral density).

namespace detail {

// 2(1-cos(tu))/u^2, stable at small u (equals t^2 at u=0).
inline double chi_sq(double t, double u) {
    if (u == 0.0) return t * t;
    const double s = std::sin(0.5 * t * u);
    return 4.0 * s * s / (u * u);
}

// Re[ chi_t(u) chi_s(u)^* ], stable at small u (equals t*s at u=0).
inline double chi_prod_re(double t, double s, double u) {
    if (u == 0.0) return t * s;
    const double a = std::sin(0.5 * t * u);
    const double b = std::sin(0.5 * s * u);
    const double c = std::sin(0.5 * (t - s) * u);
    return (2.0 * a * a + 2.0 * b * b - 2.0 * c * c) / (u * u);
}

// sin(tu)/u, stable at small u (equals t at u=0).
inline double sinc_t(double t, double u) {
    if (u == 0.0) return t;
    return std::sin(t * u) / u;
}

} // namespace detail

class CovarianceKernel {
public:
    CovarianceKernel(SpectralMeasure measure, TruncationBudget budget,
                     double t_max = 8.0, double grid_step = 1e-2)
        : measure_(std::move(measure)), budget_(budget), t_max_(t_max) {
        budget_.validate();
        if (!(t_max > 0.0))
            throw std::invalid_argument("CovarianceKernel: t_max must be > 0");
        if (measure_.kind() == MeasureKind::Aifs)
            build_grid(grid_step);
    }

    const SpectralMeasure& measure() const { return measure_; }
    const TruncationBudget& budget() const { return budget_; }
    double t_max() const { return t_max_; }

    // K(t,s) = int_0^t int_0^s sigma_hat(v-w) dw dv; the real part is
    // taken for non-even atomic measures, matching the real form of r(t).
    double kernel(double t, double s) const {
        switch (measure_.kind()) {
            case MeasureKind::Aifs:
                return phi2(t) + phi2(s) - phi2(t - s);
            case MeasureKind::Atomic: {
                const auto& u = measure_.atom_points();
                const auto& w = measure_.atom_weights();
                double acc = 0.0;
                for (std::size_t i = 0; i < u.size(); ++i)
                    acc += w[i] * detail::chi_prod_re(t, s, u[i]);
                return acc;
            }
            case MeasureKind::Density: {
                if (std::isfinite(measure_.density_half_width()))
                    return density_compact(
                        [t, s](double u) { return detail::chi_prod_re(t, s, u); });
                // Re[chi_t chi_s^*] = [1 + cos((t-s)u) - cos(tu) - cos(su)]/u^2
                const double scale =
                    std::max({std::fabs(t), std::fabs(s), std::fabs(t - s)});
                const double U0 = tail_cut(scale);
                double v = adaptive_quadrature(
                    [&](double u) {
                        return measure_.density_at(u) * detail::chi_prod_re(t, s, u);
                    },
                    -U0, U0, budget_.abs_tol);
                v += inv_u2_tail(U0);
                v += cos_tail(t - s, U0) - cos_tail(t, U0) - cos_tail(s, U0);
                return v;
            }
        }
        return 0.0;
    }

    // r(t) = 2 int (1-cos(tu))/u^2 dsigma(u) = K(t,t).
    double variance(double t) const {
        switch (measure_.kind()) {
            case MeasureKind::Aifs:
                return 2.0 * phi2(t);
            case MeasureKind::Atomic: {
                const auto& u = measure_.atom_points();
                const auto& w = measure_.atom_weights();
                double acc = 0.0;
                for (std::size_t i = 0; i < u.size(); ++i)
                    acc += w[i] * detail::chi_sq(t, u[i]);
                return acc;
            }
            case MeasureKind::Density: {
                if (std::isfinite(measure_.density_half_width()))
                    return density_compact(
                        [t](double u) { return detail::chi_sq(t, u); });
                // 2(1-cos(tu))/u^2 = 2/u^2 - 2 cos(tu)/u^2
                const double U0 = tail_cut(std::fabs(t));
                double v = adaptive_quadrature(
                    [&](double u) {
                        return measure_.density_at(u) * detail::chi_sq(t, u);
                    },
                    -U0, U0, budget_.abs_tol);
                v += 2.0 * inv_u2_tail(U0) - 2.0 * cos_tail(t, U0);
                return v;
            }
        }
        return 0.0;
    }

    // r'(t) = 2 int_0^t sigma_hat (even sigma) = 2 int sin(tu)/u dsigma.
    double variance_rate(double t) const {
        switch (measure_.kind()) {
            case MeasureKind::Aifs:
                return 2.0 * phi1(t);
            case MeasureKind::Atomic: {
                const auto& u = measure_.atom_points();
                const auto& w = measure_.atom_weights();
                double acc = 0.0;
                for (std::size_t i = 0; i < u.size(); ++i)
                    acc += 2.0 * w[i] * detail::sinc_t(t, u[i]);
                return acc;
            }
            case MeasureKind::Density: {
                if (std::isfinite(measure_.density_half_width()))
                    return density_compact(
                        [t](double u) { return 2.0 * detail::sinc_t(t, u); });
                const double U0 = tail_cut(std::fabs(t));
                double v = adaptive_quadrature(
                    [&](double u) {
                        return 2.0 * measure_.density_at(u) * detail::sinc_t(t, u);
                    },
                    -U0, U0, budget_.abs_tol);
                v += 2.0 * sin_tail(t, U0);
                return v;
            }
        }
        return 0.0;
    }

    // Antiderivatives of the cached sigma_hat grid (AIFS only).
    double phi1(double x) const {
        check_range(x, 2.0 * t_max_ + pad_);
        const Cell& c = cell(x);
        const double xi = x - c.x0;
        return c.f1 + xi * (c.c0 + xi * (c.c1 / 2 + xi * (c.c2 / 3 + xi * c.c3 / 4)));
    }

    double phi2(double x) const {
        check_range(x, 2.0 * t_max_ + pad_);
        const Cell& c = cell(x);
        const double xi = x - c.x0;
        return c.f2 +
               xi * (c.f1 +
                     xi * (c.c0 / 2 +
                           xi * (c.c1 / 6 + xi * (c.c2 / 12 + xi * c.c3 / 20))));
    }

    double sigma_hat_interp(double x) const {
        check_range(x, 2.0 * t_max_ + pad_);
        const Cell& c = cell(x);
        const double xi = x - c.x0;
        return c.c0 + xi * (c.c1 + xi * (c.c2 + xi * c.c3));
    }

private:
    struct Cell {
        double x0;             // left node
        double c0, c1, c2, c3; // cubic Hermite coefficients of sigma_hat
        double f1;             // Phi1 at left node (anchored at 0)
        double f2;             // Phi2 at left node
    };

    void check_range(double x, double lim) const {
        if (!(std::fabs(x) <= lim))
            throw std::out_of_range(
                "CovarianceKernel: argument outside cached range; rebuild with "
                "larger t_max");
    }

    const Cell& cell(double x) const {
        const double pos = (x + range_) / h_;
        long i = static_cast<long>(std::floor(pos));
        i = std::max(0L, std::min(static_cast<long>(cells_.size()) - 1, i));
        return cells_[static_cast<std::size_t>(i)];
    }

    // sigma_hat and its exact derivative for the truncated product,
    //   d/dt prod_k cos(rho^k t) = sum_j [-rho^j sin(rho^j t) prod_{k!=j} cos].
    static void product_and_derivative(double t, const std::vector<double>& pows,
                                       double& value, double& deriv) {
        const std::size_t K = pows.size();
        std::vector<double> cosv(K);
        for (std::size_t k = 0; k < K; ++k) cosv[k] = std::cos(pows[k] * t);
        std::vector<double> prefix(K + 1), suffix(K + 1);
        prefix[0] = 1.0;
        for (std::size_t k = 0; k < K; ++k) prefix[k + 1] = prefix[k] * cosv[k];
        suffix[K] = 1.0;
        for (std::size_t k = K; k-- > 0;) suffix[k] = suffix[k + 1] * cosv[k];
        value = prefix[K];
        deriv = 0.0;
        for (std::size_t j = 0; j < K; ++j)
            deriv -= pows[j] * std::sin(pows[j] * t) * prefix[j] * suffix[j + 1];
    }

    void build_grid(double h) {
        if (!(h > 0.0))
            throw std::invalid_argument("CovarianceKernel: grid_step must be > 0");
        h_ = h;
        const double reach = 2.0 * t_max_ + pad_;
        const long n_half = static_cast<long>(std::ceil(reach / h_)) + 1;
        range_ = n_half * h_;
        const long n_nodes = 2 * n_half + 1;

        const int depth = std::max(
            budget_.product_depth,
            measure_.aifs_depth_needed(range_, 0.25 * budget_.abs_tol));
        std::vector<double> pows(static_cast<std::size_t>(depth));
        double p = 1.0;
        for (int k = 0; k < depth; ++k) {
            p *= measure_.ratio();
            pows[static_cast<std::size_t>(k)] = p;
        }

        std::vector<double> val(static_cast<std::size_t>(n_nodes));
        std::vector<double> der(static_cast<std::size_t>(n_nodes));
        for (long i = 0; i < n_nodes; ++i) {
            const double x = -range_ + i * h_;
            product_and_derivative(x, pows, val[static_cast<std::size_t>(i)],
                                   der[static_cast<std::size_t>(i)]);
        }

        cells_.resize(static_cast<std::size_t>(n_nodes - 1));
        // cubic Hermite per cell, then cumulative exact antiderivatives
        double F1 = 0.0, F2 = 0.0; // running int from left end
        for (long i = 0; i + 1 < n_nodes; ++i) {
            Cell& c = cells_[static_cast<std::size_t>(i)];
            const double f0 = val[static_cast<std::size_t>(i)];
            const double f1 = val[static_cast<std::size_t>(i + 1)];
            const double d0 = der[static_cast<std::size_t>(i)];
            const double d1 = der[static_cast<std::size_t>(i + 1)];
            c.x0 = -range_ + i * h_;
            c.c0 = f0;
            c.c1 = d0;
            c.c2 = (3.0 * (f1 - f0) / h_ - 2.0 * d0 - d1) / h_;
            c.c3 = (2.0 * (f0 - f1) / h_ + d0 + d1) / (h_ * h_);
            c.f1 = F1;
            c.f2 = F2;
            const double cell_i1 =
                h_ * (c.c0 + h_ * (c.c1 / 2 + h_ * (c.c2 / 3 + h_ * c.c3 / 4)));
            const double cell_i2 =
                h_ * (F1 + h_ * (c.c0 / 2 +
                                 h_ * (c.c1 / 6 + h_ * (c.c2 / 12 + h_ * c.c3 / 20))));
            F1 += cell_i1;
            F2 += cell_i2;
        }
        // anchor Phi1(0) = Phi2(0) = 0
        const double p1_at_0 = phi1_raw(0.0);
        const double p2_at_0 = phi2_raw(0.0);
        for (Cell& c : cells_) {
            c.f2 = c.f2 - p2_at_0 - p1_at_0 * (c.x0 - 0.0);
            c.f1 = c.f1 - p1_at_0;
        }
    }

    double phi1_raw(double x) const {
        const Cell& c = cell(x);
        const double xi = x - c.x0;
        return c.f1 + xi * (c.c0 + xi * (c.c1 / 2 + xi * (c.c2 / 3 + xi * c.c3 / 4)));
    }

    double phi2_raw(double x) const {
        const Cell& c = cell(x);
        const double xi = x - c.x0;
        return c.f2 +
               xi * (c.f1 +
                     xi * (c.c0 / 2 +
                           xi * (c.c1 / 6 + xi * (c.c2 / 12 + xi * c.c3 / 20))));
    }

    double density_compact(const std::function<double(double)>& g) const {
        const double U = measure_.density_half_width();
        auto integrand = [&](double u) { return measure_.density_at(u) * g(u); };
        return adaptive_quadrature(integrand, -U, U, budget_.abs_tol);
    }

    // Unbounded-support tails.  All assume an even density (the only
    // unbounded case in scope) and a bounded density at infinity.
    double tail_cut(double t_scale) const {
        return std::max(2000.0, 20.0 / std::max(t_scale, 1e-3));
    }

    // int_{|u|>U} rho(u)/u^2 du, exact via u = 1/y (monotone integrand).
    double inv_u2_tail(double U) const {
        auto f = [&](double y) {
            const double u = 1.0 / y;
            return measure_.density_at(u) + measure_.density_at(-u);
        };
        return adaptive_quadrature(f, 1e-9, 1.0 / U, budget_.abs_tol);
    }

    // int_{|u|>U} cos(tu) rho(u)/u^2 du by the two-term asymptotic expansion
    //   int_U^inf cos g = -sin(tU) g(U)/t - cos(tU) g'(U)/t^2 + O(||g''||/t^2),
    // doubled for the even measure.  Exact for t = 0 via inv_u2_tail.
    double cos_tail(double t, double U) const {
        if (t == 0.0) return inv_u2_tail(U);
        const double at = std::fabs(t);
        auto g = [&](double u) { return measure_.density_at(u) / (u * u); };
        const double d = 1e-4 * U;
        const double gU = g(U);
        const double gpU = (g(U + d) - g(U - d)) / (2.0 * d);
        const double one_side =
            -std::sin(at * U) * gU / at - std::cos(at * U) * gpU / (at * at);
        return 2.0 * one_side; // cos even in u, density even
    }

    // int_{|u|>U} sin(tu) rho(u)/u du, same expansion with g = rho/u.
    double sin_tail(double t, double U) const {
        if (t == 0.0) return 0.0;
        const double sgn = t < 0.0 ? -1.0 : 1.0;
        const double at = std::fabs(t);
        auto g = [&](double u) { return measure_.density_at(u) / u; };
        const double d = 1e-4 * U;
        const double gU = g(U);
        const double gpU = (g(U + d) - g(U - d)) / (2.0 * d);
        const double one_side =
            std::cos(at * U) * gU / at + std::sin(at * U) * gpU / (at * at);
        return sgn * 2.0 * one_side; // sin(tu)rho(u)/u is even in u
    }

    SpectralMeasure measure_;
    TruncationBudget budget_;
    double t_max_;
    double pad_ = 1.0;
    double h_ = 1e-2;
    double range_ = 0.0;
    std::vector<Cell> cells_;
};

// Empirical check of the Kolmogorov-continuity bound Re r(t) <= C |t| on
// (0, 1], together with a numerical probe of the (1+|u|)^-1 integrability
// hypothesis.  The bound check runs regardless of the probe outcome (the
// hypothesis is sufficient, not necessary).
struct KolmogorovReport {
    bool integrable = true;
    double integrability_core = 0.0;  // int_{|u|<=1e3} dsigma/(1+|u|)
    double integrability_tail = 0.0;  // int_{1e3<|u|<=1e6} dsigma/(1+|u|)
    double c_empirical = 0.0;         // max r(t)/t over the grid
    double c_supplied = 0.0;
    bool passes = false;
};

inline KolmogorovReport kolmogorov_bound_check(const SpectralMeasure& measure,
                                               double c_supplied,
                                               const TruncationBudget& budget,
                                               int grid_points = 1000) {
    KolmogorovReport rep;
    rep.c_supplied = c_supplied;
    if (measure.kind() == MeasureKind::Density &&
        !std::isfinite(measure.density_half_width())) {
        auto f = [&](double u) {
            return (measure.density_at(u) + measure.density_at(-u)) /
                   (1.0 + std::fabs(u));
        };
        rep.integrability_core = adaptive_quadrature(f, 0.0, 1e3, 1e-8);
        auto tail = [&](double y) {
            const double u = 1.0 / y;
            return (measure.density_at(u) + measure.density_at(-u)) /
                   (1.0 + u) / (y * y);
        };
        rep.integrability_tail = adaptive_quadrature(tail, 1e-6, 1e-3, 1e-8);
        rep.integrable =
            rep.integrability_tail <= 0.05 * rep.integrability_core + 1e-12;
    } else {
        auto f = [](double u) { return 1.0 / (1.0 + std::fabs(u)); };
        rep.integrability_core = measure.integrate(f, budget).value;
        rep.integrable = true;
    }
    CovarianceKernel ck(measure, budget, 1.0);
    double worst = 0.0;
    for (int i = 1; i <= grid_points; ++i) {
        const double t = static_cast<double>(i) / grid_points;
        worst = std::max(worst, ck.variance(t) / t);
    }
    rep.c_empirical = worst;
    rep.passes = c_supplied >= worst;
    return rep;
}

} // namespace sgp
