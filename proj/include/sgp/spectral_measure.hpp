#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <future>
#include <limits>
#include <stdexcept>
#include <vector>

#include "sgp/common.hpp"
#include "sgp/quadrature.hpp"

namespace sgp {

// Spectral measures sigma on the frequency line.
//
// Three kinds are supported:
//
//   Aifs    : the Bernoulli-convolution measure invariant under the two maps
//             tau_pm(x) = rho (x±1); its Fourier transform is the infinite
//             product  sigma_hat(t) = prod_{k>=1} cos(rho^k t).
//   Atomic  : finitely many atoms (u_k, w_k), w_k >= 0.
//   Density : an integrable density on [-half_width, half_width]
//             (half_width may be infinite; then only the operations with
//             their own tail handling accept the measure).
//
// Evaluations are certified: sigma_hat carries the tail bound
//   |prod_{k>K} cos(rho^k t) - 1| <= t^2 rho^{2(K+1)} / (2 (1 - rho^2)),
// which follows from |1 - cos x| <= x^2/2 and |prod a_k - 1| <= sum |1-a_k|
// for factors bounded by one in modulus.  Cascade integration against the
// AIFS measure pushes the invariance identity to depth L:
//   int f dsigma ~= 2^-L sum_{w in {+,-}^L} f(tau_w(0)),
// with every leaf of the cascade lying within rho^L * R of the exact cell,
// R = rho/(1-rho) the support radius.

enum class MeasureKind { Aifs, Atomic, Density };

struct ComplexWithBound {
    std::complex<double> value{0.0, 0.0};
    double bound = 0.0;
};

namespace detail {

// Threads used by cascade integration.  The reduction tree is fixed, so the
// result is bit-identical for every setting.
inline int& cascade_threads() {
    static int n = 1;
    return n;
}

template <class T, class F>
T cascade_sum(const F& f, double x, const std::vector<double>& pow_rho,
              std::size_t level, int spawn_depth) {
    if (level == pow_rho.size()) return f(x);
    const double p = pow_rho[level];
    if (spawn_depth > 0) {
        auto right = std::async(std::launch::async, [&f, x, p, &pow_rho, level,
                                                     spawn_depth] {
            return cascade_sum<T>(f, x - p, pow_rho, level + 1, spawn_depth - 1);
        });
        T left = cascade_sum<T>(f, x + p, pow_rho, level + 1, spawn_depth - 1);
        return left + right.get();
    }
    T left = cascade_sum<T>(f, x + p, pow_rho, level + 1, 0);
    T right = cascade_sum<T>(f, x - p, pow_rho, level + 1, 0);
    return left + right;
}

} // namespace detail

inline void set_cascade_threads(int n) {
    detail::cascade_threads() = std::max(1, n);
}

class SpectralMeasure {
public:
    static SpectralMeasure aifs(double rho) {
        if (!(rho > 0.0 && rho < 1.0))
            throw std::invalid_argument("SpectralMeasure::aifs: rho must be in (0,1)");
        SpectralMeasure m;
        m.kind_ = MeasureKind::Aifs;
        m.rho_ = rho;
        m.even_ = true;
        return m;
    }

    static SpectralMeasure atomic(std::vector<double> points,
                                  std::vector<double> weights) {
        if (points.size() != weights.size() || points.empty())
            throw std::invalid_argument("SpectralMeasure::atomic: point/weight size mismatch");
        for (double w : weights)
            if (!(w >= 0.0))
                throw std::invalid_argument("SpectralMeasure::atomic: weights must be >= 0");
        SpectralMeasure m;
        m.kind_ = MeasureKind::Atomic;
        m.points_ = std::move(points);
        m.weights_ = std::move(weights);
        m.even_ = m.detect_even_atoms();
        return m;
    }

    // tail_envelope: a constant A with density(u) <= A for large |u|; only
    // consulted when half_width is infinite.
    static SpectralMeasure density(std::function<double(double)> rho,
                                   double half_width, bool even,
                                   int integrability_exponent = 1,
                                   double tail_envelope = 0.0) {
        if (!rho) throw std::invalid_argument("SpectralMeasure::density: null density");
        if (!(half_width > 0.0))
            throw std::invalid_argument("SpectralMeasure::density: half_width must be > 0");
        SpectralMeasure m;
        m.kind_ = MeasureKind::Density;
        m.density_ = std::move(rho);
        m.half_width_ = half_width;
        m.even_ = even;
        m.p_exponent_ = integrability_exponent;
        m.envelope_ = tail_envelope;
        return m;
    }

    MeasureKind kind() const { return kind_; }
    bool is_even() const { return even_; }
    double ratio() const { return rho_; }
    int integrability_exponent() const { return p_exponent_; }
    const std::vector<double>& atom_points() const { return points_; }
    const std::vector<double>& atom_weights() const { return weights_; }
    double density_at(double u) const { return density_(u); }
    double density_half_width() const { return half_width_; }
    double tail_envelope() const { return envelope_; }

    bool has_compact_support() const {
        switch (kind_) {
            case MeasureKind::Aifs: return true;
            case MeasureKind::Atomic: return true;
            case MeasureKind::Density: return std::isfinite(half_width_);
        }
        return false;
    }

    // Radius of the support (AIFS: rho/(1-rho); atomic: max |u_k|).
    double support_radius() const {
        switch (kind_) {
            case MeasureKind::Aifs: return rho_ / (1.0 - rho_);
            case MeasureKind::Atomic: {
                double r = 0.0;
                for (double u : points_) r = std::max(r, std::fabs(u));
                return r;
            }
            case MeasureKind::Density: return half_width_;
        }
        return 0.0;
    }

    double total_mass(const TruncationBudget& budget) const {
        switch (kind_) {
            case MeasureKind::Aifs: return 1.0;
            case MeasureKind::Atomic: {
                double s = 0.0;
                for (double w : weights_) s += w;
                return s;
            }
            case MeasureKind::Density:
                if (!std::isfinite(half_width_))
                    return std::numeric_limits<double>::infinity();
                return adaptive_quadrature(density_, -half_width_, half_width_,
                                           budget.abs_tol);
        }
        return 0.0;
    }

    // ---- Fourier transform ------------------------------------------------

    // Depth K needed so the AIFS product tail meets tol at argument t.
    int aifs_depth_needed(double t, double tol) const {
        const double a = std::fabs(t);
        if (a == 0.0) return 1;
        const double rhs = 2.0 * (1.0 - rho_ * rho_) * tol / (a * a);
        if (rhs >= 1.0) return 1;
        const int k = static_cast<int>(
            std::ceil(std::log(rhs) / (2.0 * std::log(rho_)))); // = K+1
        return std::max(1, k);
    }

    double aifs_tail_bound(double t, int depth) const {
        return t * t * std::pow(rho_, 2.0 * (depth + 1)) /
               (2.0 * (1.0 - rho_ * rho_));
    }

    static constexpr int kMaxProductDepth = 1 << 22;

    // sigma_hat for even measures (real value).  AIFS path is the certified
    // truncated cosine product with auto-raised depth.
    ValueWithBound sigma_hat_real(double t, const TruncationBudget& budget) const {
        switch (kind_) {
            case MeasureKind::Aifs: {
                const int need = aifs_depth_needed(t, budget.abs_tol);
                if (need > kMaxProductDepth)
                    throw BudgetError("sigma_hat: product depth cap exceeded",
                                      aifs_tail_bound(t, kMaxProductDepth));
                const int K = std::max(budget.product_depth, need);
                double prod = 1.0;
                double p = 1.0;
                for (int k = 1; k <= K; ++k) {
                    p *= rho_;
                    prod *= std::cos(p * t);
                    if (prod == 0.0) break;
                }
                return {prod, aifs_tail_bound(t, K)};
            }
            case MeasureKind::Atomic: {
                if (!even_)
                    throw std::invalid_argument(
                        "sigma_hat_real: atomic measure is not even; use sigma_hat");
                double s = 0.0;
                for (std::size_t i = 0; i < points_.size(); ++i)
                    s += weights_[i] * std::cos(t * points_[i]);
                return {s, 16.0 * std::numeric_limits<double>::epsilon() *
                               std::fabs(s)};
            }
            case MeasureKind::Density: {
                if (!std::isfinite(half_width_))
                    throw IntegrabilityError(
                        "sigma_hat: density with unbounded support has no "
                        "pointwise Fourier transform here");
                auto f = [&](double u) { return density_(u) * std::cos(t * u); };
                return {adaptive_quadrature(f, -half_width_, half_width_,
                                            budget.abs_tol),
                        budget.abs_tol};
            }
        }
        return {};
    }

    // Complex sigma_hat (one-sided atomic measures and general use).
    ComplexWithBound sigma_hat(double t, const TruncationBudget& budget) const {
        if (kind_ == MeasureKind::Atomic) {
            std::complex<double> s{0.0, 0.0};
            for (std::size_t i = 0; i < points_.size(); ++i)
                s += weights_[i] *
                     std::complex<double>(std::cos(t * points_[i]),
                                          std::sin(t * points_[i]));
            return {s, 16.0 * std::numeric_limits<double>::epsilon() * std::abs(s)};
        }
        if (kind_ == MeasureKind::Density && !even_) {
            if (!std::isfinite(half_width_))
                throw IntegrabilityError("sigma_hat: unbounded density support");
            auto fc = [&](double u) { return density_(u) * std::cos(t * u); };
            auto fs = [&](double u) { return density_(u) * std::sin(t * u); };
            return {{adaptive_quadrature(fc, -half_width_, half_width_, budget.abs_tol),
                     adaptive_quadrature(fs, -half_width_, half_width_, budget.abs_tol)},
                    2.0 * budget.abs_tol};
        }
        const ValueWithBound r = sigma_hat_real(t, budget);
        return {{r.value, 0.0}, r.bound};
    }

    // ---- integration against sigma -----------------------------------------

    // int f dsigma for real continuous f.  AIFS: depth-L cascade with a
    // Lipschitz-modulus error estimate; atomic: exact weighted sum; density:
    // adaptive quadrature (compact support only).
    ValueWithBound integrate(const std::function<double(double)>& f,
                             const TruncationBudget& budget) const {
        switch (kind_) {
            case MeasureKind::Aifs: {
                const double v = cascade_integrate<double>(f, budget.quadrature_level);
                const double lip = estimate_lipschitz(f);
                const double bound =
                    lip * std::pow(rho_, budget.quadrature_level) * support_radius();
                return {v, bound};
            }
            case MeasureKind::Atomic: {
                double s = 0.0, mag = 0.0;
                for (std::size_t i = 0; i < points_.size(); ++i) {
                    const double term = weights_[i] * f(points_[i]);
                    s += term;
                    mag += std::fabs(term);
                }
                return {s, 16.0 * std::numeric_limits<double>::epsilon() * mag};
            }
            case MeasureKind::Density: {
                if (!std::isfinite(half_width_))
                    throw IntegrabilityError(
                        "integrate: unbounded density support; use the "
                        "variance/covariance routines with tail handling");
                auto g = [&](double u) { return density_(u) * f(u); };
                return {adaptive_quadrature(g, -half_width_, half_width_,
                                            budget.abs_tol),
                        budget.abs_tol};
            }
        }
        return {};
    }

    // Complex-valued cascade/sum (oscillatory test integrands, coefficients).
    ComplexWithBound integrate_complex(
        const std::function<std::complex<double>(double)>& f,
        const TruncationBudget& budget) const {
        switch (kind_) {
            case MeasureKind::Aifs: {
                const std::complex<double> v =
                    cascade_integrate<std::complex<double>>(f, budget.quadrature_level);
                auto fre = [&](double u) { return f(u).real(); };
                auto fim = [&](double u) { return f(u).imag(); };
                const double lip =
                    std::max(estimate_lipschitz(fre), estimate_lipschitz(fim));
                return {v, 2.0 * lip * std::pow(rho_, budget.quadrature_level) *
                               support_radius()};
            }
            case MeasureKind::Atomic: {
                std::complex<double> s{0.0, 0.0};
                double mag = 0.0;
                for (std::size_t i = 0; i < points_.size(); ++i) {
                    const std::complex<double> term = weights_[i] * f(points_[i]);
                    s += term;
                    mag += std::abs(term);
                }
                return {s, 16.0 * std::numeric_limits<double>::epsilon() * mag};
            }
            case MeasureKind::Density: {
                if (!std::isfinite(half_width_))
                    throw IntegrabilityError("integrate_complex: unbounded support");
                auto fre = [&](double u) { return density_(u) * f(u).real(); };
                auto fim = [&](double u) { return density_(u) * f(u).imag(); };
                return {{adaptive_quadrature(fre, -half_width_, half_width_, budget.abs_tol),
                         adaptive_quadrature(fim, -half_width_, half_width_, budget.abs_tol)},
                        2.0 * budget.abs_tol};
            }
        }
        return {};
    }

    // K = int dsigma(u) / (1 + u^2), the admissibility constant.
    double admissibility_constant(const TruncationBudget& budget) const {
        if (kind_ == MeasureKind::Density && !std::isfinite(half_width_)) {
            const double U = 64.0;
            auto g = [&](double u) { return density_(u) / (1.0 + u * u); };
            double core = adaptive_quadrature(g, -U, U, budget.abs_tol);
            // both tails via the substitution u = 1/y
            auto tail = [&](double y) {
                const double u = 1.0 / y;
                return (density_(u) + density_(-u)) / (1.0 + u * u) / (y * y);
            };
            double t = adaptive_quadrature(tail, 1e-12, 1.0 / U, budget.abs_tol);
            return core + t;
        }
        auto f = [](double u) { return 1.0 / (1.0 + u * u); };
        return integrate(f, budget).value;
    }

    // Residual of the depth-L invariance identity
    //   int f dsigma = 1/2 [ int f(tau_+ x) dsigma + int f(tau_- x) dsigma ]
    // evaluated by the cascade at the same depth on both sides.
    double invariance_residual(const std::function<double(double)>& f,
                               const TruncationBudget& budget) const {
        if (kind_ != MeasureKind::Aifs)
            throw std::invalid_argument("invariance_residual: AIFS only");
        const double lhs = cascade_integrate<double>(f, budget.quadrature_level);
        auto fp = [&](double x) { return f(rho_ * (x + 1.0)); };
        auto fm = [&](double x) { return f(rho_ * (x - 1.0)); };
        const double rhs =
            0.5 * (cascade_integrate<double>(fp, budget.quadrature_level) +
                   cascade_integrate<double>(fm, budget.quadrature_level));
        return std::fabs(lhs - rhs);
    }

private:
    SpectralMeasure() = default;

    bool detect_even_atoms() const {
        std::vector<std::pair<double, double>> pos, neg;
        double zero_w = 0.0;
        for (std::size_t i = 0; i < points_.size(); ++i) {
            if (points_[i] > 0.0) pos.emplace_back(points_[i], weights_[i]);
            else if (points_[i] < 0.0) neg.emplace_back(-points_[i], weights_[i]);
            else zero_w += weights_[i];
        }
        (void)zero_w;
        std::sort(pos.begin(), pos.end());
        std::sort(neg.begin(), neg.end());
        if (pos.size() != neg.size()) return false;
        for (std::size_t i = 0; i < pos.size(); ++i)
            if (pos[i] != neg[i]) return false;
        return true;
    }

    template <class T, class F>
    T cascade_integrate(const F& f, int level) const {
        std::vector<double> pows(static_cast<std::size_t>(level));
        double p = 1.0;
        for (int k = 0; k < level; ++k) {
            p *= rho_;
            pows[static_cast<std::size_t>(k)] = p;
        }
        int spawn = 0;
        int threads = detail::cascade_threads();
        while ((1 << spawn) < threads && spawn < level - 4) ++spawn;
        const T total = detail::cascade_sum<T>(f, 0.0, pows, 0, spawn);
        return total * (1.0 / std::ldexp(1.0, level));
    }

    double estimate_lipschitz(const std::function<double(double)>& f) const {
        const double R = support_radius();
        const int n = 256;
        double lip = 0.0;
        double prev = f(-R);
        const double h = 2.0 * R / n;
        for (int i = 1; i <= n; ++i) {
            const double cur = f(-R + i * h);
            lip = std::max(lip, std::fabs(cur - prev) / h);
            prev = cur;
        }
        return 1.5 * lip;
    }

    MeasureKind kind_ = MeasureKind::Aifs;
    double rho_ = 0.25;
    bool even_ = true;
    std::vector<double> points_;
    std::vector<double> weights_;
    std::function<double(double)> density_;
    double half_width_ = 0.0;
    int p_exponent_ = 1;
    double envelope_ = 0.0;
};

// Fast repeated evaluation of the AIFS cosine product with a depth fixed in
// advance from the largest argument of the batch.
class AifsSigmaHat {
public:
    AifsSigmaHat(const SpectralMeasure& m, double max_abs_t, double tol)
        : rho_(m.ratio()) {
        if (m.kind() != MeasureKind::Aifs)
            throw std::invalid_argument("AifsSigmaHat: AIFS measure required");
        depth_ = std::max(4, m.aifs_depth_needed(max_abs_t, tol));
        if (depth_ > SpectralMeasure::kMaxProductDepth)
            throw BudgetError("AifsSigmaHat: depth cap exceeded",
                              m.aifs_tail_bound(max_abs_t, SpectralMeasure::kMaxProductDepth));
        pows_.resize(static_cast<std::size_t>(depth_));
        double p = 1.0;
        for (int k = 0; k < depth_; ++k) {
            p *= rho_;
            pows_[static_cast<std::size_t>(k)] = p;
        }
        tol_ = tol;
    }

    double operator()(double t) const {
        double prod = 1.0;
        for (double p : pows_) {
            prod *= std::cos(p * t);
            if (prod == 0.0) break;
        }
        return prod;
    }

    int depth() const { return depth_; }
    double tol() const { return tol_; }

private:
    double rho_;
    int depth_;
    double tol_;
    std::vector<double> pows_;
};

} // namespace sgp
