#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "sgp/chaos.hpp"
#include "sgp/common.hpp"
#include "sgp/covariance.hpp"
#include "sgp/processes.hpp"
#include "sgp/quadrature.hpp"

namespace sgp {

// Riemann-sum Wick-Ito integration against X_sigma:
//
//   int_a^b Y(t) <> W_sigma(t) dt = lim_{|mesh|->0} sum_k Y(t_k) <> (X(t_{k+1}) - X(t_k)),
//
// with left-endpoint evaluation and convergence measured in a Kondratiev
// norm ||.||_{-p}.  The refinement loop halves dyadic partitions until
// successive sums are Cauchy below tolerance.  A Richardson-combined pair
// of left sums (2 S_{h/2} - S_h; same limit, second-order error) is
// available for consumers that need tight values at moderate meshes.
//
// The Ito formula with the r' correction is verified two ways: exactly in
// chaos coefficients for f = x^2, x^3 (where the Gaussian product-to-Wick
// conversion is closed: X^2 = X^{<>2} + v, X^3 = X^{<>3} + 3 v X with
// v(s) the truncated variance), and in expectation by Monte Carlo for
// general C^2 f with a Gauss-Hermite heat-flow oracle for E f(X(s)),
// X(s) ~ N(0, r(s)).

struct Partition {
    double a = 0.0, b = 1.0;
    std::vector<double> nodes;

    static Partition uniform(double a, double b, std::size_t segments) {
        if (!(b > a) || segments < 1)
            throw std::invalid_argument("Partition::uniform: bad arguments");
        Partition p;
        p.a = a;
        p.b = b;
        p.nodes.resize(segments + 1);
        for (std::size_t i = 0; i <= segments; ++i)
            p.nodes[i] = a + (b - a) * static_cast<double>(i) / segments;
        p.nodes.back() = b;
        return p;
    }

    double mesh() const {
        double m = 0.0;
        for (std::size_t i = 1; i < nodes.size(); ++i)
            m = std::max(m, nodes[i] - nodes[i - 1]);
        return m;
    }

    void validate() const {
        if (nodes.size() < 2 || nodes.front() != a || nodes.back() != b)
            throw std::invalid_argument("Partition: endpoints do not match");
        for (std::size_t i = 1; i < nodes.size(); ++i)
            if (!(nodes[i] > nodes[i - 1]))
                throw std::invalid_argument("Partition: nodes must increase");
    }
};

// An S_{-1}-valued integrand sampled on a grid, with its continuity modulus
// in ||.||_{-p} estimated from the samples.
struct IntegrandPath {
    std::vector<double> times;
    std::vector<ChaosElement> elements;
    int level_p = 2;
    double continuity_modulus = std::numeric_limits<double>::quiet_NaN();

    const ChaosElement& at_time(double t) const {
        for (std::size_t i = 0; i < times.size(); ++i)
            if (std::fabs(times[i] - t) <= 1e-12 * std::max(1.0, std::fabs(t)))
                return elements[i];
        throw std::invalid_argument("IntegrandPath: time not sampled");
    }

    void estimate_modulus() {
        double m = 0.0;
        for (std::size_t i = 1; i < times.size(); ++i) {
            const ChaosElement d = elements[i] - elements[i - 1];
            m = std::max(m, d.kondratiev_norm(level_p) / (times[i] - times[i - 1]));
        }
        continuity_modulus = m;
    }

    static IntegrandPath from_coefficient_path(const CoefficientPath& x, int p = 2) {
        IntegrandPath y;
        y.times = x.times;
        y.level_p = p;
        y.elements.reserve(x.times.size());
        for (std::size_t i = 0; i < x.times.size(); ++i)
            y.elements.push_back(x.element_at(i));
        y.estimate_modulus();
        return y;
    }
};

// Exact sparse Riemann sum sum_k Y(t_k) <> (X(t_{k+1}) - X(t_k)).
// Y and X must be sampled at every partition node (mismatched contexts are
// rejected by the node lookups).
inline ChaosElement wick_riemann_sum(const IntegrandPath& y,
                                     const CoefficientPath& x,
                                     const Partition& part) {
    part.validate();
    ChaosElement acc;
    for (std::size_t k = 0; k + 1 < part.nodes.size(); ++k) {
        const ChaosElement& yk = y.at_time(part.nodes[k]);
        const std::size_t i0 = x.time_index(part.nodes[k]);
        const std::size_t i1 = x.time_index(part.nodes[k + 1]);
        std::vector<double> dc(x.n_basis);
        for (std::size_t n = 0; n < x.n_basis; ++n)
            dc[n] = x.coeff(i1, n) - x.coeff(i0, n);
        acc += wick_product(yk, ChaosElement::first_chaos(dc));
    }
    return acc;
}

struct WickItoOptions {
    double tol = 1e-6;
    int norm_level = 2;      // p of the Cauchy norm ||.||_{-p}
    int min_level = 4;       // first dyadic refinement, 2^min_level segments
    bool richardson = false; // converge/return 2 S_{h/2} - S_h
};

struct WickItoResult {
    ChaosElement value;
    struct Step {
        double mesh;
        double diff_norm; // Cauchy difference at this refinement
    };
    std::vector<Step> steps;
    double fitted_order = 0.0; // slope of log diff vs log mesh
    bool converged = false;
    int levels_used = 0;

    // convergence table `mesh,norm_diff,order` with the per-step observed
    // order (log ratio of successive differences)
    std::string trace() const {
        std::ostringstream os;
        os << "mesh,norm_diff,order\n";
        os.precision(12);
        for (std::size_t i = 0; i < steps.size(); ++i) {
            os << steps[i].mesh << ',' << steps[i].diff_norm << ',';
            if (i > 0 && steps[i].diff_norm > 0.0 && steps[i - 1].diff_norm > 0.0)
                os << std::log2(steps[i - 1].diff_norm / steps[i].diff_norm);
            os << '\n';
        }
        return os.str();
    }
};

namespace detail {

inline bool is_power_of_two(std::size_t v) { return v && !(v & (v - 1)); }

// Shared dyadic refinement driver.  sum_at(stride) returns the left-endpoint
// Wick-Riemann sum over every stride-th node of the fine grid.
template <class SumFn>
WickItoResult refine_loop(const SumFn& sum_at, std::size_t segments, double span,
                          const WickItoOptions& opt) {
    int max_level = 0;
    while ((std::size_t{1} << max_level) < segments) ++max_level;

    WickItoResult res;
    ChaosElement prev, prev_extrap;
    bool have_prev = false;

    for (int level = std::min(opt.min_level, max_level); level <= max_level;
         ++level) {
        const std::size_t stride = segments >> level;
        ChaosElement cur = sum_at(stride);
        res.levels_used = level;
        if (have_prev) {
            ChaosElement extrap = 2.0 * cur - prev;
            const double mesh = span / static_cast<double>(std::size_t{1} << level);
            const double diff = opt.richardson && !prev_extrap.is_zero()
                                    ? (extrap - prev_extrap).kondratiev_norm(opt.norm_level)
                                    : (cur - prev).kondratiev_norm(opt.norm_level);
            res.steps.push_back({mesh, diff});
            const bool enough = opt.richardson ? !prev_extrap.is_zero() : true;
            prev_extrap = extrap;
            if (enough && diff < opt.tol) {
                res.value = opt.richardson ? extrap : cur;
                res.converged = true;
                break;
            }
        }
        prev = cur;
        have_prev = true;
        if (level == max_level)
            res.value = opt.richardson && !prev_extrap.is_zero() ? prev_extrap : cur;
    }

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t m = 0;
    for (const auto& s : res.steps) {
        if (s.diff_norm <= 0.0) continue;
        const double lx = std::log(s.mesh), ly = std::log(s.diff_norm);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++m;
    }
    if (m >= 2) res.fitted_order = (m * sxy - sx * sy) / (m * sxx - sx * sx);

    if (!res.converged)
        throw ConvergenceError(
            "wick_ito_integral: refinement cap hit before Cauchy tolerance",
            res.trace());
    return res;
}

} // namespace detail

// General integrand form: mesh-refined Wick-Ito integral of an arbitrary
// sampled Y.  y_at(i) returns Y at fine node i; the fine grid of x must be
// uniform dyadic (2^L segments).  Accumulation is keyed by the multi-indices
// of Y and dense along the X basis.
inline WickItoResult wick_ito_integral(
    const std::function<const ChaosElement&(std::size_t)>& y_at,
    const CoefficientPath& x_fine, const WickItoOptions& opt = {}) {
    const std::size_t segments = x_fine.times.size() - 1;
    if (!detail::is_power_of_two(segments))
        throw std::invalid_argument(
            "wick_ito_integral: fine grid must have 2^L segments");
    const std::size_t N = x_fine.n_basis;
    const std::size_t last = segments;

    auto sum_at = [&](std::size_t stride) {
        std::map<MultiIndex, std::size_t> row_of;
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i + stride <= last; i += stride) {
            const ChaosElement& yk = y_at(i);
            const double* c0 = x_fine.row(i);
            const double* c1 = x_fine.row(i + stride);
            for (const auto& [alpha, coef] : yk.terms()) {
                auto [it, inserted] = row_of.emplace(alpha, rows.size());
                if (inserted) rows.emplace_back(N, 0.0);
                std::vector<double>& g = rows[it->second];
                for (std::size_t n = 0; n < N; ++n) g[n] += coef * (c1[n] - c0[n]);
            }
        }
        ChaosElement out;
        for (const auto& [alpha, r] : row_of) {
            const std::vector<double>& g = rows[r];
            for (std::size_t n = 0; n < N; ++n)
                if (g[n] != 0.0)
                    out.add_term(
                        alpha + MultiIndex::unit(static_cast<std::uint32_t>(n + 1)),
                        g[n]);
        }
        return out;
    };

    return detail::refine_loop(sum_at, segments,
                               x_fine.times.back() - x_fine.times.front(), opt);
}

// Fast path for integrands that are quadratic polynomials in X:
//   Y(s) = a0(s) + a1(s) X(s) + a2(s) X(s)^{<>2}.
// Covers Y = X, Y = f'(X) for f = x^2, x^3.  Accumulators stay dense per
// chaos degree, so a step costs O(N^2 (1 + N a2-active)) flat multiply-adds.
struct PolynomialIntegrand {
    std::function<double(std::size_t)> a0; // may be null (zero)
    std::function<double(std::size_t)> a1;
    std::function<double(std::size_t)> a2;
};

inline WickItoResult wick_ito_integral_poly(const PolynomialIntegrand& y,
                                            const CoefficientPath& x_fine,
                                            const WickItoOptions& opt = {}) {
    const std::size_t segments = x_fine.times.size() - 1;
    if (!detail::is_power_of_two(segments))
        throw std::invalid_argument(
            "wick_ito_integral_poly: fine grid must have 2^L segments");
    const std::size_t N = x_fine.n_basis;
    const std::size_t last = segments;
    const bool has0 = static_cast<bool>(y.a0);
    const bool has1 = static_cast<bool>(y.a1);
    const bool has2 = static_cast<bool>(y.a2);

    auto sum_at = [&](std::size_t stride) {
        std::vector<double> d1(has0 ? N : 0, 0.0);
        std::vector<double> d2(has1 ? N * N : 0, 0.0);
        std::vector<double> d3(has2 ? (N * (N + 1) / 2) * N : 0, 0.0);
        std::vector<double> dc(N);

        for (std::size_t i = 0; i + stride <= last; i += stride) {
            const double* c0 = x_fine.row(i);
            const double* c1 = x_fine.row(i + stride);
            for (std::size_t n = 0; n < N; ++n) dc[n] = c1[n] - c0[n];
            if (has0) {
                const double a = y.a0(i);
                if (a != 0.0)
                    for (std::size_t n = 0; n < N; ++n) d1[n] += a * dc[n];
            }
            if (has1) {
                const double a = y.a1(i);
                if (a != 0.0)
                    for (std::size_t m = 0; m < N; ++m) {
                        const double s = a * c0[m];
                        if (s == 0.0) continue;
                        double* row = &d2[m * N];
                        for (std::size_t n = 0; n < N; ++n) row[n] += s * dc[n];
                    }
            }
            if (has2) {
                const double a = y.a2(i);
                if (a != 0.0) {
                    std::size_t pair = 0;
                    for (std::size_t p = 0; p < N; ++p) {
                        for (std::size_t q = p; q < N; ++q, ++pair) {
                            const double mult = (p == q) ? 1.0 : 2.0;
                            const double s = a * mult * c0[p] * c0[q];
                            if (s == 0.0) continue;
                            double* row = &d3[pair * N];
                            for (std::size_t n = 0; n < N; ++n) row[n] += s * dc[n];
                        }
                    }
                }
            }
        }

        ChaosElement out;
        auto unit = [](std::size_t j) {
            return MultiIndex::unit(static_cast<std::uint32_t>(j + 1));
        };
        if (has0)
            for (std::size_t n = 0; n < N; ++n)
                if (d1[n] != 0.0) out.add_term(unit(n), d1[n]);
        if (has1)
            for (std::size_t m = 0; m < N; ++m)
                for (std::size_t n = 0; n < N; ++n)
                    if (d2[m * N + n] != 0.0)
                        out.add_term(unit(m) + unit(n), d2[m * N + n]);
        if (has2) {
            std::size_t pair = 0;
            for (std::size_t p = 0; p < N; ++p)
                for (std::size_t q = p; q < N; ++q, ++pair) {
                    const double* row = &d3[pair * N];
                    for (std::size_t n = 0; n < N; ++n)
                        if (row[n] != 0.0)
                            out.add_term(unit(p) + unit(q) + unit(n), row[n]);
                }
        }
        return out;
    };

    return detail::refine_loop(sum_at, segments,
                               x_fine.times.back() - x_fine.times.front(), opt);
}

// ---- Ito formula checks ----------------------------------------------------

// X^{<>2} for a first-chaos coefficient row.
inline ChaosElement wick_square(const double* c, std::size_t n_basis) {
    ChaosElement e;
    for (std::size_t i = 0; i < n_basis; ++i) {
        if (c[i] == 0.0) continue;
        for (std::size_t j = i; j < n_basis; ++j) {
            const double v = (i == j) ? c[i] * c[i] : 2.0 * c[i] * c[j];
            if (v != 0.0)
                e.add_term(MultiIndex::unit(static_cast<std::uint32_t>(i + 1)) +
                               MultiIndex::unit(static_cast<std::uint32_t>(j + 1)),
                           v);
        }
    }
    return e;
}

// X^{<>3} for a first-chaos coefficient row (multinomial expansion).
inline ChaosElement wick_cube(const double* c, std::size_t n_basis) {
    ChaosElement e;
    for (std::size_t i = 0; i < n_basis; ++i) {
        if (c[i] == 0.0) continue;
        for (std::size_t j = i; j < n_basis; ++j) {
            if (c[j] == 0.0) continue;
            for (std::size_t k = j; k < n_basis; ++k) {
                double mult = 6.0; // three distinct coordinates
                if (i == j && j == k) mult = 1.0;
                else if (i == j || j == k) mult = 3.0;
                const double v = mult * c[i] * c[j] * c[k];
                if (v != 0.0)
                    e.add_term(MultiIndex::unit(static_cast<std::uint32_t>(i + 1)) +
                                   MultiIndex::unit(static_cast<std::uint32_t>(j + 1)) +
                                   MultiIndex::unit(static_cast<std::uint32_t>(k + 1)),
                               v);
            }
        }
    }
    return e;
}

// Composite Simpson over a uniform grid of sampled values.
inline double simpson_uniform(const std::vector<double>& v, double h) {
    const std::size_t n = v.size();
    if (n < 3 || n % 2 == 0)
        throw std::invalid_argument("simpson_uniform: need odd sample count");
    double s = v.front() + v.back();
    for (std::size_t i = 1; i + 1 < n; ++i) s += v[i] * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

enum class ItoPoly { Square, Cube };

struct ItoPolyReport {
    double residual = 0.0;   // || lhs - rhs ||_{-2}
    double lhs_norm = 0.0;
    double correction = 0.0; // scalar drift (Square) / its Gaussian norm (Cube)
    WickItoResult integral;

    std::string text() const {
        std::ostringstream os;
        os.precision(12);
        os << "residual_norm2: " << residual << '\n'
           << "lhs_norm2: " << lhs_norm << '\n'
           << "drift_term: " << correction << '\n'
           << "integral_levels: " << integral.levels_used << '\n'
           << "integral_fitted_order: " << integral.fitted_order << '\n';
        return os.str();
    }
};

// Chaos-exact check of
//   f(X(t)) = f(X(t0)) + int f'(X) <> W ds + (1/2) int f''(X) r'(s) ds
// for f = x^2, x^3 on a dyadic fine grid covering [t0, t].  The left side
// converts Gaussian products to Wick form through the truncated variance
// v(s) = sum_n c_n(s)^2; the right side uses the mesh-refined Wick integral
// (Richardson pair) and Simpson quadrature of the independently computed
// variance rate.
inline ItoPolyReport ito_formula_check_polynomial(ItoPoly f,
                                                  const CoefficientPath& x_fine,
                                                  const CovarianceKernel& ck,
                                                  WickItoOptions opt = {}) {
    const std::size_t T = x_fine.times.size();
    const std::size_t N = x_fine.n_basis;
    const std::size_t last = T - 1;
    const double h = (x_fine.times.back() - x_fine.times.front()) /
                     static_cast<double>(last);

    std::vector<double> vr(T); // r'(s) on the fine grid
    for (std::size_t i = 0; i < T; ++i) vr[i] = ck.variance_rate(x_fine.times[i]);

    ItoPolyReport rep;
    opt.richardson = true;

    if (f == ItoPoly::Square) {
        ChaosElement lhs =
            wick_square(x_fine.row(last), N) - wick_square(x_fine.row(0), N);
        lhs += ChaosElement::constant(x_fine.sum_sq(last) - x_fine.sum_sq(0));

        PolynomialIntegrand y;
        y.a1 = [](std::size_t) { return 2.0; };
        rep.integral = wick_ito_integral_poly(y, x_fine, opt);
        rep.correction = simpson_uniform(vr, h);
        ChaosElement rhs = rep.integral.value + ChaosElement::constant(rep.correction);

        rep.lhs_norm = lhs.kondratiev_norm(2);
        rep.residual = (lhs - rhs).kondratiev_norm(2);
        return rep;
    }

    ChaosElement lhs = wick_cube(x_fine.row(last), N) - wick_cube(x_fine.row(0), N);
    lhs += 3.0 * x_fine.sum_sq(last) * x_fine.element_at(last);
    lhs -= 3.0 * x_fine.sum_sq(0) * x_fine.element_at(0);

    PolynomialIntegrand y;
    y.a0 = [&x_fine](std::size_t i) { return 3.0 * x_fine.sum_sq(i); };
    y.a2 = [](std::size_t) { return 3.0; };
    rep.integral = wick_ito_integral_poly(y, x_fine, opt);

    // (1/2) int 6 X(s) r'(s) ds = 3 int X(s) r'(s) ds, a first-chaos element
    std::vector<double> corr(N, 0.0);
    std::vector<double> scratch(T);
    for (std::size_t n = 0; n < N; ++n) {
        for (std::size_t i = 0; i < T; ++i) scratch[i] = x_fine.coeff(i, n) * vr[i];
        corr[n] = 3.0 * simpson_uniform(scratch, h);
    }
    const ChaosElement corr_elem = ChaosElement::first_chaos(corr);
    rep.correction = corr_elem.gaussian_norm();

    ChaosElement rhs = rep.integral.value + corr_elem;
    rep.lhs_norm = lhs.kondratiev_norm(2);
    rep.residual = (lhs - rhs).kondratiev_norm(2);
    return rep;
}

struct ItoMcReport {
    double z_score = 0.0;
    double mean_difference = 0.0; // mean of the per-path defect D_m
    double std_error = 0.0;
    double mc_lhs = 0.0;     // E f(X(t)) by Monte Carlo
    double oracle_lhs = 0.0; // E f(X(t)) by Gauss-Hermite with variance r(t)
};

// Monte Carlo check of the Ito formula in expectation: for each path m,
//   D_m = f(X_m(t)) - f(X_m(t0)) - (1/2) int_{t0}^{t} f''(X_m(s)) r'(s) ds,
// the Wick integral having zero mean; reports z = mean(D)/se(D).  The
// heat-flow identity d/ds E f(X(s)) = (1/2) r'(s) E f''(X(s)) evaluated by
// Gauss-Hermite supplies the analytic value of E f(X(t)) as a cross-check.
inline ItoMcReport ito_formula_check_mc(const std::function<double(double)>& f,
                                        const std::function<double(double)>& f_second,
                                        const CoefficientPath& x,
                                        const PathEnsemble& ensemble,
                                        const CovarianceKernel& ck) {
    const std::size_t T = x.times.size();
    if (T < 3 || T % 2 == 0)
        throw std::invalid_argument("ito_formula_check_mc: need an odd grid");
    const double h =
        (x.times.back() - x.times.front()) / static_cast<double>(T - 1);
    for (std::size_t i = 1; i < T; ++i)
        if (std::fabs(x.times[i] - x.times[i - 1] - h) > 1e-9 * std::max(1.0, h))
            throw std::invalid_argument("ito_formula_check_mc: grid must be uniform");

    std::vector<double> vr(T);
    for (std::size_t i = 0; i < T; ++i) vr[i] = ck.variance_rate(x.times[i]);

    const std::size_t M = ensemble.n_paths;
    double sum_d = 0.0, sum_d2 = 0.0, sum_f = 0.0;
    std::vector<double> scratch(T);
    for (std::size_t m = 0; m < M; ++m) {
        for (std::size_t i = 0; i < T; ++i)
            scratch[i] = f_second(ensemble.value(m, i)) * vr[i];
        const double corr = 0.5 * simpson_uniform(scratch, h);
        const double ft = f(ensemble.value(m, T - 1));
        const double d = ft - f(ensemble.value(m, 0)) - corr;
        sum_f += ft;
        sum_d += d;
        sum_d2 += d * d;
    }

    ItoMcReport rep;
    rep.mean_difference = sum_d / static_cast<double>(M);
    const double var_d = (sum_d2 - sum_d * sum_d / static_cast<double>(M)) /
                         static_cast<double>(M - 1);
    rep.std_error = std::sqrt(var_d / static_cast<double>(M));
    rep.z_score = rep.std_error > 0.0 ? rep.mean_difference / rep.std_error : 0.0;
    rep.mc_lhs = sum_f / static_cast<double>(M);

    const GaussHermiteRule gh = gauss_hermite_rule(48);
    rep.oracle_lhs = gh.gaussian_mean(f, ck.variance(x.times.back()));
    return rep;
}

} // namespace sgp
