#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include "sgp/common.hpp"

namespace sgp {

// 1-D quadrature kit: fixed Gauss-Legendre panels for entire integrands with
// known derivative scale, and an adaptive Gauss-Kronrod (G7,K15) driver for
// everything else.

// Gauss-Legendre nodes/weights on [-1,1].
inline const double* gl_nodes(int n) {
    static const double n4[] = {-0.8611363115940526, -0.3399810435848563,
                                0.3399810435848563, 0.8611363115940526};
    static const double n12[] = {
        -0.9815606342467192, -0.9041172563704749, -0.7699026741943047,
        -0.5873179542866175, -0.3678314989981802, -0.1252334085114689,
        0.1252334085114689,  0.3678314989981802,  0.5873179542866175,
        0.7699026741943047,  0.9041172563704749,  0.9815606342467192};
    if (n == 4) return n4;
    if (n == 12) return n12;
    throw std::invalid_argument("gl_nodes: only orders 4 and 12 are tabulated");
}

inline const double* gl_weights(int n) {
    static const double w4[] = {0.3478548451374538, 0.6521451548625461,
                                0.6521451548625461, 0.3478548451374538};
    static const double w12[] = {
        0.0471753363865118, 0.1069393259953184, 0.1600783285433462,
        0.2031674267230659, 0.2334925365383548, 0.2491470458134028,
        0.2491470458134028, 0.2334925365383548, 0.2031674267230659,
        0.1600783285433462, 0.1069393259953184, 0.0471753363865118};
    if (n == 4) return w4;
    if (n == 12) return w12;
    throw std::invalid_argument("gl_weights: only orders 4 and 12 are tabulated");
}

// Fixed-order Gauss-Legendre on [a,b].
template <class F>
double gauss_legendre(const F& f, double a, double b, int order) {
    const double* xs = gl_nodes(order);
    const double* ws = gl_weights(order);
    const double mid = 0.5 * (a + b);
    const double hw = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < order; ++i) s += ws[i] * f(mid + hw * xs[i]);
    return s * hw;
}

// Composite Gauss-Legendre with panels no wider than max_panel.  Meant for
// entire integrands whose derivatives are bounded on the panel scale.
template <class F>
double gauss_legendre_composite(const F& f, double a, double b,
                                double max_panel, int order = 12) {
    if (a == b) return 0.0;
    double sign = 1.0;
    if (b < a) { std::swap(a, b); sign = -1.0; }
    const int n = std::max(1, static_cast<int>(std::ceil((b - a) / max_panel)));
    const double h = (b - a) / n;
    double s = 0.0;
    for (int i = 0; i < n; ++i)
        s += gauss_legendre(f, a + i * h, a + (i + 1) * h, order);
    return sign * s;
}

// (G7,K15) pair on [a,b]; err is the usual scaled |G7-K15| estimate.
template <class F>
double gauss_kronrod_15(const F& f, double a, double b, double& err) {
    static const double xk[8] = {
        0.0000000000000000, 0.2077849550078985, 0.4058451513773972,
        0.5860872354676911, 0.7415311855993944, 0.8648644233597691,
        0.9491079123427585, 0.9914553711208126};
    static const double wk[8] = {
        0.2094821410847278, 0.2044329400752989, 0.1903505780647854,
        0.1690047266392679, 0.1406532597155259, 0.1047900103222502,
        0.0630920926299785, 0.0229353220105292};
    static const double wg[4] = {0.4179591836734694, 0.3818300505051189,
                                 0.2797053914892767, 0.1294849661688697};
    const double mid = 0.5 * (a + b);
    const double hw = 0.5 * (b - a);
    const double f0 = f(mid);
    double k15 = wk[0] * f0;
    double g7 = wg[0] * f0;
    for (int i = 1; i < 8; ++i) {
        const double dx = hw * xk[i];
        const double fs = f(mid + dx) + f(mid - dx);
        k15 += wk[i] * fs;
        if (i % 2 == 0) g7 += wg[i / 2] * fs;
    }
    k15 *= hw;
    g7 *= hw;
    const double d = std::fabs(k15 - g7);
    err = std::min(d, 200.0 * d * std::sqrt(200.0 * d));
    return k15;
}

// Adaptive bisection driver around the (G7,K15) pair.
template <class F>
double adaptive_quadrature(const F& f, double a, double b, double abs_tol,
                           int max_depth = 48) {
    struct Seg { double a, b, tol; int depth; };
    double total = 0.0;
    std::vector<Seg> stack{{a, b, abs_tol, 0}};
    double worst = 0.0;
    while (!stack.empty()) {
        Seg s = stack.back();
        stack.pop_back();
        double err = 0.0;
        const double v = gauss_kronrod_15(f, s.a, s.b, err);
        if (err <= s.tol || s.depth >= max_depth) {
            total += v;
            if (err > s.tol) worst = std::max(worst, err);
            continue;
        }
        const double m = 0.5 * (s.a + s.b);
        stack.push_back({s.a, m, 0.5 * s.tol, s.depth + 1});
        stack.push_back({m, s.b, 0.5 * s.tol, s.depth + 1});
    }
    if (worst > 0.0)
        throw BudgetError("adaptive_quadrature: tolerance not met", worst);
    return total;
}

// Gauss-Hermite rule for int e^{-x^2} g(x) dx ~= sum w_i g(x_i).
// Nodes by Newton iteration on the physicists' Hermite recurrence.
struct GaussHermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    // E[g(Z)] for Z ~ N(0, variance)
    template <class G>
    double gaussian_mean(const G& g, double variance) const {
        const double s = std::sqrt(2.0 * variance);
        double acc = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i)
            acc += weights[i] * g(s * nodes[i]);
        return acc / std::sqrt(kPi);
    }
};

inline GaussHermiteRule gauss_hermite_rule(int n) {
    if (n < 1) throw std::invalid_argument("gauss_hermite_rule: n must be >= 1");
    GaussHermiteRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    // physicists' H_k via recurrence; roots found from interlacing guesses
    // orthonormal recurrence keeps magnitudes tame:
    // htilde_{k+1} = x sqrt(2/(k+1)) htilde_k - sqrt(k/(k+1)) htilde_{k-1}
    auto hermite_pair = [n](double x, double& h, double& hprev) {
        double hm = 0.0;
        double hc = 1.0 / std::pow(kPi, 0.25);
        for (int k = 0; k < n; ++k) {
            const double hn =
                x * std::sqrt(2.0 / (k + 1)) * hc - std::sqrt(static_cast<double>(k) / (k + 1)) * hm;
            hm = hc;
            hc = hn;
        }
        h = hc;
        hprev = hm;
    };
    const int half = (n + 1) / 2;
    double x = 0.0;
    for (int i = 0; i < half; ++i) {
        // Stroud-Secrest style initial guesses, largest root first
        if (i == 0) x = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
        else if (i == 1) x -= 1.14 * std::pow(n, 0.426) / x;
        else if (i == 2) x = 1.86 * x - 0.86 * r.nodes[n - 1];
        else if (i == 3) x = 1.91 * x - 0.91 * r.nodes[n - 2];
        else x = 2.0 * x - r.nodes[n - i + 1];
        double h = 0.0, hp = 0.0;
        for (int it = 0; it < 64; ++it) {
            hermite_pair(x, h, hp);
            const double deriv = std::sqrt(2.0 * n) * hp; // d/dx htilde_n
            const double dx = h / deriv;
            x -= dx;
            if (std::fabs(dx) < 1e-15 * (1.0 + std::fabs(x))) break;
        }
        hermite_pair(x, h, hp);
        r.nodes[n - 1 - i] = x;
        r.nodes[i] = -x;
        const double w = 2.0 / (hp * hp * 2.0 * n); // = 2/(htilde'(x))^2 * n-scaling
        r.weights[n - 1 - i] = w;
        r.weights[i] = w;
    }
    if (n % 2 == 1) r.nodes[half - 1] = 0.0;
    return r;
}

// Trapezoid-free helper: integral of |f| estimated on a sample grid, used
// for cheap L1 bounds of test functions.
template <class F>
double sampled_l1_norm(const F& f, double a, double b, int n = 4001) {
    double s = 0.0;
    const double h = (b - a) / (n - 1);
    for (int i = 0; i < n; ++i) {
        const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
        s += w * std::fabs(f(a + i * h));
    }
    return s * h;
}

} // namespace sgp
