#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sgp/common.hpp"

namespace sgp {

// Sparse Hermite-chaos algebra on the white noise space.
//
// Basis elements H_alpha are indexed by finitely supported multi-indices
// alpha (1-based coordinates).  The Gaussian-space norm is
// ||H_alpha||^2 = alpha!, the Wick product acts as H_alpha <> H_beta =
// H_{alpha+beta}, and the Kondratiev norms weight |f_alpha|^2 by
// (2N)^{-k alpha} = prod_j (2j)^{-k alpha_j} (distribution side) or by
// (alpha!)^2 (2N)^{+k alpha} (test side).
//
// The algebra is exact on finite elements; truncation of infinite objects is
// the caller's responsibility, so all error control stays in the process
// layer.

// Probabilists' Hermite polynomial h_n, three-term recurrence
// h_{n+1}(x) = x h_n(x) - n h_{n-1}(x), h_0 = 1, h_1 = x.
inline double hermite_poly(int n, double x) {
    if (n < 0) throw std::invalid_argument("hermite_poly: n must be >= 0");
    if (n == 0) return 1.0;
    double hm = 1.0, h = x;
    for (int k = 1; k < n; ++k) {
        const double hn = x * h - k * hm;
        hm = h;
        h = hn;
    }
    return h;
}

class MultiIndex {
public:
    using Entry = std::pair<std::uint32_t, std::uint32_t>; // (coordinate, exponent)

    MultiIndex() = default;

    explicit MultiIndex(std::vector<Entry> entries) : entries_(std::move(entries)) {
        normalize();
    }

    // alpha = e_j (unit exponent at 1-based coordinate j)
    static MultiIndex unit(std::uint32_t j, std::uint32_t exponent = 1) {
        if (j == 0) throw std::invalid_argument("MultiIndex: coordinates are 1-based");
        if (exponent == 0) return MultiIndex();
        return MultiIndex({{j, exponent}});
    }

    const std::vector<Entry>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }

    std::uint32_t exponent(std::uint32_t j) const {
        for (const auto& e : entries_)
            if (e.first == j) return e.second;
        return 0;
    }

    std::uint64_t total_degree() const {
        std::uint64_t d = 0;
        for (const auto& e : entries_) d += e.second;
        return d;
    }

    std::uint32_t max_coordinate() const {
        return entries_.empty() ? 0 : entries_.back().first;
    }

    MultiIndex operator+(const MultiIndex& o) const {
        std::vector<Entry> merged;
        merged.reserve(entries_.size() + o.entries_.size());
        std::size_t i = 0, j = 0;
        while (i < entries_.size() && j < o.entries_.size()) {
            if (entries_[i].first == o.entries_[j].first) {
                merged.emplace_back(entries_[i].first,
                                    entries_[i].second + o.entries_[j].second);
                ++i;
                ++j;
            } else if (entries_[i].first < o.entries_[j].first) {
                merged.push_back(entries_[i++]);
            } else {
                merged.push_back(o.entries_[j++]);
            }
        }
        for (; i < entries_.size(); ++i) merged.push_back(entries_[i]);
        for (; j < o.entries_.size(); ++j) merged.push_back(o.entries_[j]);
        MultiIndex r;
        r.entries_ = std::move(merged);
        return r;
    }

    bool operator<(const MultiIndex& o) const { return entries_ < o.entries_; }
    bool operator==(const MultiIndex& o) const { return entries_ == o.entries_; }

    // alpha! = prod alpha_j!
    double factorial() const {
        double f = 1.0;
        for (const auto& e : entries_)
            for (std::uint32_t k = 2; k <= e.second; ++k) f *= k;
        return f;
    }

    // prod_j (2j)^{sign * k * alpha_j}
    double kondratiev_weight(int k, int sign) const {
        double w = 1.0;
        for (const auto& e : entries_)
            w *= std::pow(2.0 * e.first, static_cast<double>(sign) * k *
                                             static_cast<double>(e.second));
        return w;
    }

    std::string to_string() const {
        std::ostringstream os;
        bool first = true;
        for (const auto& e : entries_) {
            if (!first) os << ',';
            os << e.first << ':' << e.second;
            first = false;
        }
        return os.str();
    }

private:
    void normalize() {
        std::sort(entries_.begin(), entries_.end());
        std::vector<Entry> out;
        for (const auto& e : entries_) {
            if (e.second == 0) continue;
            if (!out.empty() && out.back().first == e.first)
                throw std::invalid_argument("MultiIndex: duplicate coordinate");
            out.push_back(e);
        }
        entries_ = std::move(out);
    }

    std::vector<Entry> entries_;
};

enum class NormSide { Test, Distribution };

struct KondratievNorm {
    int level = 2;
    NormSide side = NormSide::Distribution;
};

class ChaosElement {
public:
    using Terms = std::map<MultiIndex, double>;

    ChaosElement() = default;

    static ChaosElement zero() { return ChaosElement(); }

    static ChaosElement constant(double c) {
        ChaosElement e;
        if (c != 0.0) e.terms_[MultiIndex()] = c;
        return e;
    }

    static ChaosElement basis(const MultiIndex& alpha, double coeff = 1.0) {
        ChaosElement e;
        if (coeff != 0.0) e.terms_[alpha] = coeff;
        return e;
    }

    // sum_j c[j] H_{e_{j+1}}: array index j holds the coefficient of the
    // (j+1)-st Gaussian coordinate Z_j.
    static ChaosElement first_chaos(const std::vector<double>& c) {
        ChaosElement e;
        for (std::size_t j = 0; j < c.size(); ++j)
            if (c[j] != 0.0)
                e.terms_[MultiIndex::unit(static_cast<std::uint32_t>(j + 1))] = c[j];
        return e;
    }

    const Terms& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    std::size_t term_count() const { return terms_.size(); }

    double coeff(const MultiIndex& alpha) const {
        auto it = terms_.find(alpha);
        return it == terms_.end() ? 0.0 : it->second;
    }

    void add_term(const MultiIndex& alpha, double c) {
        if (c == 0.0) return;
        auto [it, inserted] = terms_.emplace(alpha, c);
        if (!inserted) {
            it->second += c;
            if (it->second == 0.0) terms_.erase(it);
        }
    }

    ChaosElement& operator+=(const ChaosElement& o) {
        for (const auto& [a, c] : o.terms_) add_term(a, c);
        return *this;
    }

    ChaosElement& operator-=(const ChaosElement& o) {
        for (const auto& [a, c] : o.terms_) add_term(a, -c);
        return *this;
    }

    ChaosElement& operator*=(double s) {
        if (s == 0.0) {
            terms_.clear();
            return *this;
        }
        for (auto& [a, c] : terms_) c *= s;
        return *this;
    }

    friend ChaosElement operator+(ChaosElement a, const ChaosElement& b) { return a += b; }
    friend ChaosElement operator-(ChaosElement a, const ChaosElement& b) { return a -= b; }
    friend ChaosElement operator*(ChaosElement a, double s) { return a *= s; }
    friend ChaosElement operator*(double s, ChaosElement a) { return a *= s; }

    std::uint64_t max_degree() const {
        std::uint64_t d = 0;
        for (const auto& [a, c] : terms_) d = std::max(d, a.total_degree());
        return d;
    }

    std::uint32_t max_coordinate() const {
        std::uint32_t m = 0;
        for (const auto& [a, c] : terms_) m = std::max(m, a.max_coordinate());
        return m;
    }

    // ||F||_W = sqrt( sum alpha! f_alpha^2 )
    double gaussian_norm() const {
        double s = 0.0;
        for (const auto& [a, c] : terms_) s += a.factorial() * c * c;
        return std::sqrt(s);
    }

    // Gaussian inner product <F,G>_W = sum alpha! f_alpha g_alpha
    double gaussian_inner(const ChaosElement& o) const {
        double s = 0.0;
        const ChaosElement& small = term_count() <= o.term_count() ? *this : o;
        const ChaosElement& big = term_count() <= o.term_count() ? o : *this;
        for (const auto& [a, c] : small.terms_) {
            const double d = big.coeff(a);
            if (d != 0.0) s += a.factorial() * c * d;
        }
        return s;
    }

    // Weighted l2 sums: distribution side sum |f|^2 (2N)^{-k alpha},
    // test side sum (alpha!)^2 |f|^2 (2N)^{+k alpha}.
    double kondratiev_norm_sq(const KondratievNorm& n) const {
        if (n.level < 0)
            throw std::invalid_argument("kondratiev_norm_sq: level must be >= 0");
        double s = 0.0;
        for (const auto& [a, c] : terms_) {
            if (n.side == NormSide::Distribution) {
                s += c * c * a.kondratiev_weight(n.level, -1);
            } else {
                const double fac = a.factorial();
                s += fac * fac * c * c * a.kondratiev_weight(n.level, +1);
            }
        }
        return s;
    }

    double kondratiev_norm(const KondratievNorm& n) const {
        return std::sqrt(kondratiev_norm_sq(n));
    }

    double kondratiev_norm(int level) const {
        return kondratiev_norm({level, NormSide::Distribution});
    }

    // Debug serialization: one line per term, `alpha=<j:e,...> coeff=<v>`.
    std::string debug_string() const {
        std::ostringstream os;
        os.precision(17);
        for (const auto& [a, c] : terms_)
            os << "alpha=" << a.to_string() << " coeff=" << c << '\n';
        return os.str();
    }

private:
    Terms terms_;
};

// Wick product: bilinear extension of H_alpha <> H_beta = H_{alpha+beta}.
// Reduces to scalar multiplication when either factor is constant.
inline ChaosElement wick_product(const ChaosElement& f, const ChaosElement& g) {
    ChaosElement out;
    for (const auto& [a, ca] : f.terms())
        for (const auto& [b, cb] : g.terms()) out.add_term(a + b, ca * cb);
    return out;
}

namespace detail {

// zeta(s) for real s >= 2 via Euler-Maclaurin; plenty for the Vage constant.
inline double riemann_zeta_em(double s) {
    const int J = 24;
    double sum = 0.0;
    for (int j = 1; j < J; ++j) sum += std::pow(j, -s);
    const double Jd = J;
    sum += std::pow(Jd, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(Jd, -s);
    sum += s * std::pow(Jd, -s - 1.0) / 12.0;
    sum -= s * (s + 1.0) * (s + 2.0) * std::pow(Jd, -s - 3.0) / 720.0;
    return sum;
}

} // namespace detail

// A(k-l) = ( sum_alpha (2N)^{(l-k) alpha} )^{1/2}
//        = ( prod_{j>=1} 1/(1 - (2j)^{l-k}) )^{1/2},
// by factoring the multi-index sum into independent geometric series.
// Evaluated through log A^2 = sum_{m>=1} 2^{-cm} zeta(cm)/m with c = k-l,
// which converges geometrically and certifies the tail.
inline double vage_constant(int k, int l) {
    const int c = k - l;
    if (c <= 1)
        throw std::invalid_argument(
            "vage_constant: requires k > l + 1 (multi-index sum diverges)");
    double log_a2 = 0.0;
    for (int m = 1; m <= 256; ++m) {
        const double term =
            std::pow(2.0, -static_cast<double>(c) * m) *
            detail::riemann_zeta_em(static_cast<double>(c) * m) / m;
        log_a2 += term;
        if (term < 1e-18 * (1.0 + std::fabs(log_a2))) break;
    }
    return std::exp(0.5 * log_a2);
}

} // namespace sgp
