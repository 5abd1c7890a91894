#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace sgp {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 6.28318530717958647692;

// Certified-evaluation budget shared by all measure operations.
//   product_depth    : starting depth K of the infinite cosine product
//                      (auto-raised until the tail bound meets abs_tol)
//   quadrature_level : cascade depth L for singular (AIFS) integration,
//                      2^L leaf points
//   abs_tol          : absolute tolerance targeted by every evaluation
struct TruncationBudget {
    int product_depth = 24;
    int quadrature_level = 20;
    double abs_tol = 1e-10;

    void validate() const {
        if (product_depth < 1 || quadrature_level < 1)
            throw std::invalid_argument("TruncationBudget: depths must be >= 1");
        if (!(abs_tol > 0.0))
            throw std::invalid_argument("TruncationBudget: abs_tol must be > 0");
    }
};

// A value together with a certified (or estimated) absolute error bound.
struct ValueWithBound {
    double value = 0.0;
    double bound = 0.0;
};

// Thrown when a requested tolerance cannot be met within the resource cap.
// Carries the best bound that was achieved.
class BudgetError : public std::runtime_error {
public:
    BudgetError(const std::string& what, double achieved)
        : std::runtime_error(what), best_bound(achieved) {}
    double best_bound;
};

// Thrown when an integral is requested against a measure that cannot
// support it (unbounded support with non-decaying integrand, etc).
class IntegrabilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Thrown when a mesh-refinement loop fails to reach its Cauchy tolerance.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, std::string trace_)
        : std::runtime_error(what), trace(std::move(trace_)) {}
    std::string trace;
};

} // namespace sgp
