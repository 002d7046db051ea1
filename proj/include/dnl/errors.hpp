#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dnl {

// Vector length does not match the domain.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Scalar root finding or quadrature failed to converge. For the inverse of a
// nonlinearity this usually means the supplied function is not surjective.
class NumericsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A p < 2 energy was differentiated at an exact kink with no smoothing
// (eps_reg = 0 and some edge difference exactly zero).
class SingularGradientError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Resolvent solver ran out of iterations; carries the best iterate so the
// caller can inspect or restart.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, std::vector<double> best_w, double residual, int iterations)
        : std::runtime_error(what),
          best_iterate(std::move(best_w)),
          residual(residual),
          iterations(iterations) {}

    std::vector<double> best_iterate;
    double residual = 0.0;
    int iterations = 0;
};

}  // namespace dnl
