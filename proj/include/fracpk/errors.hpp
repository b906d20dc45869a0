#pragma once
#include <stdexcept>
#include <string>

namespace fracpk {

// Bad user-supplied parameters or malformed input files.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Numerical machinery gave up (quadrature non-convergence, Cholesky failure,
// overflow guards).
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Degenerate data fed to an estimator (zero quadratic variation, Hhat >= 1, ...).
class EstimationError : public std::runtime_error {
public:
    explicit EstimationError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace fracpk
