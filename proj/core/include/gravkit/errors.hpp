#pragma once

#include <stdexcept>
#include <string>

namespace gravkit {

// Configuration / input problems. The CLI maps these to exit code 1.
struct validation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct configuration_error : validation_error {
    using validation_error::validation_error;
};

// Numerical failures inside an engine. CLI exit code 2.
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Newtonian self-integral of a point mass diverges.
struct divergence_error : numerical_error {
    using numerical_error::numerical_error;
};

// Series or iteration failed to converge; carries the partial result.
struct convergence_error : numerical_error {
    convergence_error(const std::string& msg, double partial)
        : numerical_error(msg), partial_sum(partial) {}
    double partial_sum;
};

// Step size too large for a stochastic or moment integrator.
struct stability_error : numerical_error {
    using numerical_error::numerical_error;
};

// Spectral tail indicates the grid no longer resolves the state.
struct resolution_error : numerical_error {
    using numerical_error::numerical_error;
};

// Kernel lacks the analytic or tabulated data an engine needs.
struct unsupported_kernel_error : numerical_error {
    using numerical_error::numerical_error;
};

}  // namespace gravkit
