#pragma once

#include <stdexcept>
#include <string>

namespace tlaw {

// Machine-readable error categories. The CLI maps each to a distinct exit code.
enum class ErrorCode {
    domain,            // argument outside the mathematical domain of an operation
    invalid_panel,     // panel violates its invariants
    degenerate_design, // det(D) below the design floor
    singular_gamma,    // sandwich matrix not positive definite
    invalid_residuals, // no usable time for residual diagnostics
    parse,             // malformed input file
    usage,             // invalid option combination
};

inline const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::domain: return "domain";
        case ErrorCode::invalid_panel: return "invalid_panel";
        case ErrorCode::degenerate_design: return "degenerate_design";
        case ErrorCode::singular_gamma: return "singular_gamma";
        case ErrorCode::invalid_residuals: return "invalid_residuals";
        case ErrorCode::parse: return "parse";
        case ErrorCode::usage: return "usage";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// Raised when a 2x2 symmetric matrix fails the positive-definiteness floor.
class SingularMatrixError : public Error {
public:
    SingularMatrixError(const std::string& what, double min_eigenvalue)
        : Error(ErrorCode::singular_gamma, what), min_eigenvalue_(min_eigenvalue) {}

    double min_eigenvalue() const noexcept { return min_eigenvalue_; }

private:
    double min_eigenvalue_;
};

} // namespace tlaw
