#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace reflex {

/// Classification of library failures. The CLI maps these onto exit codes.
enum class ErrorKind {
    domain,          ///< argument outside the operation's domain
    precondition,    ///< model-level precondition violated (e.g. mean condition)
    bracket,         ///< root bracket without a sign change
    convergence,     ///< iteration or subdivision cap reached
    divergence,      ///< non-integrable integrand detected
    singular,        ///< numerically singular linear system
    localization,    ///< root bracket expansion failed
    unsupported,     ///< operation not available for this model kind
    configuration,   ///< invalid run or simulation configuration
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

    /// True for failures caused by the inputs rather than by numerics.
    [[nodiscard]] bool is_validation() const noexcept {
        return kind_ == ErrorKind::domain || kind_ == ErrorKind::precondition ||
               kind_ == ErrorKind::configuration;
    }

private:
    ErrorKind kind_;
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(ErrorKind::domain, what) {}
};

class PreconditionError : public Error {
public:
    explicit PreconditionError(const std::string& what) : Error(ErrorKind::precondition, what) {}
};

class BracketError : public Error {
public:
    explicit BracketError(const std::string& what) : Error(ErrorKind::bracket, what) {}
};

/// Iteration or subdivision limit reached. Quadrature attaches the partial estimate.
class ConvergenceError : public Error {
public:
    explicit ConvergenceError(const std::string& what, double partial = 0.0, double error_estimate = 0.0)
        : Error(ErrorKind::convergence, what), partial_(partial), error_estimate_(error_estimate) {}

    [[nodiscard]] double partial_estimate() const noexcept { return partial_; }
    [[nodiscard]] double error_estimate() const noexcept { return error_estimate_; }

private:
    double partial_;
    double error_estimate_;
};

class DivergenceError : public Error {
public:
    explicit DivergenceError(const std::string& what) : Error(ErrorKind::divergence, what) {}
};

/// Pivot below threshold; carries the reciprocal condition estimate.
class SingularMatrixError : public Error {
public:
    SingularMatrixError(const std::string& what, double condition_estimate)
        : Error(ErrorKind::singular, what), condition_(condition_estimate) {}

    [[nodiscard]] double condition_estimate() const noexcept { return condition_; }

private:
    double condition_;
};

class LocalizationError : public Error {
public:
    explicit LocalizationError(const std::string& what) : Error(ErrorKind::localization, what) {}
};

class UnsupportedError : public Error {
public:
    explicit UnsupportedError(const std::string& what) : Error(ErrorKind::unsupported, what) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorKind::configuration, what) {}
};

}  // namespace reflex
