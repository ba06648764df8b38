#pragma once

#include "reflex/levy_model.hpp"

#include <Eigen/Dense>

#include <array>

namespace reflex {

/// Real roots of phi(z) = eps for the jump-diffusion model, ordered
/// rho2 < -size_rate_down < rho1 < 0 < rho3 < size_rate_up < rho4.
struct QuarticRoots {
    double rho1 = 0.0;
    double rho2 = 0.0;
    double rho3 = 0.0;
    double rho4 = 0.0;

    /// (rho1, rho2, rho3, rho4).
    [[nodiscard]] std::array<double, 4> as_array() const noexcept { return {rho1, rho2, rho3, rho4}; }
};

/// Bracketed search in (-Z, -size_rate_down), (-size_rate_down, 0), (0, size_rate_up),
/// (size_rate_up, Z); Z grows geometrically from |pole| + 1. Throws LocalizationError
/// when Z would exceed 1e6 and DomainError for eps <= 0.
[[nodiscard]] QuarticRoots roots_phi_eq_eps(const JumpDiffusionTwoExp& model, double eps);

/// 4x4 exit matrix for barriers a < b. Throws DomainError when a >= b.
[[nodiscard]] Eigen::Matrix4d build_exit_matrix(const JumpDiffusionTwoExp& model, const QuarticRoots& roots, double a,
                                                double b);

/// Right-hand side of the exit system for running cost x^2/2.
[[nodiscard]] Eigen::Vector4d exit_rhs(const JumpDiffusionTwoExp& model, double eps, const Quotes& quotes, double a,
                                       double b);

/// Weights (e^{-rho3 b}, e^{-rho4 b}, e^{-rho1 a}, e^{-rho2 a}) applied to the solved system.
[[nodiscard]] Eigen::RowVector4d exit_weights(const QuarticRoots& roots, double a, double b);

/// Payoff of the stopping game with thresholds (a, b) started at 0, for running
/// cost x^2/2. The roots depend only on (model, eps) and are computed once.
class DynkinPayoff {
public:
    DynkinPayoff(JumpDiffusionTwoExp model, double eps, Quotes quotes);

    /// Requires a < 0 < b. Throws SingularMatrixError when the exit matrix
    /// reciprocal condition estimate falls below 1e-12.
    [[nodiscard]] double operator()(double a, double b) const;
    /// Reciprocal condition estimate of the exit matrix at (a, b).
    [[nodiscard]] double rcond(double a, double b) const;

    [[nodiscard]] const QuarticRoots& roots() const noexcept { return roots_; }
    [[nodiscard]] const JumpDiffusionTwoExp& model() const noexcept { return model_; }
    [[nodiscard]] double eps() const noexcept { return eps_; }
    [[nodiscard]] const Quotes& quotes() const noexcept { return quotes_; }

private:
    JumpDiffusionTwoExp model_;
    double eps_;
    Quotes quotes_;
    QuarticRoots roots_;
};

/// One-shot form of DynkinPayoff.
[[nodiscard]] double dynkin_payoff_M(const JumpDiffusionTwoExp& model, double eps, const Quotes& quotes, double a,
                                     double b);

}  // namespace reflex
