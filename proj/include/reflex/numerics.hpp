#pragma once

#include <Eigen/Dense>

#include <functional>
#include <utility>

namespace reflex {

/// Tolerances shared by the numerical kernels.
///
/// The meaning of `max_iter` depends on the kernel: iterations for root finding
/// and minimization, panel subdivisions for adaptive quadrature.
struct NumericTolerances {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    int max_iter = 200;

    /// Throws DomainError unless rel_tol > 0, abs_tol > 0 and max_iter >= 1.
    void validate() const;

    static NumericTolerances roots() { return {1e-10, 1e-12, 200}; }
    static NumericTolerances quadrature() { return {1e-8, 1e-12, 2000}; }
    static NumericTolerances minimization() { return {1e-10, 1e-12, 500}; }
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    [[nodiscard]] double width() const noexcept { return hi - lo; }
    [[nodiscard]] bool contains(double x) const noexcept { return lo <= x && x <= hi; }
};

using ScalarFunction = std::function<double(double)>;
using BivariateFunction = std::function<double(double, double)>;

/// Bracketed root of `f` on [lo, hi] (TOMS 748, a Brent-family method).
///
/// Requires f(lo) * f(hi) <= 0. Returns r in [lo, hi] with either |f(r)| <= abs_tol
/// or a final bracket narrower than rel_tol * |r| + abs_tol.
/// Throws BracketError without a sign change and ConvergenceError past max_iter.
double find_root_bracketed(const ScalarFunction& f, double lo, double hi,
                           const NumericTolerances& tol = NumericTolerances::roots());

/// Globally adaptive 15-point Gauss-Kronrod quadrature over [lo, hi].
///
/// Panels with the largest error estimate are bisected until the summed estimate
/// is at most rel_tol * |result| + abs_tol. Panels narrower than about 1e-13 of
/// their magnitude are not split further. Throws ConvergenceError (carrying the partial
/// estimate) when max_iter subdivisions do not reach the tolerance.
double integrate_adaptive(const ScalarFunction& f, double lo, double hi,
                          const NumericTolerances& tol = NumericTolerances::quadrature());

/// Integral of `f` over [lo, inf) by exp-sinh (double exponential) quadrature.
///
/// Intended for integrands that are smooth on [lo, inf) and decay like
/// |y|^-p with p > 1 or faster. Throws DivergenceError when refinement does not
/// settle, which is what a non-integrable tail produces.
double integrate_semi_infinite(const ScalarFunction& f, double lo,
                               const NumericTolerances& tol = NumericTolerances::quadrature());

/// Result of a dense solve, with the 1-norm reciprocal condition estimate.
struct LinearSolveResult {
    Eigen::VectorXd x;
    double rcond = 0.0;
};

/// Solves A x = rhs by LU with partial pivoting; A is never inverted.
///
/// Throws SingularMatrixError when the reciprocal condition estimate is below
/// `min_rcond` (default 1e-12).
LinearSolveResult solve_linear_dense(const Eigen::MatrixXd& a, const Eigen::VectorXd& rhs,
                                     double min_rcond = 1e-12);

struct ScalarMinimum {
    double argmin = 0.0;
    double value = 0.0;
};

/// Local minimum of `f` on [lo, hi] (Brent's parabolic/golden-section search),
/// compared against both endpoints so boundary minimizers are returned exactly.
ScalarMinimum minimize_scalar(const ScalarFunction& f, double lo, double hi,
                              const NumericTolerances& tol = NumericTolerances::minimization());

/// Scans `n` equally spaced points (or log-spaced when `log_spaced` and lo > 0)
/// and minimizes within the cell around the best grid point.
ScalarMinimum minimize_scalar_scanned(const ScalarFunction& f, double lo, double hi, int n,
                                      bool log_spaced = false,
                                      const NumericTolerances& tol = NumericTolerances::minimization());

struct SaddleOptions {
    NumericTolerances tol = {1e-10, 1e-12, 100};
    double tol_grad = 1e-6;
    int scan_points = 48;
    /// Step of the central differences is fd_scale * (1 + |x|).
    double fd_scale = 1e-5;
};

struct SaddleResult {
    double a = 0.0;
    double b = 0.0;
    double value = 0.0;
    double grad_a = 0.0;
    double grad_b = 0.0;
    /// False when either coordinate sits on its search boundary; such a point
    /// is reported as found rather than moved into the interior.
    bool interior = true;
    int newton_steps = 0;
};

/// sup over a, inf over b of f(a, b) on the given rectangle.
///
/// Nested search (outer golden section over a, inner over b, each seeded by a
/// grid scan), then damped Newton on the central-difference gradient. The
/// result reports the gradient at the returned point; callers decide whether
/// |grad| <= tol_grad is good enough.
SaddleResult saddle_search(const BivariateFunction& f, Interval a_range, Interval b_range,
                           const SaddleOptions& opts = {});

}  // namespace reflex
