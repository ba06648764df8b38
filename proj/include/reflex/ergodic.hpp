#pragma once

#include "reflex/levy_model.hpp"
#include "reflex/numerics.hpp"

#include <optional>
#include <string_view>

namespace reflex {

/// Which end of [0, d] gets the Beta shape index * positivity for the stable kind.
///
/// `positivity`: Beta(index*rho, index*(1-rho)) in x/d, mean d*rho. This is the
/// law reproduced by simulating the reflected process.
/// `displayed`: the mirrored law, exponent index*(1-rho)-1 on x/d, mean d*(1-rho).
enum class BetaOrientation { positivity, displayed };

[[nodiscard]] std::string_view to_string(BetaOrientation o) noexcept;
/// Throws ConfigError for an unknown name.
[[nodiscard]] BetaOrientation beta_orientation_from_string(std::string_view name);

/// Long-run occupation law of the process reflected in [0, width]:
/// point masses at both ends plus a density on (0, width).
class StationaryMeasure {
public:
    /// Density scale * rate * exp(-rate x) on (0, width).
    static StationaryMeasure mixed_exponential(double width, double atom_low, double atom_high, double scale,
                                               double rate);
    /// Density (x/w)^(shape_low-1) (1-x/w)^(shape_high-1) / (w B(shape_low, shape_high)), no atoms.
    static StationaryMeasure beta(double width, double shape_low, double shape_high);

    [[nodiscard]] double width() const noexcept { return width_; }
    [[nodiscard]] double atom_low() const noexcept { return atom_low_; }
    [[nodiscard]] double atom_high() const noexcept { return atom_high_; }
    [[nodiscard]] bool is_beta() const noexcept { return beta_; }
    [[nodiscard]] double shape_low() const noexcept { return p_; }
    [[nodiscard]] double shape_high() const noexcept { return q_; }

    [[nodiscard]] double density(double x) const noexcept;
    /// Integral of g against the absolutely continuous part only.
    [[nodiscard]] double integrate_density(const ScalarFunction& g,
                                           const NumericTolerances& tol = NumericTolerances::quadrature()) const;
    /// Integral of g against the full measure (atoms added exactly). `kink`, when
    /// inside (0, width), splits the density integral there.
    [[nodiscard]] double integrate(const ScalarFunction& g, double kink = -1.0,
                                   const NumericTolerances& tol = NumericTolerances::quadrature()) const;
    [[nodiscard]] double total_mass() const;
    [[nodiscard]] double mean() const;
    /// Mass of [lo, hi] excluding the atoms.
    [[nodiscard]] double density_mass(double lo, double hi) const;

private:
    StationaryMeasure() = default;
    double beta_piece(const ScalarFunction& g, double x0, double x1, const NumericTolerances& tol) const;

    double width_ = 0.0;
    double atom_low_ = 0.0;
    double atom_high_ = 0.0;
    bool beta_ = false;
    // exponential: p_ = scale, q_ = rate; beta: shapes, norm_ = 1 / B(p, q)
    double p_ = 0.0;
    double q_ = 0.0;
    double norm_ = 0.0;
};

/// Expected pushes per unit time under the stationary law.
struct ReflectionRates {
    double up_rate = 0.0;
    double down_rate = 0.0;
};

/// Stationary law of the compound Poisson model reflected in [0, d]; d > 0.
/// Throws PreconditionError unless the mean is negative.
[[nodiscard]] StationaryMeasure stationary_cpp(const CompoundPoissonTwoExp& model, double d);

/// 1/2 + arctan(skewness * tan(pi index / 2)) / (pi index).
[[nodiscard]] double stable_rho(const StableFiniteMean& model) noexcept;

[[nodiscard]] StationaryMeasure stationary_stable(const StableFiniteMean& model, double d,
                                                  BetaOrientation orientation = BetaOrientation::positivity);

/// Squared-displacement kernel for a jump y from x in [0, b]:
/// -(x^2+2xy) for y <= -x, y^2 in between, 2y(b-x)-(b-x)^2 for y >= b-x.
/// Throws DomainError for x outside [0, b].
[[nodiscard]] double overshoot_kernel(double x, double y, double b);

/// Integral over the jump measure of overshoot_kernel(x, ., d).
[[nodiscard]] double kernel_jump_integral(const LevyModel& model, double x, double d);

/// Stationary reflection rates on [0, d] from the kernel formula
/// E D = (2 mean E X + gaussian variance + int pi(dx) int kernel(x,y,d) Pi(dy)) / (2d),
/// and E U = E D - mean. Supported for the compound Poisson and stable kinds.
[[nodiscard]] ReflectionRates down_reflection_rate(const LevyModel& model, double d,
                                                   BetaOrientation orientation = BetaOrientation::positivity);

/// Stable down rate on [0, 1], computed once per (model, orientation) and memoized.
[[nodiscard]] double stable_unit_down_rate(const StableFiniteMean& model,
                                           BetaOrientation orientation = BetaOrientation::positivity);

/// Closed-form ergodic cost of the compound Poisson model with cost |x| and
/// barriers (a, a+d), excluding the constant -mean*q_u; depends on the quotes
/// only through their total.
[[nodiscard]] double cpp_barrier_objective(const CompoundPoissonTwoExp& model, double total_quote, double a,
                                           double d);

/// Ergodic cost of the compound Poisson model with cost |x|: cpp_barrier_objective - mean*q_u.
/// d = 0 returns the limit q*intensity_up/size_rate_up - mean*q_u. Requires -d <= a <= 0.
[[nodiscard]] double ergodic_cost_cpp(const CompoundPoissonTwoExp& model, const Quotes& quotes, double a, double d);

/// Ergodic cost of the stable model with cost x^2 and the lower barrier at minus
/// the stationary mean: d^2 rho(1-rho)/(index+1) + q E D^{0,1} d^{1-index}.
[[nodiscard]] double ergodic_cost_stable(const StableFiniteMean& model, const Quotes& quotes, double d,
                                         BetaOrientation orientation = BetaOrientation::positivity);

/// Minimizer of ergodic_cost_stable in closed form:
/// ((index^2-1) q E D^{0,1} / (2 rho (1-rho)))^{1/(index+1)}.
[[nodiscard]] double stable_optimal_width(const StableFiniteMean& model, const Quotes& quotes,
                                          BetaOrientation orientation = BetaOrientation::positivity);

/// int c(u+a) pi(du) + q E D - mean q_u by quadrature against the stationary
/// law on [0, d]. Requires -d <= a <= 0. d = 0 is accepted for the compound
/// Poisson kind (process pinned at the single barrier).
[[nodiscard]] double ergodic_cost_general(const LevyModel& model, const CostSpec& cost, const Quotes& quotes, double a,
                                          double d, BetaOrientation orientation = BetaOrientation::positivity);

/// ergodic_cost_general at a fixed width as a function of the lower barrier.
/// The stationary law and reflection rate are computed once at construction.
class ErgodicCostAtWidth {
public:
    ErgodicCostAtWidth(const LevyModel& model, const CostSpec& cost, const Quotes& quotes, double d,
                       BetaOrientation orientation = BetaOrientation::positivity);

    /// Requires -d <= a <= 0.
    [[nodiscard]] double operator()(double a) const;
    [[nodiscard]] double width() const noexcept { return d_; }
    [[nodiscard]] double down_rate() const noexcept { return down_; }

private:
    CostSpec cost_;
    double d_;
    double reflection_ = 0.0;  // q E D - mean q_u
    double down_ = 0.0;
    std::optional<StationaryMeasure> pi_;
};

}  // namespace reflex
