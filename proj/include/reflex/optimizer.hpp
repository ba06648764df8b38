#pragma once

#include "reflex/ergodic.hpp"
#include "reflex/levy_model.hpp"
#include "reflex/numerics.hpp"

#include <map>
#include <string>
#include <string_view>

namespace reflex {

enum class Regime { ergodic, discounted };
enum class Method { closed_form, candidate_enum, numeric_1d, numeric_2d, saddle_2d };

[[nodiscard]] std::string_view to_string(Regime r) noexcept;
[[nodiscard]] std::string_view to_string(Method m) noexcept;
/// Throw ConfigError for unknown names.
[[nodiscard]] Regime regime_from_string(std::string_view name);
[[nodiscard]] Method method_from_string(std::string_view name);

/// A solved barrier pair. Ergodic solvers minimize; the discounted solver
/// returns a sup-inf saddle of the stopping-game payoff.
struct BarrierSolution {
    double a_star = 0.0;
    double b_star = 0.0;
    double objective_value = 0.0;
    Regime regime = Regime::ergodic;
    Method method = Method::closed_form;
    std::map<std::string, double> diagnostics;
    /// Selected branch or orientation, free text.
    std::string notes;
    /// True when the solution sits on an edge of the search box rather than at
    /// an interior stationary point or a structural edge (a = 0, a = -d, d = 0).
    bool boundary = false;

    [[nodiscard]] double d_star() const noexcept { return b_star - a_star; }

    friend bool operator==(const BarrierSolution&, const BarrierSolution&) = default;
};

/// 1 + |mean(model)|.
[[nodiscard]] double search_scale(const LevyModel& model);
/// [-50 scale, 0].
[[nodiscard]] Interval default_lower_range(const LevyModel& model);
/// [0, 100 scale]; used for both the width and the upper barrier.
[[nodiscard]] Interval default_upper_range(const LevyModel& model);

/// Compound Poisson, cost |x|. Compares the origin, the a = 0 edge, the a = -d
/// edge and the interior stationary curve; ties within 1e-10 go to the earlier
/// of those. Widths are scanned log-spaced on [1e-9, 100 scale]. Throws PreconditionError
/// unless the mean is negative.
[[nodiscard]] BarrierSolution solve_ergodic_cpp(const CompoundPoissonTwoExp& model, const Quotes& quotes);

/// Stable, cost x^2. Closed-form width, confirmed by a numeric minimization;
/// throws ConvergenceError when the two differ by more than 1e-6 (1 + d).
[[nodiscard]] BarrierSolution solve_ergodic_stable(const StableFiniteMean& model, const Quotes& quotes,
                                                   BetaOrientation orientation = BetaOrientation::positivity);

/// Numeric minimization of ergodic_cost_general over widths in `width_range`
/// and lower barriers in [max(lower_range.lo, -d), min(lower_range.hi, 0)].
/// Throws UnsupportedError for the jump_diffusion kind.
[[nodiscard]] BarrierSolution solve_ergodic_general(const LevyModel& model, const CostSpec& cost, const Quotes& quotes,
                                                    Interval lower_range, Interval width_range,
                                                    BetaOrientation orientation = BetaOrientation::positivity);

/// sup over a < 0, inf over b > 0 of the stopping-game payoff. The ranges are
/// clipped to a <= -1e-6 and b >= 1e-6; a point on a range edge is returned
/// with `boundary` set.
[[nodiscard]] BarrierSolution solve_discounted_jd(const JumpDiffusionTwoExp& model, double eps, const Quotes& quotes,
                                                  Interval lower_range, Interval upper_range);

}  // namespace reflex
