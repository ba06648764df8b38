#pragma once

#include <string>
#include <string_view>
#include <variant>

namespace reflex {

/// Compound Poisson process with two-sided exponential jumps.
///
/// Up-jumps arrive at rate `intensity_up` with Exp(`size_rate_up`) sizes,
/// down-jumps at rate `intensity_down` with Exp(`size_rate_down`) sizes.
/// No drift, no Gaussian part; paths have bounded variation.
class CompoundPoissonTwoExp {
public:
    CompoundPoissonTwoExp(double intensity_up, double intensity_down, double size_rate_up, double size_rate_down);

    [[nodiscard]] double intensity_up() const noexcept { return intensity_up_; }
    [[nodiscard]] double intensity_down() const noexcept { return intensity_down_; }
    [[nodiscard]] double size_rate_up() const noexcept { return size_rate_up_; }
    [[nodiscard]] double size_rate_down() const noexcept { return size_rate_down_; }
    [[nodiscard]] double total_intensity() const noexcept { return intensity_up_ + intensity_down_; }

    /// E X_1 = intensity_up / size_rate_up - intensity_down / size_rate_down.
    [[nodiscard]] double mean() const noexcept;
    /// log E exp(z X_1); throws DomainError at the poles z = size_rate_up, z = -size_rate_down.
    [[nodiscard]] double char_exponent(double z) const;
    /// Levy density of the jump measure at y != 0.
    [[nodiscard]] double jump_density(double y) const;

    friend bool operator==(const CompoundPoissonTwoExp&, const CompoundPoissonTwoExp&) = default;

private:
    double intensity_up_;
    double intensity_down_;
    double size_rate_up_;
    double size_rate_down_;
};

/// Brownian motion with volatility `volatility` plus the compound Poisson part above.
class JumpDiffusionTwoExp {
public:
    JumpDiffusionTwoExp(double volatility, double intensity_up, double intensity_down, double size_rate_up,
                        double size_rate_down);

    [[nodiscard]] double volatility() const noexcept { return volatility_; }
    [[nodiscard]] const CompoundPoissonTwoExp& jumps() const noexcept { return jumps_; }

    [[nodiscard]] double mean() const noexcept { return jumps_.mean(); }
    [[nodiscard]] double char_exponent(double z) const;
    [[nodiscard]] double jump_density(double y) const { return jumps_.jump_density(y); }

    friend bool operator==(const JumpDiffusionTwoExp&, const JumpDiffusionTwoExp&) = default;

private:
    double volatility_;
    CompoundPoissonTwoExp jumps_;
};

/// Strictly stable process with index in (1, 2) and jump measure
/// c_plus y^{-index-1} dy on y > 0, c_minus |y|^{-index-1} dy on y < 0.
/// Zero mean, no Gaussian part.
class StableFiniteMean {
public:
    StableFiniteMean(double index, double c_plus, double c_minus);

    [[nodiscard]] double index() const noexcept { return index_; }
    [[nodiscard]] double c_plus() const noexcept { return c_plus_; }
    [[nodiscard]] double c_minus() const noexcept { return c_minus_; }

    /// (c_plus - c_minus) / (c_plus + c_minus).
    [[nodiscard]] double skewness() const noexcept { return (c_plus_ - c_minus_) / (c_plus_ + c_minus_); }
    [[nodiscard]] double jump_density(double y) const;

    friend bool operator==(const StableFiniteMean&, const StableFiniteMean&) = default;

private:
    double index_;
    double c_plus_;
    double c_minus_;
};

using LevyModel = std::variant<CompoundPoissonTwoExp, JumpDiffusionTwoExp, StableFiniteMean>;

[[nodiscard]] std::string_view kind_name(const LevyModel& model) noexcept;

/// log E exp(z X_1). Throws UnsupportedError for the stable kind (only the
/// imaginary axis is meaningful there) and DomainError at poles.
[[nodiscard]] double char_exponent(const LevyModel& model, double z);
[[nodiscard]] double mean(const LevyModel& model) noexcept;
/// Gaussian variance per unit time.
[[nodiscard]] double gaussian_variance(const LevyModel& model) noexcept;
/// Throws DomainError at y = 0.
[[nodiscard]] double jump_density(const LevyModel& model, double y);
/// True when paths have bounded variation (atoms appear in stationary laws).
[[nodiscard]] bool has_bounded_variation(const LevyModel& model) noexcept;

/// Positive root of the characteristic exponent for a negative-mean compound
/// Poisson model, (intensity_down*size_rate_up - intensity_up*size_rate_down) / total_intensity.
/// Throws PreconditionError when E X_1 >= 0.
[[nodiscard]] double lundberg_root(const CompoundPoissonTwoExp& model);

/// Throws PreconditionError naming the mean condition unless E X_1 < 0.
void require_negative_mean(const CompoundPoissonTwoExp& model);

// ---------------------------------------------------------------------------
// Running costs

struct AbsCost {
    friend bool operator==(const AbsCost&, const AbsCost&) = default;
};
struct HalfSquareCost {
    friend bool operator==(const HalfSquareCost&, const HalfSquareCost&) = default;
};
struct SquareCost {
    friend bool operator==(const SquareCost&, const SquareCost&) = default;
};
/// C^2 convex approximation of |x|: 2 delta log(1 + e^{x/delta}) - x - 2 delta log 2.
struct SmoothedAbsCost {
    double delta;
    friend bool operator==(const SmoothedAbsCost&, const SmoothedAbsCost&) = default;
};
/// Identically zero; isolates the reflection part of ergodic objectives in tests.
struct ZeroCost {
    friend bool operator==(const ZeroCost&, const ZeroCost&) = default;
};

/// Convex, nonnegative running cost minimized at 0.
class CostSpec {
public:
    using Variant = std::variant<AbsCost, HalfSquareCost, SquareCost, SmoothedAbsCost, ZeroCost>;

    CostSpec() : kind_(AbsCost{}) {}
    /// Throws DomainError for a non-positive smoothing parameter.
    explicit CostSpec(Variant kind);

    static CostSpec abs() { return CostSpec(AbsCost{}); }
    static CostSpec half_square() { return CostSpec(HalfSquareCost{}); }
    static CostSpec square() { return CostSpec(SquareCost{}); }
    static CostSpec smoothed_abs(double delta) { return CostSpec(SmoothedAbsCost{delta}); }
    static CostSpec zero() { return CostSpec(ZeroCost{}); }

    [[nodiscard]] double operator()(double x) const noexcept;
    [[nodiscard]] double derivative(double x) const noexcept;
    /// Points where the cost is not C^2 (kinks), for splitting quadrature.
    [[nodiscard]] bool has_kink_at_zero() const noexcept { return std::holds_alternative<AbsCost>(kind_); }
    [[nodiscard]] const Variant& kind() const noexcept { return kind_; }
    [[nodiscard]] std::string name() const;

    friend bool operator==(const CostSpec&, const CostSpec&) = default;

private:
    Variant kind_;
};

/// Per-unit prices of lower-barrier (upward) and upper-barrier (downward) pushes.
class Quotes {
public:
    Quotes(double lower, double upper);

    [[nodiscard]] double lower() const noexcept { return lower_; }
    [[nodiscard]] double upper() const noexcept { return upper_; }
    [[nodiscard]] double total() const noexcept { return lower_ + upper_; }

    /// Splits a total price evenly between the two barriers.
    static Quotes even(double total) { return {0.5 * total, 0.5 * total}; }

    friend bool operator==(const Quotes&, const Quotes&) = default;

private:
    double lower_;
    double upper_;
};

}  // namespace reflex
