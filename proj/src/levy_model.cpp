#include "reflex/levy_model.hpp"

#include "reflex/errors.hpp"
#include "reflex/numerics.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace reflex {

namespace {

void require_positive(double value, const char* name) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        std::ostringstream os;
        os << name << " must be a finite positive number, got " << value;
        throw DomainError(os.str());
    }
}

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

CompoundPoissonTwoExp::CompoundPoissonTwoExp(double intensity_up, double intensity_down, double size_rate_up,
                                             double size_rate_down)
    : intensity_up_(intensity_up),
      intensity_down_(intensity_down),
      size_rate_up_(size_rate_up),
      size_rate_down_(size_rate_down) {
    require_positive(intensity_up, "intensity_up");
    require_positive(intensity_down, "intensity_down");
    require_positive(size_rate_up, "size_rate_up");
    require_positive(size_rate_down, "size_rate_down");
}

double CompoundPoissonTwoExp::mean() const noexcept {
    return intensity_up_ / size_rate_up_ - intensity_down_ / size_rate_down_;
}

double CompoundPoissonTwoExp::char_exponent(double z) const {
    if (z == size_rate_up_ || z == -size_rate_down_) {
        throw DomainError("char_exponent: evaluation at a pole of the two-sided exponential jump law");
    }
    return intensity_up_ * z / (size_rate_up_ - z) - intensity_down_ * z / (size_rate_down_ + z);
}

double CompoundPoissonTwoExp::jump_density(double y) const {
    if (y == 0.0) throw DomainError("jump_density: undefined at y = 0");
    if (y > 0.0) return intensity_up_ * size_rate_up_ * std::exp(-size_rate_up_ * y);
    return intensity_down_ * size_rate_down_ * std::exp(size_rate_down_ * y);
}

JumpDiffusionTwoExp::JumpDiffusionTwoExp(double volatility, double intensity_up, double intensity_down,
                                         double size_rate_up, double size_rate_down)
    : volatility_(volatility), jumps_(intensity_up, intensity_down, size_rate_up, size_rate_down) {
    require_positive(volatility, "volatility");
}

double JumpDiffusionTwoExp::char_exponent(double z) const {
    return 0.5 * volatility_ * volatility_ * z * z + jumps_.char_exponent(z);
}

StableFiniteMean::StableFiniteMean(double index, double c_plus, double c_minus)
    : index_(index), c_plus_(c_plus), c_minus_(c_minus) {
    if (!(index > 1.0 && index < 2.0)) {
        std::ostringstream os;
        os << "stable index must lie in (1, 2) for a finite-mean process, got " << index;
        throw DomainError(os.str());
    }
    require_positive(c_plus, "c_plus");
    require_positive(c_minus, "c_minus");
}

double StableFiniteMean::jump_density(double y) const {
    if (y == 0.0) throw DomainError("jump_density: undefined at y = 0");
    const double c = y > 0.0 ? c_plus_ : c_minus_;
    return c * std::pow(std::abs(y), -index_ - 1.0);
}

std::string_view kind_name(const LevyModel& model) noexcept {
    return std::visit(Overloaded{[](const CompoundPoissonTwoExp&) { return std::string_view("compound_poisson"); },
                                 [](const JumpDiffusionTwoExp&) { return std::string_view("jump_diffusion"); },
                                 [](const StableFiniteMean&) { return std::string_view("stable"); }},
                      model);
}

double char_exponent(const LevyModel& model, double z) {
    return std::visit(Overloaded{[z](const CompoundPoissonTwoExp& m) { return m.char_exponent(z); },
                                 [z](const JumpDiffusionTwoExp& m) { return m.char_exponent(z); },
                                 [](const StableFiniteMean&) -> double {
                                     throw UnsupportedError(
                                         "char_exponent: the stable kind has no real-axis exponent");
                                 }},
                      model);
}

double mean(const LevyModel& model) noexcept {
    return std::visit(Overloaded{[](const CompoundPoissonTwoExp& m) { return m.mean(); },
                                 [](const JumpDiffusionTwoExp& m) { return m.mean(); },
                                 [](const StableFiniteMean&) { return 0.0; }},
                      model);
}

double gaussian_variance(const LevyModel& model) noexcept {
    if (const auto* jd = std::get_if<JumpDiffusionTwoExp>(&model)) return jd->volatility() * jd->volatility();
    return 0.0;
}

double jump_density(const LevyModel& model, double y) {
    return std::visit([y](const auto& m) { return m.jump_density(y); }, model);
}

bool has_bounded_variation(const LevyModel& model) noexcept {
    return std::holds_alternative<CompoundPoissonTwoExp>(model);
}

void require_negative_mean(const CompoundPoissonTwoExp& model) {
    if (!(model.mean() < 0.0)) {
        std::ostringstream os;
        os << "mean condition violated: intensity_up/size_rate_up - intensity_down/size_rate_down must be "
              "negative for the ergodic compound Poisson analytics (got "
           << model.mean() << ")";
        throw PreconditionError(os.str());
    }
}

double lundberg_root(const CompoundPoissonTwoExp& model) {
    require_negative_mean(model);
    const double closed =
        (model.intensity_down() * model.size_rate_up() - model.intensity_up() * model.size_rate_down()) /
        model.total_intensity();
    // phi(z)/z is increasing on (0, size_rate_up), negative at 0 and unbounded at the pole.
    const auto reduced = [&model](double z) {
        return model.intensity_up() / (model.size_rate_up() - z) - model.intensity_down() / (model.size_rate_down() + z);
    };
    const double hi = model.size_rate_up() * (1.0 - 1e-12);
    if (reduced(hi) > 0.0) {
        const double numeric = find_root_bracketed(reduced, 0.0, hi);
        if (std::abs(numeric - closed) > 1e-8 * (1.0 + closed)) {
            std::ostringstream os;
            os << "lundberg_root: closed form " << closed << " disagrees with bracketed root " << numeric;
            throw ConvergenceError(os.str(), closed, std::abs(numeric - closed));
        }
    }
    return closed;
}

// ---------------------------------------------------------------------------

CostSpec::CostSpec(Variant kind) : kind_(kind) {
    if (const auto* s = std::get_if<SmoothedAbsCost>(&kind_)) require_positive(s->delta, "smoothing delta");
}

double CostSpec::operator()(double x) const noexcept {
    return std::visit(Overloaded{[x](AbsCost) { return std::abs(x); },
                                 [x](HalfSquareCost) { return 0.5 * x * x; },
                                 [x](SquareCost) { return x * x; },
                                 [x](SmoothedAbsCost s) {
                                     // Symmetric form of 2d log(1 + e^{x/d}) - x - 2d log 2, stable for large |x|/d.
                                     const double ax = std::abs(x);
                                     return ax + 2.0 * s.delta * (std::log1p(std::exp(-ax / s.delta)) - std::numbers::ln2);
                                 },
                                 [](ZeroCost) { return 0.0; }},
                      kind_);
}

double CostSpec::derivative(double x) const noexcept {
    return std::visit(Overloaded{[x](AbsCost) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); },
                                 [x](HalfSquareCost) { return x; },
                                 [x](SquareCost) { return 2.0 * x; },
                                 [x](SmoothedAbsCost s) { return std::tanh(0.5 * x / s.delta); },
                                 [](ZeroCost) { return 0.0; }},
                      kind_);
}

std::string CostSpec::name() const {
    return std::visit(Overloaded{[](AbsCost) { return std::string("abs"); },
                                 [](HalfSquareCost) { return std::string("half_square"); },
                                 [](SquareCost) { return std::string("square"); },
                                 [](SmoothedAbsCost) { return std::string("smoothed_abs"); },
                                 [](ZeroCost) { return std::string("zero"); }},
                      kind_);
}

Quotes::Quotes(double lower, double upper) : lower_(lower), upper_(upper) {
    require_positive(lower, "q_u (lower barrier cost)");
    require_positive(upper, "q_d (upper barrier cost)");
}

}  // namespace reflex
