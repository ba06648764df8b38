#include "reflex/ergodic.hpp"

#include "reflex/errors.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <shared_mutex>
#include <sstream>
#include <tuple>
#include <vector>

namespace reflex {

namespace {

constexpr double kPi = std::numbers::pi;

NumericTolerances inner_tolerances() { return {1e-11, 1e-14, 2000}; }
NumericTolerances outer_tolerances() { return {1e-10, 1e-14, 4000}; }

void require_width(double d, const char* where) {
    if (!(d > 0.0) || !std::isfinite(d)) {
        std::ostringstream os;
        os << where << ": interval width must be positive and finite, got " << d;
        throw DomainError(os.str());
    }
}

void require_offset(double a, double d, const char* where) {
    if (!(a <= 0.0 && a >= -d)) {
        std::ostringstream os;
        os << where << ": lower barrier " << a << " must lie in [-d, 0] with d = " << d;
        throw DomainError(os.str());
    }
}

}  // namespace

std::string_view to_string(BetaOrientation o) noexcept {
    return o == BetaOrientation::positivity ? "positivity" : "displayed";
}

BetaOrientation beta_orientation_from_string(std::string_view name) {
    if (name == "positivity") return BetaOrientation::positivity;
    if (name == "displayed") return BetaOrientation::displayed;
    throw ConfigError("unknown Beta orientation '" + std::string(name) + "' (expected positivity or displayed)");
}

// ---------------------------------------------------------------------------
// StationaryMeasure

StationaryMeasure StationaryMeasure::mixed_exponential(double width, double atom_low, double atom_high, double scale,
                                                       double rate) {
    require_width(width, "StationaryMeasure");
    StationaryMeasure m;
    m.width_ = width;
    m.atom_low_ = atom_low;
    m.atom_high_ = atom_high;
    m.p_ = scale;
    m.q_ = rate;
    return m;
}

StationaryMeasure StationaryMeasure::beta(double width, double shape_low, double shape_high) {
    require_width(width, "StationaryMeasure");
    if (!(shape_low > 0.0) || !(shape_high > 0.0)) throw DomainError("StationaryMeasure: Beta shapes must be positive");
    StationaryMeasure m;
    m.width_ = width;
    m.beta_ = true;
    m.p_ = shape_low;
    m.q_ = shape_high;
    m.norm_ = 1.0 / boost::math::beta(shape_low, shape_high);
    return m;
}

double StationaryMeasure::density(double x) const noexcept {
    if (!(x > 0.0 && x < width_)) return 0.0;
    if (!beta_) return p_ * q_ * std::exp(-q_ * x);
    const double u = x / width_;
    return norm_ * std::pow(u, p_ - 1.0) * std::pow(1.0 - u, q_ - 1.0) / width_;
}

double StationaryMeasure::beta_piece(const ScalarFunction& g, double x0, double x1, const NumericTolerances& tol) const {
    // u = (x/w)^p near 0 and v = (1-x/w)^q near w make the Beta weight flat.
    const double w = width_, p = p_, q = q_;
    if (x1 <= 0.5 * w) {
        return integrate_adaptive(
            [&](double u) {
                const double x = w * std::pow(u, 1.0 / p);
                return g(x) * norm_ / p * std::pow(1.0 - x / w, q - 1.0);
            },
            std::pow(x0 / w, p), std::pow(x1 / w, p), tol);
    }
    return integrate_adaptive(
        [&](double v) {
            const double x = w * (1.0 - std::pow(v, 1.0 / q));
            return g(x) * norm_ / q * std::pow(x / w, p - 1.0);
        },
        std::pow(1.0 - x1 / w, q), std::pow(1.0 - x0 / w, q), tol);
}

double StationaryMeasure::integrate_density(const ScalarFunction& g, const NumericTolerances& tol) const {
    return integrate(g, -1.0, tol) - atom_low_ * g(0.0) - atom_high_ * g(width_);
}

double StationaryMeasure::integrate(const ScalarFunction& g, double kink, const NumericTolerances& tol) const {
    double total = 0.0;
    if (atom_low_ != 0.0) total += atom_low_ * g(0.0);
    if (atom_high_ != 0.0) total += atom_high_ * g(width_);
    const bool split = kink > 0.0 && kink < width_;
    if (!beta_) {
        auto h = [&](double x) { return g(x) * density(x); };
        if (split) return total + integrate_adaptive(h, 0.0, kink, tol) + integrate_adaptive(h, kink, width_, tol);
        return total + integrate_adaptive(h, 0.0, width_, tol);
    }
    std::vector<double> cuts{0.0, 0.5 * width_, width_};
    if (split && kink != 0.5 * width_) cuts.insert(kink < 0.5 * width_ ? cuts.begin() + 1 : cuts.begin() + 2, kink);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) total += beta_piece(g, cuts[i], cuts[i + 1], tol);
    return total;
}

double StationaryMeasure::density_mass(double lo, double hi) const {
    lo = std::max(lo, 0.0);
    hi = std::min(hi, width_);
    if (!(lo < hi)) return 0.0;
    if (!beta_) return p_ * (std::exp(-q_ * lo) - std::exp(-q_ * hi));
    return boost::math::ibeta(p_, q_, hi / width_) - boost::math::ibeta(p_, q_, lo / width_);
}

double StationaryMeasure::total_mass() const { return atom_low_ + atom_high_ + density_mass(0.0, width_); }

double StationaryMeasure::mean() const {
    if (beta_) return width_ * p_ / (p_ + q_);
    return integrate([](double x) { return x; });
}

// ---------------------------------------------------------------------------

StationaryMeasure stationary_cpp(const CompoundPoissonTwoExp& model, double d) {
    require_width(d, "stationary_cpp");
    const double rho = lundberg_root(model);
    const double l1 = model.intensity_up(), l2 = model.intensity_down();
    const double a1 = model.size_rate_up(), a2 = model.size_rate_down();
    const double tail = std::exp(-rho * d);
    const double den = a1 / l1 - a2 * tail / l2;
    const double atom0 = (rho / l1) / den;
    const double atomd = (rho / l2) * tail / den;
    const double scale = (a1 + a2) / (l1 + l2) / den;
    return StationaryMeasure::mixed_exponential(d, atom0, atomd, scale, rho);
}

double stable_rho(const StableFiniteMean& model) noexcept {
    const double al = model.index();
    return 0.5 + std::atan(model.skewness() * std::tan(0.5 * kPi * al)) / (kPi * al);
}

StationaryMeasure stationary_stable(const StableFiniteMean& model, double d, BetaOrientation orientation) {
    require_width(d, "stationary_stable");
    const double rho = stable_rho(model);
    const double al = model.index();
    if (orientation == BetaOrientation::positivity) return StationaryMeasure::beta(d, al * rho, al * (1.0 - rho));
    return StationaryMeasure::beta(d, al * (1.0 - rho), al * rho);
}

double overshoot_kernel(double x, double y, double b) {
    if (!(x >= 0.0 && x <= b)) {
        std::ostringstream os;
        os << "overshoot_kernel: x = " << x << " outside [0, " << b << "]";
        throw DomainError(os.str());
    }
    if (y <= -x) return -(x * x + 2.0 * x * y);
    if (y < b - x) return y * y;
    const double w = b - x;
    return 2.0 * y * w - w * w;
}

double kernel_jump_integral(const LevyModel& model, double x, double d) {
    if (!(x >= 0.0 && x <= d)) throw DomainError("kernel_jump_integral: x outside [0, d]");
    const auto tol = inner_tolerances();
    const double up_gap = d - x;
    const double down_gap = x;

    if (const auto* st = std::get_if<StableFiniteMean>(&model)) {
        const double al = st->index();
        const double k = 1.0 / (2.0 - al);
        // y = w s^k makes y^2 |y|^{-index-1} dy flat in s.
        auto middle = [&](double w, double c) {
            if (w == 0.0) return 0.0;
            return integrate_adaptive(
                [&](double s) {
                    const double y = w * std::pow(s, k);
                    return c * y * y * std::pow(y, -al - 1.0) * w * k * std::pow(s, k - 1.0);
                },
                0.0, 1.0, tol);
        };
        // beyond the barrier, y = w (1 + t)
        auto tail = [&](double w, double c) {
            if (w == 0.0) return 0.0;
            return integrate_semi_infinite(
                [&](double t) { return c * (w * w + 2.0 * w * w * t) * std::pow(w * (1.0 + t), -al - 1.0) * w; }, 0.0,
                tol);
        };
        return middle(up_gap, st->c_plus()) + middle(down_gap, st->c_minus()) + tail(up_gap, st->c_plus()) +
               tail(down_gap, st->c_minus());
    }

    auto dens = [&](double y) { return jump_density(model, y); };
    double total = 0.0;
    if (up_gap > 0.0) {
        total += integrate_adaptive([&](double y) { return y > 0.0 ? y * y * dens(y) : 0.0; }, 0.0, up_gap, tol);
    }
    if (down_gap > 0.0) {
        total += integrate_adaptive([&](double y) { return y > 0.0 ? y * y * dens(-y) : 0.0; }, 0.0, down_gap, tol);
    }
    // y = gap + s on both tails: kernel becomes gap^2 + 2 gap s
    if (up_gap > 0.0) {
        total += integrate_semi_infinite(
            [&](double s) { return (up_gap * up_gap + 2.0 * up_gap * s) * dens(up_gap + s); }, 0.0, tol);
    }
    if (down_gap > 0.0) {
        total += integrate_semi_infinite(
            [&](double s) { return (down_gap * down_gap + 2.0 * down_gap * s) * dens(-down_gap - s); }, 0.0, tol);
    }
    return total;
}

namespace {

double kernel_rate_on(const LevyModel& model, const StationaryMeasure& pi) {
    const double d = pi.width();
    const double drift = mean(model);
    const double ex = pi.mean();
    const double jumps = pi.integrate([&](double x) { return kernel_jump_integral(model, x, d); }, -1.0,
                                      outer_tolerances());
    return (2.0 * drift * ex + gaussian_variance(model) + jumps) / (2.0 * d);
}

}  // namespace

ReflectionRates down_reflection_rate(const LevyModel& model, double d, BetaOrientation orientation) {
    require_width(d, "down_reflection_rate");
    double down = 0.0;
    if (const auto* cp = std::get_if<CompoundPoissonTwoExp>(&model)) {
        down = kernel_rate_on(model, stationary_cpp(*cp, d));
    } else if (const auto* st = std::get_if<StableFiniteMean>(&model)) {
        down = kernel_rate_on(model, stationary_stable(*st, d, orientation));
    } else {
        throw UnsupportedError("down_reflection_rate: no closed-form stationary law for the " +
                               std::string(kind_name(model)) + " kind");
    }
    return {down - mean(model), down};
}

double stable_unit_down_rate(const StableFiniteMean& model, BetaOrientation orientation) {
    using Key = std::tuple<double, double, double, int>;
    static std::shared_mutex mutex;
    static std::map<Key, double> memo;
    const Key key{model.index(), model.c_plus(), model.c_minus(), static_cast<int>(orientation)};
    {
        std::shared_lock lock(mutex);
        if (auto it = memo.find(key); it != memo.end()) return it->second;
    }
    const double value = down_reflection_rate(LevyModel{model}, 1.0, orientation).down_rate;
    std::unique_lock lock(mutex);
    return memo.emplace(key, value).first->second;
}

// ---------------------------------------------------------------------------

double cpp_barrier_objective(const CompoundPoissonTwoExp& model, double total_quote, double a, double d) {
    if (!(d >= 0.0) || !std::isfinite(d)) throw DomainError("cpp_barrier_objective: width must be nonnegative");
    require_offset(a, d, "cpp_barrier_objective");
    const double rho = lundberg_root(model);
    const double l1 = model.intensity_up(), l2 = model.intensity_down();
    const double a1 = model.size_rate_up(), a2 = model.size_rate_down();
    const double q = total_quote;
    if (d == 0.0) return q * l1 / a1;
    const double e = std::exp(-rho * d);
    const double num = -a * rho / l1 + e * (d + a) * rho / l2 + q * rho * l1 / a1 * e * (1.0 / l1 + 1.0 / l2) +
                       (a1 + a2) / (l1 + l2) * (e * (-a - d - 1.0 / rho) - a + 2.0 / rho * std::exp(a * rho) - 1.0 / rho);
    return num / (a1 / l1 - a2 * e / l2);
}

double ergodic_cost_cpp(const CompoundPoissonTwoExp& model, const Quotes& quotes, double a, double d) {
    return cpp_barrier_objective(model, quotes.total(), a, d) - model.mean() * quotes.lower();
}

double ergodic_cost_stable(const StableFiniteMean& model, const Quotes& quotes, double d, BetaOrientation orientation) {
    require_width(d, "ergodic_cost_stable");
    const double rho = stable_rho(model);
    const double al = model.index();
    return d * d * rho * (1.0 - rho) / (al + 1.0) +
           quotes.total() * stable_unit_down_rate(model, orientation) * std::pow(d, 1.0 - al);
}

double stable_optimal_width(const StableFiniteMean& model, const Quotes& quotes, BetaOrientation orientation) {
    const double rho = stable_rho(model);
    const double al = model.index();
    return std::pow((al * al - 1.0) * quotes.total() * stable_unit_down_rate(model, orientation) /
                        (2.0 * rho * (1.0 - rho)),
                    1.0 / (al + 1.0));
}

ErgodicCostAtWidth::ErgodicCostAtWidth(const LevyModel& model, const CostSpec& cost, const Quotes& quotes, double d,
                                       BetaOrientation orientation)
    : cost_(cost), d_(d) {
    if (std::holds_alternative<JumpDiffusionTwoExp>(model)) {
        throw UnsupportedError("ergodic_cost_general: no closed-form stationary law for the jump_diffusion kind");
    }
    if (!(d >= 0.0) || !std::isfinite(d)) throw DomainError("ergodic_cost_general: width must be nonnegative");
    const double drift = mean(model);
    if (d == 0.0) {
        const auto* cp = std::get_if<CompoundPoissonTwoExp>(&model);
        if (cp == nullptr) throw DomainError("ergodic_cost_general: zero width needs a bounded-variation model");
        require_negative_mean(*cp);
        // pinned at 0: every up-jump is pushed back, so E D = intensity_up / size_rate_up
        down_ = cp->intensity_up() / cp->size_rate_up();
    } else {
        if (const auto* cp = std::get_if<CompoundPoissonTwoExp>(&model)) {
            pi_ = stationary_cpp(*cp, d);
            down_ = kernel_rate_on(model, *pi_);
        } else {
            const auto& st = std::get<StableFiniteMean>(model);
            pi_ = stationary_stable(st, d, orientation);
            // self-similarity: the rate on [0, d] is d^{1-index} times the unit rate
            down_ = stable_unit_down_rate(st, orientation) * std::pow(d, 1.0 - st.index());
        }
    }
    reflection_ = quotes.total() * down_ - drift * quotes.lower();
}

double ErgodicCostAtWidth::operator()(double a) const {
    require_offset(a, d_, "ergodic_cost_general");
    if (!pi_) return cost_(a) + reflection_;
    const double kink = cost_.has_kink_at_zero() ? -a : -1.0;
    return pi_->integrate([&](double u) { return cost_(u + a); }, kink, outer_tolerances()) + reflection_;
}

double ergodic_cost_general(const LevyModel& model, const CostSpec& cost, const Quotes& quotes, double a, double d,
                            BetaOrientation orientation) {
    return ErgodicCostAtWidth(model, cost, quotes, d, orientation)(a);
}

}  // namespace reflex
