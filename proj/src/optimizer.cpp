#include "reflex/optimizer.hpp"

#include "reflex/discounted.hpp"
#include "reflex/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace reflex {

namespace {

constexpr double kTie = 1e-10;
constexpr int kWidthScan = 240;
constexpr int kInnerScan = 16;
constexpr int kOuterScan = 40;
constexpr int kConfirmGrid = 201;
constexpr double kGap = 1e-6;

bool near(double x, double edge, double width) { return std::abs(x - edge) <= 1e-7 * (1.0 + width); }

}  // namespace

std::string_view to_string(Regime r) noexcept { return r == Regime::ergodic ? "ergodic" : "discounted"; }

std::string_view to_string(Method m) noexcept {
    switch (m) {
        case Method::closed_form: return "closed_form";
        case Method::candidate_enum: return "candidate_enum";
        case Method::numeric_1d: return "numeric_1d";
        case Method::numeric_2d: return "numeric_2d";
        case Method::saddle_2d: return "saddle_2d";
    }
    return "closed_form";
}

Regime regime_from_string(std::string_view name) {
    if (name == "ergodic") return Regime::ergodic;
    if (name == "discounted") return Regime::discounted;
    throw ConfigError("unknown regime '" + std::string(name) + "'");
}

Method method_from_string(std::string_view name) {
    for (Method m : {Method::closed_form, Method::candidate_enum, Method::numeric_1d, Method::numeric_2d,
                     Method::saddle_2d}) {
        if (to_string(m) == name) return m;
    }
    throw ConfigError("unknown method '" + std::string(name) + "'");
}

double search_scale(const LevyModel& model) { return 1.0 + std::abs(mean(model)); }
Interval default_lower_range(const LevyModel& model) { return {-50.0 * search_scale(model), 0.0}; }
Interval default_upper_range(const LevyModel& model) { return {0.0, 100.0 * search_scale(model)}; }

// ---------------------------------------------------------------------------

BarrierSolution solve_ergodic_cpp(const CompoundPoissonTwoExp& model, const Quotes& quotes) {
    require_negative_mean(model);
    const double rho = lundberg_root(model);
    const double l1 = model.intensity_up(), l2 = model.intensity_down();
    const double a1 = model.size_rate_up(), a2 = model.size_rate_down();
    const double q = quotes.total();
    const double shift = -model.mean() * quotes.lower();
    const double d_hi = default_upper_range(LevyModel{model}).hi;
    const double d_lo = 1e-9;

    // a-stationarity of the |x| objective at fixed width, projected onto [-d, 0]
    const auto interior_a = [&](double d) {
        const double a = (-std::log(2.0 * (a1 + a2)) +
                          std::log(std::exp(-rho * d) * (a2 + l1 * a2 / l2) + a1 + l2 * a1 / l1)) /
                         rho;
        return std::clamp(a, -d, 0.0);
    };
    const auto objective = [&](double a, double d) { return cpp_barrier_objective(model, q, a, d); };

    struct Branch {
        const char* name;
        double a;
        double d;
        double value;
    };
    std::array<Branch, 4> branches{};
    branches[0] = {"origin", 0.0, 0.0, objective(0.0, 0.0)};

    const auto on_curve = [&](const char* name, auto lower_of) {
        const auto m = minimize_scalar_scanned([&](double d) { return objective(lower_of(d), d); }, d_lo, d_hi,
                                               kWidthScan, true);
        return Branch{name, lower_of(m.argmin), m.argmin, m.value};
    };
    branches[1] = on_curve("a_zero", [](double) { return 0.0; });
    branches[2] = on_curve("a_minus_d", [](double d) { return -d; });
    branches[3] = on_curve("interior", interior_a);

    std::size_t best = 0;
    for (std::size_t i = 1; i < branches.size(); ++i) {
        if (branches[i].value < branches[best].value - kTie) best = i;
    }

    BarrierSolution s;
    s.regime = Regime::ergodic;
    s.method = Method::candidate_enum;
    s.a_star = branches[best].a;
    s.b_star = branches[best].a + branches[best].d;
    s.objective_value = branches[best].value + shift;
    s.notes = branches[best].name;
    s.boundary = best != 0 && near(branches[best].d, d_hi, d_hi);
    for (const auto& b : branches) {
        const std::string key = b.name;
        s.diagnostics["J_" + key] = b.value + shift;
        s.diagnostics["d_" + key] = b.d;
        s.diagnostics["a_" + key] = b.a;
    }
    s.diagnostics["lundberg_root"] = rho;
    s.diagnostics["mean"] = model.mean();
    return s;
}

// ---------------------------------------------------------------------------

BarrierSolution solve_ergodic_stable(const StableFiniteMean& model, const Quotes& quotes,
                                     BetaOrientation orientation) {
    const double rho = stable_rho(model);
    const double d = stable_optimal_width(model, quotes, orientation);
    const double d_hi = std::max(default_upper_range(LevyModel{model}).hi, 2.0 * d);
    const auto numeric = minimize_scalar_scanned(
        [&](double w) { return ergodic_cost_stable(model, quotes, w, orientation); }, 1e-6, d_hi, kWidthScan, true);
    const double gap = std::abs(numeric.argmin - d);
    if (gap > 1e-6 * (1.0 + d)) {
        std::ostringstream os;
        os << "solve_ergodic_stable: closed-form width " << d << " and numeric width " << numeric.argmin
           << " disagree";
        throw ConvergenceError(os.str(), numeric.argmin, gap);
    }

    const double share = orientation == BetaOrientation::positivity ? rho : 1.0 - rho;
    BarrierSolution s;
    s.regime = Regime::ergodic;
    s.method = Method::closed_form;
    s.a_star = -d * share;
    s.b_star = d + s.a_star;
    s.objective_value = ergodic_cost_stable(model, quotes, d, orientation);
    s.notes = std::string("orientation=") + std::string(to_string(orientation));
    s.diagnostics["rho"] = rho;
    s.diagnostics["unit_down_rate"] = stable_unit_down_rate(model, orientation);
    s.diagnostics["orientation_positivity"] = orientation == BetaOrientation::positivity ? 1.0 : 0.0;
    s.diagnostics["negative_jumps_heavier"] = model.c_plus() < model.c_minus() ? 1.0 : 0.0;
    s.diagnostics["d_numeric"] = numeric.argmin;
    s.diagnostics["numeric_gap"] = gap;
    return s;
}

// ---------------------------------------------------------------------------

BarrierSolution solve_ergodic_general(const LevyModel& model, const CostSpec& cost, const Quotes& quotes,
                                      Interval lower_range, Interval width_range, BetaOrientation orientation) {
    if (std::holds_alternative<JumpDiffusionTwoExp>(model)) {
        throw UnsupportedError("solve_ergodic_general: no stationary law for the jump_diffusion kind");
    }
    if (!(width_range.lo >= 0.0) || !(width_range.lo < width_range.hi) || !std::isfinite(width_range.hi)) {
        throw DomainError("solve_ergodic_general: width range must be a nonempty subset of [0, inf)");
    }
    if (!(lower_range.lo <= lower_range.hi) || !(lower_range.lo <= 0.0)) {
        throw DomainError("solve_ergodic_general: lower range must meet (-inf, 0]");
    }
    if (const auto* cp = std::get_if<CompoundPoissonTwoExp>(&model)) require_negative_mean(*cp);
    const double a_top = std::min(lower_range.hi, 0.0);

    struct Inner {
        double a;
        double value;
    };
    const auto inner = [&](double d) -> Inner {
        const double lo = std::max(lower_range.lo, -d);
        if (lo > a_top) return {a_top, std::numeric_limits<double>::infinity()};
        const ErgodicCostAtWidth at(model, cost, quotes, d, orientation);
        if (lo == a_top) return {lo, at(lo)};
        const auto m = minimize_scalar_scanned(at, lo, a_top, kInnerScan);
        return {m.argmin, m.value};
    };

    const double d_floor = std::max(width_range.lo, kGap * search_scale(model));
    const auto outer = minimize_scalar_scanned([&](double d) { return inner(d).value; }, d_floor, width_range.hi,
                                               kOuterScan, true);
    double d = outer.argmin;
    Inner best = inner(d);
    bool pinned = false;
    if (width_range.lo == 0.0 && std::holds_alternative<CompoundPoissonTwoExp>(model)) {
        const Inner zero = inner(0.0);
        if (zero.value <= best.value + kTie) {
            d = 0.0;
            best = zero;
            pinned = true;
        }
    }

    BarrierSolution s;
    s.regime = Regime::ergodic;
    s.method = Method::numeric_2d;
    s.a_star = best.a;
    s.b_star = best.a + d;
    s.objective_value = best.value;
    s.notes = std::string("cost=") + cost.name();
    if (std::holds_alternative<StableFiniteMean>(model)) {
        s.notes += std::string(" orientation=") + std::string(to_string(orientation));
    }
    const bool a_on_box = lower_range.lo > -d && near(best.a, lower_range.lo, lower_range.width());
    const bool d_on_box = near(d, width_range.hi, width_range.width()) ||
                          (!pinned && width_range.lo > 0.0 && near(d, width_range.lo, width_range.width()));
    s.boundary = a_on_box || d_on_box;
    s.diagnostics["d_pinned_at_zero"] = pinned ? 1.0 : 0.0;
    s.diagnostics["width_scan_points"] = kOuterScan;
    s.diagnostics["lower_scan_points"] = kInnerScan;
    return s;
}

// ---------------------------------------------------------------------------

BarrierSolution solve_discounted_jd(const JumpDiffusionTwoExp& model, double eps, const Quotes& quotes,
                                    Interval lower_range, Interval upper_range) {
    if (!(lower_range.lo < 0.0) || !(upper_range.hi > 0.0)) {
        throw DomainError("solve_discounted_jd: need lower range inside a < 0 and upper range inside b > 0");
    }
    const Interval ar{lower_range.lo, std::min(lower_range.hi, -kGap)};
    const Interval br{std::max(upper_range.lo, kGap), upper_range.hi};
    if (!(ar.lo < ar.hi) || !(br.lo < br.hi)) throw DomainError("solve_discounted_jd: empty search range");

    const DynkinPayoff payoff(model, eps, quotes);
    // finite differences near the clipped edges may step across 0
    const auto f = [&](double a, double b) {
        return payoff(std::min(a, -std::numeric_limits<double>::min()), std::max(b, std::numeric_limits<double>::min()));
    };
    const SaddleResult r = saddle_search(f, ar, br);

    double b_margin = std::numeric_limits<double>::infinity();
    double a_margin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < kConfirmGrid; ++i) {
        const double t = static_cast<double>(i) / (kConfirmGrid - 1);
        b_margin = std::min(b_margin, f(r.a, br.lo + t * br.width()) - r.value);
        a_margin = std::min(a_margin, r.value - f(ar.lo + t * ar.width(), r.b));
    }

    BarrierSolution s;
    s.regime = Regime::discounted;
    s.method = Method::saddle_2d;
    s.a_star = r.a;
    s.b_star = r.b;
    s.objective_value = r.value;
    s.boundary = !r.interior;
    s.notes = r.interior ? "interior saddle" : "saddle on search boundary";
    const auto roots = payoff.roots();
    s.diagnostics["rho1"] = roots.rho1;
    s.diagnostics["rho2"] = roots.rho2;
    s.diagnostics["rho3"] = roots.rho3;
    s.diagnostics["rho4"] = roots.rho4;
    s.diagnostics["grad_a"] = r.grad_a;
    s.diagnostics["grad_b"] = r.grad_b;
    s.diagnostics["grad_norm"] = std::hypot(r.grad_a, r.grad_b);
    s.diagnostics["newton_steps"] = r.newton_steps;
    s.diagnostics["rcond"] = payoff.rcond(r.a, r.b);
    // both nonnegative (up to solver tolerance) at a saddle
    s.diagnostics["scan_b_margin"] = b_margin;
    s.diagnostics["scan_a_margin"] = a_margin;
    return s;
}

}  // namespace reflex
