#include "reflex/validation.hpp"

#include "reflex/discounted.hpp"
#include "reflex/errors.hpp"
#include "reflex/optimizer.hpp"
#include "reflex/report.hpp"
#include "reflex/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

namespace reflex {

Measurement near(std::string name, double value, double target, double tolerance) {
    std::ostringstream os;
    os << "|x - " << target << "| <= " << tolerance;
    return {std::move(name), value, target, tolerance, os.str(), std::abs(value - target) <= tolerance};
}

Measurement near_relative(std::string name, double value, double target, double tolerance) {
    std::ostringstream os;
    os << "|x - " << target << "| <= " << tolerance << " * " << std::abs(target);
    return {std::move(name), value, target, tolerance, os.str(),
            std::abs(value - target) <= tolerance * std::abs(target)};
}

Measurement at_most(std::string name, double value, double limit) {
    std::ostringstream os;
    os << "x <= " << limit;
    return {std::move(name), value, limit, 0.0, os.str(), value <= limit};
}

Measurement exactly(std::string name, double value, double target) {
    std::ostringstream os;
    os << "x == " << target;
    return {std::move(name), value, target, 0.0, os.str(), value == target};
}

bool CriterionResult::pass() const {
    if (skipped || !error.empty()) return false;
    for (const auto& m : measurements) {
        if (!m.pass) return false;
    }
    return seconds <= time_limit;
}

std::string CriterionResult::summary_line() const {
    std::ostringstream os;
    os << (skipped ? "SKIP" : pass() ? "PASS" : "FAIL") << "  [" << (id < 10 ? " " : "") << id << "] " << title;
    if (skipped) return os.str();
    os.precision(3);
    os << "  (" << std::fixed << seconds << " s, limit " << time_limit << " s)";
    os.unsetf(std::ios::fixed);
    os.precision(8);
    if (!error.empty()) os << "  error: " << error;
    for (const auto& m : measurements) {
        os << "  " << m.name << "=" << m.value << (m.pass ? " [" : " [FAILS ") << m.rule << "]";
    }
    return os.str();
}

nlohmann::json to_json(const CriterionResult& r) {
    nlohmann::json ms = nlohmann::json::array();
    for (const auto& m : r.measurements) {
        ms.push_back({{"name", m.name},
                      {"value", encode_number(m.value)},
                      {"target", encode_number(m.target)},
                      {"tolerance", encode_number(m.tolerance)},
                      {"rule", m.rule},
                      {"pass", m.pass}});
    }
    return {{"id", r.id},
            {"title", r.title},
            {"status", r.skipped ? "skip" : r.pass() ? "pass" : "fail"},
            {"seconds", encode_number(r.seconds)},
            {"time_limit", encode_number(r.time_limit)},
            {"monte_carlo", r.uses_monte_carlo},
            {"error", r.error},
            {"measurements", ms}};
}

namespace {

const CompoundPoissonTwoExp kCase1{1.0, 2.0, 2.0, 1.0};
const CompoundPoissonTwoExp kCase3{1.0, 1.0, 4.0, 1.0};
const CompoundPoissonTwoExp kCase4{9.999985e5, 1.0, 1e6, 5e-7};
const JumpDiffusionTwoExp kJd{std::sqrt(2.0), 1.0, 1.0, 2.0, 1.0};
const Quotes kJdQuotes{1.0, 1.0};
constexpr double kJdEps = 1.0;
const StableFiniteMean kStable{1.5, 1.0, 2.0};

SimConfig sim(int n, double horizon, double dt, double burn, std::uint64_t seed) {
    SimConfig c;
    c.n_paths = n;
    c.horizon = horizon;
    c.time_step = dt;
    c.burn_in = burn;
    c.master_seed = seed;
    return c;
}

// |a - b| <= 3 combined standard errors
Measurement within_3se(std::string name, const SimEstimate& e, double exact) {
    return at_most(std::move(name), std::abs(e.mean - exact), 3.0 * e.std_error);
}

using Body = std::function<void(CriterionResult&, const ValidationOptions&)>;

struct Definition {
    const char* title;
    double time_limit;
    bool monte_carlo;
    Body body;
};

std::uint64_t seed_or(const ValidationOptions& o, std::uint64_t pinned) { return o.seed.value_or(pinned); }

Measurement branch(const BarrierSolution& s, const std::string& expected) {
    return exactly("branch_" + expected, s.notes == expected ? 1.0 : 0.0, 1.0);
}

const std::vector<Definition>& definitions() {
    static const std::vector<Definition> defs{
        {"compound Poisson case 1: a* = 0, d* = 4.005", 1.0, false,
         [](CriterionResult& r, const ValidationOptions&) {
             const auto s = solve_ergodic_cpp(kCase1, Quotes::even(3.0));
             r.measurements.push_back(exactly("a_star", s.a_star, 0.0));
             r.measurements.push_back(near("d_star", s.d_star(), 4.005, 1e-2));
             r.measurements.push_back(branch(s, "a_zero"));
         }},
        {"compound Poisson case 2: (a*, d*) = (0, 0)", 1.0, false,
         [](CriterionResult& r, const ValidationOptions&) {
             const auto s = solve_ergodic_cpp(kCase1, Quotes::even(0.1));
             r.measurements.push_back(exactly("a_star", s.a_star, 0.0));
             r.measurements.push_back(exactly("d_star", s.d_star(), 0.0));
             r.measurements.push_back(branch(s, "origin"));
         }},
        {"compound Poisson case 3: (a*, d*) = (-0.272, 0.966)", 1.0, false,
         [](CriterionResult& r, const ValidationOptions&) {
             const auto s = solve_ergodic_cpp(kCase3, Quotes::even(5.0));
             r.measurements.push_back(near("a_star", s.a_star, -0.272, 1e-2));
             r.measurements.push_back(near("d_star", s.d_star(), 0.966, 1e-2));
         }},
        {"compound Poisson case 4: -a* = d* = 0.0202", 1.0, false,
         [](CriterionResult& r, const ValidationOptions&) {
             const auto s = solve_ergodic_cpp(kCase4, Quotes::even(0.5));
             r.measurements.push_back(near_relative("d_star", s.d_star(), 0.0202, 0.1));
             r.measurements.push_back(exactly("a_plus_d", s.a_star + s.d_star(), 0.0));
             r.measurements.push_back(branch(s, "a_minus_d"));
         }},
        {"jump-diffusion roots of phi = eps", 0.1, false,
         [](CriterionResult& r, const ValidationOptions&) {
             const auto roots = roots_phi_eq_eps(kJd, kJdEps).as_array();
             const double reference[4] = {-0.489, -1.898, 0.849, 2.537};
             for (int i = 0; i < 4; ++i) {
                 const auto tag = "rho" + std::to_string(i + 1);
                 r.measurements.push_back(near(tag, roots[i], reference[i], 1e-3));
                 r.measurements.push_back(
                     at_most(tag + "_residual", std::abs(kJd.char_exponent(roots[i]) - kJdEps), 1e-9));
             }
         }},
        {"jump-diffusion saddle (a*, b*) = (-2.017, 2.311)", 5.0, false,
         [](CriterionResult& r, const ValidationOptions&) {
             const auto s = solve_discounted_jd(kJd, kJdEps, kJdQuotes, default_lower_range(kJd),
                                                default_upper_range(kJd));
             r.measurements.push_back(near("a_star", s.a_star, -2.017, 1e-2));
             r.measurements.push_back(near("b_star", s.b_star, 2.311, 1e-2));
             const DynkinPayoff M(kJd, kJdEps, kJdQuotes);
             const double h = 1e-4;
             const double ga = (M(s.a_star + h, s.b_star) - M(s.a_star - h, s.b_star)) / (2 * h);
             const double gb = (M(s.a_star, s.b_star + h) - M(s.a_star, s.b_star - h)) / (2 * h);
             r.measurements.push_back(at_most("abs_grad_a", std::abs(ga), 5e-3));
             r.measurements.push_back(at_most("abs_grad_b", std::abs(gb), 5e-3));
         }},
        {"stable index 1.5: d* = 2.850, a* = -1.230", 5.0, false,
         [](CriterionResult& r, const ValidationOptions&) {
             const auto s = solve_ergodic_stable(kStable, Quotes::even(1.0));
             r.measurements.push_back(near("d_star", s.d_star(), 2.850, 1e-2));
             r.measurements.push_back(near("a_star", s.a_star, -1.230, 1e-2));
             r.measurements.push_back(at_most("closed_vs_numeric", std::abs(s.d_star() - s.diagnostics.at("d_numeric")),
                                              1e-6));
             r.measurements.push_back(near_relative("unit_down_rate", s.diagnostics.at("unit_down_rate"), 5.38, 0.01));
         }},
        {"Skorokhod conditions on 1000 fuzzed simulations", 120.0, true,
         [](CriterionResult& r, const ValidationOptions& o) {
             std::mt19937_64 gen(seed_or(o, 2024));
             std::uniform_real_distribution<double> u(0.3, 3.0), width(0.2, 5.0), start(-8.0, 8.0), lo(-3.0, 1.0),
                 unit(0.0, 1.0);
             std::uniform_int_distribution<int> kind(0, 2);
             int failures = 0;
             double worst_identity = 0.0;
             for (int i = 0; i < 1000; ++i) {
                 LevyModel m = kCase1;
                 switch (kind(gen)) {
                     case 0: m = CompoundPoissonTwoExp{u(gen), u(gen), u(gen), u(gen)}; break;
                     case 1: m = JumpDiffusionTwoExp{u(gen), u(gen), u(gen), u(gen), u(gen)}; break;
                     default: m = StableFiniteMean{1.05 + 0.9 * unit(gen), u(gen), u(gen)};
                 }
                 const double a = lo(gen);
                 auto cfg = sim(1, 20.0, 2e-3, 0.0, gen());
                 cfg.x0 = start(gen);
                 RngStream rng(cfg.master_seed, 0);
                 const auto p = simulate_reflected(m, a, a + width(gen), cfg, rng);
                 const auto c = check_skorokhod(p);
                 failures += !c.ok();
                 worst_identity = std::max(worst_identity, c.identity_error);
             }
             r.measurements.push_back(exactly("failing_paths", failures, 0.0));
             r.measurements.push_back(at_most("max_identity_error", worst_identity, 1e-9));
         }},
        {"ergodic Monte Carlo vs closed form, compound Poisson case 1", 120.0, true,
         [](CriterionResult& r, const ValidationOptions& o) {
             const Quotes q = Quotes::even(3.0);
             const auto e = estimate_ergodic_cost(kCase1, CostSpec::abs(), q, 0.0, 4.005,
                                                  sim(200, 2000.0, 1e-3, 200.0, seed_or(o, 9)), o.jobs);
             r.measurements.push_back(within_3se("abs_gap", e, ergodic_cost_cpp(kCase1, q, 0.0, 4.005)));
         }},
        {"stopping-game Monte Carlo vs exit-system payoff", 180.0, true,
         [](CriterionResult& r, const ValidationOptions& o) {
             const auto cfg = sim(40000, 14.0, 1e-4, 0.0, seed_or(o, 10));
             for (auto [a, b] : {std::pair{-1.0, 1.0}, std::pair{-2.017, 2.311}}) {
                 const auto e = estimate_dynkin_payoff(kJd, kJdEps, kJdQuotes, a, b, 0.0, cfg, o.jobs);
                 std::ostringstream tag;
                 tag << "abs_gap(" << a << "," << b << ")";
                 r.measurements.push_back(within_3se(tag.str(), e, dynkin_payoff_M(kJd, kJdEps, kJdQuotes, a, b)));
             }
         }},
        {"stationary laws: compound Poisson mixed measure and stable Beta density", 180.0, true,
         [](CriterionResult& r, const ValidationOptions& o) {
             const auto hc = occupation_histogram(kCase1, 0.0, 2.0, sim(200, 1000.0, 1e-3, 50.0, seed_or(o, 11)), 20,
                                                  o.jobs);
             const auto tc = occupation_chi_square(hc, expected_categories(stationary_cpp(kCase1, 2.0), 20, true));
             r.measurements.push_back(at_most("compound_poisson_T2", tc.statistic, tc.critical));
             auto cfg = sim(200, 3.0, 2e-6, 1.0, seed_or(o, 1));
             cfg.x0 = 0.568;
             const auto hs = occupation_histogram(kStable, 0.0, 1.0, cfg, 20, o.jobs);
             const auto ts = occupation_chi_square(hs, expected_categories(stationary_stable(kStable, 1.0), 20, false));
             r.measurements.push_back(at_most("stable_T2", ts.statistic, ts.critical));
         }},
        {"optimality probes: solved barriers vs 4 perturbed pairs", 180.0, true,
         [](CriterionResult& r, const ValidationOptions& o) {
             const auto probe = [&](const std::string& tag, double a, double b, const auto& estimate) {
                 const SimEstimate at = estimate(a, b);
                 for (auto [da, db] : {std::pair{-0.5, 0.0}, std::pair{0.5, 0.0}, std::pair{0.0, -0.5},
                                       std::pair{0.0, 0.5}}) {
                     const SimEstimate e = estimate(a + da, b + db);
                     std::ostringstream name;
                     name << tag << "_excess(" << da << "," << db << ")";
                     r.measurements.push_back(
                         at_most(name.str(), at.mean - e.mean, 3.0 * std::hypot(at.std_error, e.std_error)));
                 }
             };
             const Quotes q = Quotes::even(3.0);
             const auto sc = solve_ergodic_cpp(kCase1, q);
             const auto cpp_cfg = sim(200, 2000.0, 1e-3, 200.0, seed_or(o, 12));
             probe("compound_poisson", sc.a_star, sc.b_star, [&](double a, double b) {
                 return estimate_ergodic_cost(kCase1, CostSpec::abs(), q, a, b, cpp_cfg, o.jobs);
             });
             const auto sj = solve_discounted_jd(kJd, kJdEps, kJdQuotes, default_lower_range(kJd),
                                                 default_upper_range(kJd));
             const auto jd_cfg = sim(20000, 14.0, 5e-3, 0.0, seed_or(o, 12));
             probe("jump_diffusion", sj.a_star, sj.b_star, [&](double a, double b) {
                 return estimate_discounted_cost(kJd, CostSpec::half_square(), kJdQuotes, kJdEps, a, b, jd_cfg, o.jobs);
             });
         }},
    };
    return defs;
}

}  // namespace

CriterionResult run_criterion(int id, const ValidationOptions& options) {
    if (id < 1 || id > kCriterionCount) throw ConfigError("criterion id must lie in [1, 12]");
    const auto& def = definitions()[static_cast<std::size_t>(id - 1)];
    CriterionResult r;
    r.id = id;
    r.title = def.title;
    r.time_limit = def.time_limit;
    r.uses_monte_carlo = def.monte_carlo;
    if (def.monte_carlo && options.skip_monte_carlo) {
        r.skipped = true;
        return r;
    }
    const auto t0 = std::chrono::steady_clock::now();
    try {
        def.body(r, options);
    } catch (const Error& e) {
        r.error = std::string(to_string(e.kind())) + ": " + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

std::vector<CriterionResult> run_validation(const ValidationOptions& options) {
    std::vector<CriterionResult> out;
    for (int id = 1; id <= kCriterionCount; ++id) {
        if (!options.only.empty() && std::find(options.only.begin(), options.only.end(), id) == options.only.end())
            continue;
        out.push_back(run_criterion(id, options));
    }
    return out;
}

}  // namespace reflex
