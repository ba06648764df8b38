#include <doctest.h>

#include "reflex/discounted.hpp"
#include "reflex/errors.hpp"
#include "reflex/optimizer.hpp"
#include "reflex/simulator.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <variant>

using namespace reflex;

namespace {

const CompoundPoissonTwoExp kCase1{1.0, 2.0, 2.0, 1.0};
const JumpDiffusionTwoExp kJd{std::sqrt(2.0), 1.0, 1.0, 2.0, 1.0};

SimConfig config(int n, double horizon, double dt = 1e-3, double burn = 0.0, std::uint64_t seed = 1) {
    SimConfig c;
    c.n_paths = n;
    c.horizon = horizon;
    c.time_step = dt;
    c.burn_in = burn;
    c.master_seed = seed;
    return c;
}

// time average of g(state) over a recorded path
template <class G>
double path_average(const PathRecord& p, double horizon, G&& g) {
    double s = 0.0;
    for (std::size_t k = 0; k < p.states.size(); ++k) {
        const double t1 = k + 1 < p.times.size() ? p.times[k + 1] : horizon;
        s += g(p.states[k]) * (t1 - p.times[k]);
    }
    return s / horizon;
}

}  // namespace

TEST_CASE("sim config validation") {
    CHECK_NOTHROW(SimConfig{}.validate());
    auto bad = [](auto edit) {
        SimConfig c;
        edit(c);
        CHECK_THROWS_AS(c.validate(), ConfigError);
    };
    bad([](SimConfig& c) { c.n_paths = 0; });
    bad([](SimConfig& c) { c.horizon = -1.0; });
    bad([](SimConfig& c) { c.time_step = 2.0 * c.horizon; });
    bad([](SimConfig& c) { c.burn_in = c.horizon; });
    bad([](SimConfig& c) { c.truncation_tol = 0.0; });
    bad([](SimConfig& c) { c.x0 = std::nan(""); });
}

TEST_CASE("rng streams are reproducible and distinct") {
    RngStream a(7, 3), b(7, 3), c(7, 4), d(8, 3);
    for (int i = 0; i < 100; ++i) {
        const double x = a.uniform();
        CHECK(x == b.uniform());
        CHECK(x > 0.0);
        CHECK(x < 1.0);
    }
    CHECK(RngStream(7, 3).uniform() != c.uniform());
    CHECK(RngStream(7, 3).uniform() != d.uniform());
}

TEST_CASE("increments: compound Poisson over a vanishing step") {
    RngStream rng(1, 0);
    int nonzero = 0;
    double sum = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double x = sample_increment(kCase1, 1e-12, rng);
        nonzero += x != 0.0;
        sum += x;
    }
    CHECK(nonzero <= 1);
    CHECK(std::abs(sum / 1e5) <= 4.0 * std::sqrt(3e-12 * 2.0 / 1e5) + 1e-12);
}

TEST_CASE("increments: jump-diffusion mean") {
    RngStream rng(2, 0);
    const int n = 1000000;
    const double dt = 0.01;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = sample_increment(kJd, dt, rng);
        s += x;
        s2 += x * x;
    }
    const double mean = s / n;
    const double se = std::sqrt((s2 / n - mean * mean) / n);
    CHECK(std::abs(mean - -0.005) <= 4.0 * se);
}

TEST_CASE("increments: stable tails follow the jump measure") {
    // at dt = 1e-3 the thresholds sit ~500 scale units out, well into the power-law tail
    const StableFiniteMean m{1.5, 1.0, 2.0};
    RngStream rng(3, 0);
    const int n = 4000000;
    const double dt = 1e-3;
    int up5 = 0, up10 = 0, down5 = 0, positive = 0;
    for (int i = 0; i < n; ++i) {
        const double x = sample_increment(m, dt, rng);
        up5 += x > 5.0;
        up10 += x > 10.0;
        down5 += x < -5.0;
        positive += x > 0.0;
    }
    const auto check_freq = [&](int count, double p) {
        const double se = std::sqrt(p * (1.0 - p) / n);
        CHECK(std::abs(static_cast<double>(count) / n - p) <= 4.0 * se);
    };
    check_freq(up5, dt * (1.0 / 1.5) * std::pow(5.0, -1.5));
    check_freq(up10, dt * (1.0 / 1.5) * std::pow(10.0, -1.5));
    check_freq(down5, dt * (2.0 / 1.5) * std::pow(5.0, -1.5));
    check_freq(positive, stable_rho(m));
}

TEST_CASE("reflected path: initial push with a nearly frozen model") {
    const CompoundPoissonTwoExp frozen{1e-12, 1e-12, 1.0, 1.0};
    auto cfg = config(1, 10.0);
    cfg.x0 = 5.0;
    RngStream rng(1, 0);
    const auto p = simulate_reflected(frozen, 0.0, 1.0, cfg, rng);
    CHECK(p.d_cum.front() == 4.0);
    CHECK(p.u_cum.front() == 0.0);
    for (double x : p.states) CHECK(x == 1.0);
    CHECK(check_skorokhod(p).ok());
    CHECK_THROWS_AS(simulate_reflected(frozen, 1.0, 1.0, cfg, rng), DomainError);
}

TEST_CASE("reflected path: Skorokhod conditions for each kind") {
    const LevyModel models[] = {kCase1, kJd, StableFiniteMean{1.5, 1.0, 2.0}};
    for (const auto& m : models) {
        for (double x0 : {-3.0, 0.3, 7.0}) {
            auto cfg = config(1, 50.0, 1e-3);
            cfg.x0 = x0;
            RngStream rng(11, 0);
            const auto p = simulate_reflected(m, -0.5, 1.5, cfg, rng);
            const auto c = check_skorokhod(p);
            CHECK(c.contained);
            CHECK(c.monotone);
            CHECK(c.complementary);
            CHECK(c.identity_error <= 1e-9);
            CHECK(p.times.back() <= 50.0);
            if (!std::holds_alternative<CompoundPoissonTwoExp>(m)) CHECK(p.times.back() == doctest::Approx(50.0));
        }
    }
}

TEST_CASE("reflected path: checker flags broken records") {
    auto cfg = config(1, 20.0);
    RngStream rng(5, 0);
    auto p = simulate_reflected(kCase1, 0.0, 2.0, cfg, rng);
    REQUIRE(p.states.size() > 10);
    auto outside = p;
    outside.states[5] = 2.5;
    CHECK_FALSE(check_skorokhod(outside).contained);
    auto shifted = p;
    shifted.free_cum[5] += 1e-6;
    CHECK(check_skorokhod(shifted).identity_error > 1e-9);
    auto lazy = p;
    for (std::size_t k = 5; k < lazy.u_cum.size(); ++k) lazy.u_cum[k] += 0.1;
    lazy.states[5] = 1.0;  // push recorded away from the lower barrier
    CHECK_FALSE(check_skorokhod(lazy).complementary);
}

TEST_CASE("reflected path: long-run average matches the stationary law") {
    const double d = 4.005;
    const auto pi = stationary_cpp(kCase1, d);
    const double exact = pi.integrate([](double x) { return x; });
    std::vector<double> averages;
    for (int i = 0; i < 50; ++i) {
        RngStream rng(21, static_cast<std::uint64_t>(i));
        const auto p = simulate_reflected(kCase1, 0.0, d, config(1, 1e4), rng);
        averages.push_back(path_average(p, 1e4, [](double x) { return std::abs(x); }));
    }
    const auto e = summarize(averages, 21);
    CHECK(std::abs(e.mean - exact) <= 3.0 * e.std_error);
}

TEST_CASE("determinism: paths and estimates do not depend on worker count") {
    auto cfg = config(1, 30.0, 1e-3);
    RngStream r1(9, 4), r2(9, 4);
    const auto p1 = simulate_reflected(kJd, -1.0, 1.0, cfg, r1);
    const auto p2 = simulate_reflected(kJd, -1.0, 1.0, cfg, r2);
    CHECK(p1.states == p2.states);
    CHECK(p1.u_cum == p2.u_cum);
    CHECK(p1.d_cum == p2.d_cum);

    const auto c = config(37, 200.0, 1e-3, 20.0, 5);
    const auto e1 = estimate_ergodic_cost(kCase1, CostSpec::abs(), Quotes::even(3.0), 0.0, 4.0, c, 1);
    const auto e3 = estimate_ergodic_cost(kCase1, CostSpec::abs(), Quotes::even(3.0), 0.0, 4.0, c, 3);
    CHECK(e1.mean == e3.mean);
    CHECK(e1.std_error == e3.std_error);
    CHECK(e1.stream_scheme == RngStream::scheme);
    CHECK(e1.master_seed == 5);
}

TEST_CASE("ergodic estimate: compound Poisson against the closed form") {
    const auto cfg = config(200, 2000.0, 1e-3, 200.0);
    const Quotes q = Quotes::even(3.0);
    const auto at_opt = estimate_ergodic_cost(kCase1, CostSpec::abs(), q, 0.0, 4.005, cfg);
    CHECK(std::abs(at_opt.mean - ergodic_cost_cpp(kCase1, q, 0.0, 4.005)) <= 3.0 * at_opt.std_error);
    const auto wider = estimate_ergodic_cost(kCase1, CostSpec::abs(), q, 0.0, 4.5, cfg);
    CHECK(wider.mean - at_opt.mean >= -3.0 * std::hypot(wider.std_error, at_opt.std_error));
}

TEST_CASE("ergodic estimate: stable model at the solved band") {
    // pushes are heavy-tailed here, so the estimate is noisy; dt = 1e-4 keeps the clamping bias small
    const StableFiniteMean m{1.5, 1.0, 2.0};
    const auto s = solve_ergodic_stable(m, Quotes::even(1.0));
    const auto e = estimate_ergodic_cost(m, CostSpec::square(), Quotes::even(1.0), s.a_star, s.b_star,
                                         config(50, 50.0, 1e-4, 5.0));
    CHECK(std::abs(e.mean - s.objective_value) <= 3.0 * e.std_error);
}

TEST_CASE("ergodic estimate: clamping bias shrinks with the step (nearly Brownian model)") {
    // reflected Brownian motion on [-1, 1]: uniform law, push rate nu^2 / (2 d)
    const JumpDiffusionTwoExp bm{1.0, 1e-9, 1e-9, 1.0, 1.0};
    const Quotes q = Quotes::even(1.0);
    const double exact = 0.5 + q.total() / 4.0;
    double previous = 1e300;
    for (double dt : {0.02, 0.01, 0.005}) {
        const auto e = estimate_ergodic_cost(bm, CostSpec::abs(), q, -1.0, 1.0, config(100, 200.0, dt, 10.0, 4));
        const double gap = std::abs(e.mean - exact);
        CHECK(gap <= previous + 3.0 * e.std_error);
        previous = gap;
    }
}

TEST_CASE("discounted estimate: zero cost without reflection") {
    auto cfg = config(200, 14.0, 1e-2);
    const auto e = estimate_discounted_cost(kJd, CostSpec::zero(), Quotes::even(2.0), 1.0, -1e6, 1e6, cfg);
    CHECK(std::abs(e.mean) <= 3.0 * e.std_error + 1e-300);
    CHECK(e.mean == 0.0);
    CHECK(e.diagnostics.at("truncation_bound") <= 1e-6);
}

TEST_CASE("discounted estimate: initial push is charged once, undiscounted") {
    auto cfg = config(20, 14.0);
    cfg.x0 = 3.0;
    const Quotes q{0.7, 1.3};
    const auto base = estimate_discounted_cost(kCase1, CostSpec::abs(), q, 1.0, 0.0, 3.0, cfg);
    cfg.x0 = 4.0;
    const auto pushed = estimate_discounted_cost(kCase1, CostSpec::abs(), q, 1.0, 0.0, 3.0, cfg);
    CHECK(pushed.mean - base.mean == doctest::Approx(1.3).epsilon(1e-12));
}

TEST_CASE("discounted estimate: horizon and argument checks") {
    CHECK_THROWS_AS(estimate_discounted_cost(kJd, CostSpec::abs(), Quotes::even(1.0), 1.0, -1.0, 1.0, config(2, 5.0)),
                    ConfigError);
    CHECK_THROWS_AS(estimate_discounted_cost(kJd, CostSpec::abs(), Quotes::even(1.0), 1.0, 1.0, -1.0, config(2, 20.0)),
                    DomainError);
}

TEST_CASE("discounted estimate: the solved saddle is not beaten by nearby bands") {
    const auto cfg = config(4000, 14.0, 5e-3, 0.0, 8);
    const Quotes q = Quotes::even(2.0);
    const auto at = estimate_discounted_cost(kJd, CostSpec::half_square(), q, 1.0, -2.017, 2.311, cfg);
    for (auto [a, b] : {std::pair{-1.5, 2.311}, std::pair{-2.017, 1.8}}) {
        const auto e = estimate_discounted_cost(kJd, CostSpec::half_square(), q, 1.0, a, b, cfg);
        CHECK(at.mean <= e.mean + 3.0 * e.std_error);
    }
}

TEST_CASE("stopping-game payoff: Monte Carlo against the exit-system formula") {
    // exits are detected at step ends, a bias of order sqrt(dt) (about 0.003 here)
    const auto cfg = config(20000, 14.0, 1e-3, 0.0, 12);
    const Quotes q = Quotes::even(2.0);
    const auto e = estimate_dynkin_payoff(kJd, 1.0, q, -1.0, 1.0, 0.0, cfg);
    CHECK(std::abs(e.mean - dynkin_payoff_M(kJd, 1.0, q, -1.0, 1.0)) <= 3.0 * e.std_error);
    CHECK(e.diagnostics.at("truncation_bound") <= 1e-5);
}

TEST_CASE("stopping-game payoff: immediate stop next to the lower threshold") {
    const auto cfg = config(2000, 7.0, 1e-6, 0.0, 13);
    auto loose = cfg;
    loose.truncation_tol = 1e-3;
    const Quotes q{0.8, 1.1};
    const auto e = estimate_dynkin_payoff(kJd, 1.0, q, -1e-6, 1.0, 0.0, loose);
    CHECK(std::abs(e.mean - -0.8) <= 3.0 * e.std_error + 1e-3);
    CHECK_THROWS_AS(estimate_dynkin_payoff(kJd, 1.0, q, -1e-6, 1.0, 0.0, cfg), ConfigError);
    CHECK_THROWS_AS(estimate_dynkin_payoff(kJd, 1.0, q, 0.5, 1.0, 0.0, loose), DomainError);
}

TEST_CASE("occupation: compound Poisson histogram and atoms") {
    const double d = 2.0;
    const auto h = occupation_histogram(kCase1, 0.0, d, config(200, 1000.0, 1e-3, 50.0), 20);
    const auto pi = stationary_cpp(kCase1, d);
    REQUIRE(h.separate_atoms);
    CHECK(std::abs(h.atom_low - pi.atom_low()) <= 3.0 * h.atom_low_se);
    CHECK(std::abs(h.atom_high - pi.atom_high()) <= 3.0 * h.atom_high_se);
    const auto r = occupation_chi_square(h, expected_categories(pi, 20, true));
    CHECK(r.dof == 21);
    CHECK(r.pass);
}

TEST_CASE("occupation: symmetric compound Poisson is symmetric about the midpoint") {
    const CompoundPoissonTwoExp sym{1.3, 1.3, 1.7, 1.7};
    const auto h = occupation_histogram(sym, -1.0, 1.0, config(100, 500.0, 1e-3, 20.0), 10);
    for (int k = 0; k < 5; ++k) {
        const auto j = static_cast<std::size_t>(9 - k);
        const auto i = static_cast<std::size_t>(k);
        CHECK(std::abs(h.fractions[i] - h.fractions[j]) <= 4.0 * std::hypot(h.std_errors[i], h.std_errors[j]));
    }
    CHECK(std::abs(h.atom_low - h.atom_high) <= 4.0 * std::hypot(h.atom_low_se, h.atom_high_se));
}

TEST_CASE("occupation: stable histogram against the Beta law, coarse bins") {
    const StableFiniteMean m{1.5, 1.0, 2.0};
    auto cfg = config(100, 3.0, 1e-5, 1.0, 3);
    cfg.x0 = 0.5;
    const auto h = occupation_histogram(m, 0.0, 1.0, cfg, 5);
    CHECK_FALSE(h.separate_atoms);
    const auto r = occupation_chi_square(h, expected_categories(stationary_stable(m, 1.0), 5, false));
    CHECK(r.pass);
}

TEST_CASE("occupation chi-square rejects a wrong law") {
    const auto h = occupation_histogram(kCase1, 0.0, 2.0, config(100, 500.0, 1e-3, 50.0), 10);
    const auto wrong = expected_categories(stationary_cpp(kCase1, 2.3), 10, true);
    CHECK_FALSE(occupation_chi_square(h, wrong).pass);
}

TEST_CASE("path csv") {
    auto cfg = config(1, 5.0);
    RngStream rng(1, 0);
    const auto p = simulate_reflected(kCase1, 0.0, 1.0, cfg, rng);
    const auto file = (std::filesystem::temp_directory_path() / "reflex_path_test.csv").string();
    write_path_csv(p, file);
    std::ifstream in(file);
    std::string header;
    std::getline(in, header);
    CHECK(header == "time,state,u_cum,d_cum");
    std::size_t rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    CHECK(rows == p.states.size());
    std::filesystem::remove(file);
}

// ---------------------------------------------------------------------------
// Properties

TEST_CASE("property: Skorokhod conditions on fuzzed simulations") {
    std::mt19937_64 gen(99);
    std::uniform_real_distribution<double> u(0.3, 3.0), width(0.2, 5.0), start(-8.0, 8.0), lo(-3.0, 1.0);
    std::uniform_int_distribution<int> kind(0, 2);
    for (int i = 0; i < 150; ++i) {
        LevyModel m = kCase1;
        switch (kind(gen)) {
            case 0: m = CompoundPoissonTwoExp{u(gen), u(gen), u(gen), u(gen)}; break;
            case 1: m = JumpDiffusionTwoExp{u(gen), u(gen), u(gen), u(gen), u(gen)}; break;
            default: m = StableFiniteMean{1.05 + 0.9 * std::uniform_real_distribution<double>()(gen), u(gen), u(gen)};
        }
        const double a = lo(gen);
        auto cfg = config(1, 20.0, 2e-3);
        cfg.x0 = start(gen);
        RngStream rng(gen(), 0);
        const auto p = simulate_reflected(m, a, a + width(gen), cfg, rng);
        CHECK(check_skorokhod(p).ok());
    }
}

TEST_CASE("property: summarize matches the textbook formulas") {
    const std::vector<double> v{1.0, 2.0, 4.0, 7.0};
    const auto e = summarize(v, 3);
    CHECK(e.mean == doctest::Approx(3.5));
    CHECK(e.std_error == doctest::Approx(std::sqrt(7.0 / 4.0)));
    CHECK(summarize({2.0}, 0).std_error == 0.0);
}
