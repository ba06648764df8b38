#include <doctest.h>

#include "reflex/errors.hpp"
#include "reflex/levy_model.hpp"
#include "reflex/numerics.hpp"

#include <cmath>
#include <random>

using namespace reflex;

namespace {
const CompoundPoissonTwoExp kCpp{1.0, 2.0, 2.0, 1.0};
const JumpDiffusionTwoExp kJd{std::sqrt(2.0), 1.0, 1.0, 2.0, 1.0};
const StableFiniteMean kStable{1.5, 1.0, 2.0};
}  // namespace

TEST_CASE("construction rejects invalid parameters") {
    CHECK_THROWS_AS(CompoundPoissonTwoExp(0.0, 1.0, 1.0, 1.0), DomainError);
    CHECK_THROWS_AS(CompoundPoissonTwoExp(1.0, -1.0, 1.0, 1.0), DomainError);
    CHECK_THROWS_AS(CompoundPoissonTwoExp(1.0, 1.0, NAN, 1.0), DomainError);
    CHECK_THROWS_AS(JumpDiffusionTwoExp(0.0, 1.0, 1.0, 1.0, 1.0), DomainError);
    CHECK_THROWS_AS(StableFiniteMean(1.0, 1.0, 1.0), DomainError);
    CHECK_THROWS_AS(StableFiniteMean(2.0, 1.0, 1.0), DomainError);
    CHECK_THROWS_AS(StableFiniteMean(0.8, 1.0, 1.0), DomainError);
    CHECK_THROWS_AS(StableFiniteMean(1.5, 0.0, 1.0), DomainError);
    CHECK_THROWS_AS(Quotes(0.0, 1.0), DomainError);
    CHECK_THROWS_AS(CostSpec::smoothed_abs(0.0), DomainError);
}

TEST_CASE("char_exponent") {
    CHECK(char_exponent(LevyModel{kCpp}, 0.0) == 0.0);
    CHECK(std::abs(char_exponent(LevyModel{kCpp}, 1.0)) < 1e-15);
    CHECK(char_exponent(LevyModel{kJd}, 0.849) == doctest::Approx(1.0).epsilon(2e-3));
    CHECK_THROWS_AS(char_exponent(LevyModel{kCpp}, 2.0), DomainError);
    CHECK_THROWS_AS(char_exponent(LevyModel{kCpp}, -1.0), DomainError);
    CHECK_THROWS_AS(char_exponent(LevyModel{kStable}, 0.5), UnsupportedError);
}

TEST_CASE("mean") {
    CHECK(mean(LevyModel{kCpp}) == -1.5);
    CHECK(mean(LevyModel{kStable}) == 0.0);
    CHECK(mean(LevyModel{kJd}) == -0.5);
}

TEST_CASE("jump_density") {
    CHECK(jump_density(LevyModel{kStable}, 1.0) == 1.0);
    CHECK(jump_density(LevyModel{kStable}, -1.0) == 2.0);
    CHECK(jump_density(LevyModel{kCpp}, 1.0) == doctest::Approx(2.0 * std::exp(-2.0)).epsilon(1e-15));
    CHECK(jump_density(LevyModel{kCpp}, -0.5) == doctest::Approx(2.0 * std::exp(-0.5)).epsilon(1e-15));
    CHECK_THROWS_AS(jump_density(LevyModel{kCpp}, 0.0), DomainError);
    CHECK_THROWS_AS(jump_density(LevyModel{kStable}, 0.0), DomainError);
}

TEST_CASE("lundberg_root") {
    CHECK(lundberg_root(kCpp) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(lundberg_root(CompoundPoissonTwoExp{1.0, 1.0, 4.0, 1.0}) == doctest::Approx(1.5).epsilon(1e-15));
    try {
        (void)lundberg_root(CompoundPoissonTwoExp{1.0, 1.0, 1.0, 1.0});
        FAIL("expected PreconditionError");
    } catch (const PreconditionError& e) {
        CHECK(std::string(e.what()).find("mean condition") != std::string::npos);
    }
    CHECK_THROWS_AS(lundberg_root(CompoundPoissonTwoExp{2.0, 1.0, 1.0, 1.0}), PreconditionError);
}

TEST_CASE("gaussian variance and variation type") {
    CHECK(gaussian_variance(LevyModel{kJd}) == doctest::Approx(2.0));
    CHECK(gaussian_variance(LevyModel{kCpp}) == 0.0);
    CHECK(has_bounded_variation(LevyModel{kCpp}));
    CHECK_FALSE(has_bounded_variation(LevyModel{kStable}));
    CHECK(kind_name(LevyModel{kJd}) == "jump_diffusion");
}

TEST_CASE("cost variants") {
    CHECK(CostSpec::abs()(-2.5) == 2.5);
    CHECK(CostSpec::half_square()(3.0) == 4.5);
    CHECK(CostSpec::square()(-3.0) == 9.0);
    CHECK(CostSpec::zero()(7.0) == 0.0);
    const auto s = CostSpec::smoothed_abs(0.1);
    CHECK(s(0.0) == 0.0);
    // direct form 2 d log(1 + e^{x/d}) - x - 2 d log 2 at a moderate point
    const double x = 0.37, d = 0.1;
    CHECK(s(x) == doctest::Approx(2 * d * std::log(1 + std::exp(x / d)) - x - 2 * d * std::log(2.0)).epsilon(1e-13));
    CHECK(s(1e4) == doctest::Approx(1e4 - 2 * d * std::log(2.0)).epsilon(1e-15));
    const double h = 1e-6;
    CHECK(s.derivative(x) == doctest::Approx((s(x + h) - s(x - h)) / (2 * h)).epsilon(1e-7));
    CHECK(CostSpec::square().derivative(2.0) == 4.0);
    CHECK(CostSpec::abs().name() == "abs");
    CHECK(Quotes(1.0, 2.0).total() == 3.0);
    CHECK(Quotes::even(3.0).lower() == 1.5);
}

// ---------------------------------------------------------------------------
// Properties

TEST_CASE("property: exponent vanishes at zero and at the Lundberg root") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.1, 5.0);
    int tested = 0;
    for (int i = 0; i < 2000; ++i) {
        const CompoundPoissonTwoExp m{u(rng), u(rng), u(rng), u(rng)};
        const JumpDiffusionTwoExp j{u(rng), m.intensity_up(), m.intensity_down(), m.size_rate_up(), m.size_rate_down()};
        CHECK(char_exponent(LevyModel{m}, 0.0) == 0.0);
        CHECK(char_exponent(LevyModel{j}, 0.0) == 0.0);
        if (m.mean() < -1e-6) {
            const double rho = lundberg_root(m);
            CHECK(rho > 0.0);
            CHECK(rho < m.size_rate_up());
            CHECK(std::abs(m.char_exponent(rho)) <= 1e-9);
            ++tested;
        } else {
            CHECK_THROWS_AS(lundberg_root(m), PreconditionError);
        }
    }
    CHECK(tested > 500);
}

TEST_CASE("property: jump density integrates to the total intensity") {
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> u(0.2, 4.0);
    for (int i = 0; i < 20; ++i) {
        const CompoundPoissonTwoExp m{u(rng), u(rng), u(rng), u(rng)};
        const LevyModel lm{m};
        auto pos = [&](double y) { return jump_density(lm, y); };
        auto neg = [&](double y) { return jump_density(lm, -y); };
        const double mass = integrate_adaptive(pos, 0.01, 1.0) + integrate_semi_infinite(pos, 1.0) +
                            integrate_adaptive(neg, 0.01, 1.0) + integrate_semi_infinite(neg, 1.0);
        const double cut = m.intensity_up() * (1 - std::exp(-0.01 * m.size_rate_up())) +
                           m.intensity_down() * (1 - std::exp(-0.01 * m.size_rate_down()));
        CHECK(mass + cut == doctest::Approx(m.total_intensity()).epsilon(1e-8));
    }
}

TEST_CASE("property: smoothed abs stays within 2 delta log 2 of |x|") {
    for (double delta : {1e-3, 0.1, 1.0, 7.5}) {
        const auto c = CostSpec::smoothed_abs(delta);
        double worst = 0.0;
        for (int i = 0; i <= 100000; ++i) {
            const double x = -50.0 * delta + 100.0 * delta * i / 100000.0;
            worst = std::max(worst, std::abs(c(x) - std::abs(x)));
            REQUIRE(c(x) >= 0.0);
        }
        CHECK(worst <= 2 * delta * std::log(2.0) + 1e-12);
    }
}
