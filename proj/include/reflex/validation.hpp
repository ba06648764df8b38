#pragma once

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace reflex {

/// One numeric check inside a criterion; `rule` renders the comparison.
struct Measurement {
    std::string name;
    double value = 0.0;
    double target = 0.0;
    double tolerance = 0.0;
    std::string rule;
    bool pass = false;
};

/// |value - target| <= tolerance.
[[nodiscard]] Measurement near(std::string name, double value, double target, double tolerance);
/// |value - target| <= tolerance |target|.
[[nodiscard]] Measurement near_relative(std::string name, double value, double target, double tolerance);
/// value <= limit.
[[nodiscard]] Measurement at_most(std::string name, double value, double limit);
/// value == target exactly.
[[nodiscard]] Measurement exactly(std::string name, double value, double target);

struct CriterionResult {
    int id = 0;
    std::string title;
    std::vector<Measurement> measurements;
    double seconds = 0.0;
    double time_limit = 0.0;
    bool uses_monte_carlo = false;
    bool skipped = false;
    /// Set when the criterion aborted with a library error.
    std::string error;

    [[nodiscard]] bool pass() const;
    /// One line: PASS/FAIL/SKIP, id, title, runtime and the failing measurements.
    [[nodiscard]] std::string summary_line() const;
};

struct ValidationOptions {
    int jobs = 1;
    bool skip_monte_carlo = false;
    /// Replaces the pinned master seeds of the Monte Carlo criteria.
    std::optional<std::uint64_t> seed;
    /// Runs only the listed ids when non-empty.
    std::vector<int> only;
};

inline constexpr int kCriterionCount = 12;

[[nodiscard]] CriterionResult run_criterion(int id, const ValidationOptions& options);
[[nodiscard]] std::vector<CriterionResult> run_validation(const ValidationOptions& options);

[[nodiscard]] nlohmann::json to_json(const CriterionResult& r);

}  // namespace reflex
