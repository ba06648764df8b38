#pragma once

#include "reflex/ergodic.hpp"
#include "reflex/levy_model.hpp"
#include "reflex/numerics.hpp"
#include "reflex/simulator.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace reflex {

enum class Command { solve_ergodic, solve_discounted, simulate, sweep, validate };

[[nodiscard]] std::string_view to_string(Command c) noexcept;
/// Throws ConfigError for unknown names.
[[nodiscard]] Command command_from_string(std::string_view name);

enum class OutputFormat { json, csv };

[[nodiscard]] std::string_view to_string(OutputFormat f) noexcept;
[[nodiscard]] OutputFormat output_format_from_string(std::string_view name);

inline constexpr int kSchemaVersion = 1;

/// Solver selection. `general` forces the numeric 2-D search for ergodic runs.
struct SolverSpec {
    bool general = false;
    BetaOrientation orientation = BetaOrientation::positivity;
    std::optional<Interval> lower_range;
    std::optional<Interval> upper_range;
};

enum class Estimator { ergodic, discounted, stopping_game, histogram };

[[nodiscard]] std::string_view to_string(Estimator e) noexcept;
[[nodiscard]] Estimator estimator_from_string(std::string_view name);

struct SimulateSpec {
    Estimator estimator = Estimator::ergodic;
    double lower = 0.0;
    double upper = 1.0;
    int n_bins = 20;
    /// Directory for per-path CSV traces; empty disables them.
    std::string trace_dir;
    int trace_paths = 1;
};

/// One solve per value of `parameter`, which is one of q (total price, split
/// evenly), lower_price, upper_price, eps or model.<field>.
struct SweepSpec {
    std::string parameter;
    std::vector<double> values;
    Command target = Command::solve_ergodic;
};

struct OutputSpec {
    std::string path;
    OutputFormat format = OutputFormat::json;
};

struct RunConfig {
    int schema_version = kSchemaVersion;
    Command command = Command::solve_ergodic;
    LevyModel model = CompoundPoissonTwoExp{1.0, 2.0, 2.0, 1.0};
    CostSpec cost;
    Quotes quotes{1.0, 1.0};
    std::optional<double> eps;
    SolverSpec solver;
    std::optional<SimConfig> sim;
    std::optional<SimulateSpec> simulate;
    std::optional<SweepSpec> sweep;
    OutputSpec output;

    /// True when the command runs in the discounted regime.
    [[nodiscard]] bool discounted() const noexcept;
    /// Cross-field checks; throws ConfigError or PreconditionError with a field path.
    void validate() const;
};

/// Parses a JSON document. Syntax errors report line and column; schema errors
/// report the field path. Unknown keys are rejected.
[[nodiscard]] RunConfig parse_config(const std::string& text);
[[nodiscard]] RunConfig load_config(const std::string& file);

[[nodiscard]] nlohmann::json to_json(const LevyModel& model);
[[nodiscard]] LevyModel model_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json to_json(const CostSpec& cost);
[[nodiscard]] CostSpec cost_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json to_json(const Quotes& quotes);
[[nodiscard]] nlohmann::json to_json(const SimConfig& sim);
/// Full echo of a configuration; parse_config(to_json(c).dump()) reproduces c.
[[nodiscard]] nlohmann::json to_json(const RunConfig& config);

}  // namespace reflex
