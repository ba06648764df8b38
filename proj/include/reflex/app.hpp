#pragma once

#include "reflex/config.hpp"
#include "reflex/errors.hpp"
#include "reflex/validation.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace reflex {

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitNumerical = 2 };

/// Input problems (domain, precondition, configuration, unsupported) map to 1,
/// numerical failures to 2.
[[nodiscard]] int exit_code_for(const Error& e) noexcept;

struct RunOptions {
    int jobs = 1;
    /// Replaces sim.master_seed (and the pinned seeds of validate).
    std::optional<std::uint64_t> seed;
    /// validate only: skip the Monte Carlo criteria.
    bool skip_monte_carlo = false;
    /// validate only: restrict to these criterion ids.
    std::vector<int> only;
};

struct RunOutcome {
    int exit_code = kExitOk;
    /// Full report: input echo, result or error.
    nlohmann::json report;
    /// Same content as a fixed-column table.
    std::string csv;
    /// validate only: one line per criterion.
    std::vector<std::string> summary;
};

/// Runs one command. Library errors are caught and reported with their
/// message verbatim; the exit code follows exit_code_for.
[[nodiscard]] RunOutcome run(const RunConfig& config, const RunOptions& options = {});

/// Writes the report in `format` to `path`, or to stdout when `path` is empty.
void write_outcome(const RunOutcome& outcome, const OutputSpec& output);

}  // namespace reflex
