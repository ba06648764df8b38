#pragma once

#include "reflex/config.hpp"
#include "reflex/discounted.hpp"
#include "reflex/optimizer.hpp"
#include "reflex/simulator.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace reflex {

/// Finite values become JSON numbers (shortest form that parses back to the
/// same double); inf, -inf and nan become the strings "inf", "-inf", "nan".
[[nodiscard]] nlohmann::json encode_number(double x);
/// Inverse of encode_number; throws ConfigError on anything else.
[[nodiscard]] double decode_number(const nlohmann::json& j);

/// %.17g, with inf, -inf and nan spelled out.
[[nodiscard]] std::string format_number(double x);

[[nodiscard]] nlohmann::json to_json(const BarrierSolution& s);
[[nodiscard]] BarrierSolution solution_from_json(const nlohmann::json& j);

[[nodiscard]] nlohmann::json to_json(const SimEstimate& e);
[[nodiscard]] SimEstimate estimate_from_json(const nlohmann::json& j);

[[nodiscard]] nlohmann::json to_json(const OccupationHistogram& h);

/// Minimal CSV table: fixed header, rows rendered with format_number.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    [[nodiscard]] std::string str() const;
};

inline const std::vector<std::string> kSolutionColumns{
    "regime", "method", "a_star", "b_star", "d_star", "objective_value", "boundary", "notes"};
[[nodiscard]] std::vector<std::string> solution_row(const BarrierSolution& s);

inline const std::vector<std::string> kEstimateColumns{"estimator", "lower",       "upper", "mean",
                                                       "std_error", "n",           "master_seed",
                                                       "analytic",  "z_score"};

inline const std::vector<std::string> kHistogramColumns{"category", "bin_lower", "bin_upper", "fraction",
                                                        "std_error", "expected"};

inline const std::vector<std::string> kSweepColumns{"index",  "parameter", "value",           "a_star",
                                                    "b_star", "d_star",    "objective_value", "method",
                                                    "boundary"};

}  // namespace reflex
