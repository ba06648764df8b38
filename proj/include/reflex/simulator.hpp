#pragma once

#include "reflex/ergodic.hpp"
#include "reflex/levy_model.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace reflex {

/// Monte Carlo settings. `time_step` is used by the jump-diffusion and stable
/// kinds only; compound Poisson paths are simulated event by event.
struct SimConfig {
    std::uint64_t master_seed = 1;
    int n_paths = 100;
    double horizon = 100.0;
    double time_step = 1e-3;
    double burn_in = 0.0;
    double x0 = 0.0;
    /// Discounted and stopping-game estimators require exp(-eps horizon) <= truncation_tol.
    double truncation_tol = 1e-6;

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

/// Random stream for replication `index`: mt19937_64 seeded through seed_seq
/// with the 32-bit halves of (master_seed, index). Uniforms are computed
/// directly from the 64-bit output; the other distributions come from Boost.Random. Draws are identical across standard libraries.
class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::uint64_t index);

    /// Uniform on the open interval (0, 1).
    double uniform();
    double exponential(double rate);
    double normal();
    std::uint64_t poisson(double mean);

    static constexpr std::string_view scheme = "mt19937_64/seed_seq(master_lo,master_hi,index_lo,index_hi)";

private:
    std::mt19937_64 engine_;
};

/// One increment of the free (unreflected) process over dt > 0.
/// Stable increments use the Chambers-Mallows-Stuck construction with skewness
/// (c_plus - c_minus)/(c_plus + c_minus) and the scale that reproduces the
/// tails c_plus x^-index / index and c_minus |x|^-index / index.
double sample_increment(const LevyModel& model, double dt, RngStream& stream);

/// Scale of the unit-time stable increment in the Chambers-Mallows-Stuck form.
[[nodiscard]] double stable_increment_scale(const StableFiniteMean& model);

/// A reflected path. Entry k holds the state after the k-th event (jump or
/// time step); entry 0 is time 0 after the initial push.
struct PathRecord {
    double lower = 0.0;
    double upper = 0.0;
    double x0 = 0.0;
    std::vector<double> times;
    std::vector<double> states;
    /// Cumulative lower and upper pushes, starting from the initial pushes.
    std::vector<double> u_cum;
    std::vector<double> d_cum;
    /// Cumulative free increments.
    std::vector<double> free_cum;
};

struct SkorokhodCheck {
    bool contained = true;
    bool monotone = true;
    bool complementary = true;
    /// max_k |states[k] - (x0 + free_cum[k] + u_cum[k] - d_cum[k])|
    double identity_error = 0.0;

    [[nodiscard]] bool ok(double identity_tol = 1e-9) const noexcept {
        return contained && monotone && complementary && identity_error <= identity_tol;
    }
};

[[nodiscard]] SkorokhodCheck check_skorokhod(const PathRecord& path);

/// Reflected path on [a, b] over [0, cfg.horizon]. Compound Poisson paths are
/// exact; the other kinds step by cfg.time_step and clamp after each step.
/// Throws DomainError unless a < b.
[[nodiscard]] PathRecord simulate_reflected(const LevyModel& model, double a, double b, const SimConfig& cfg,
                                            RngStream& stream);

struct SimEstimate {
    double mean = 0.0;
    /// Sample standard deviation over sqrt(n); 0 when n = 1.
    double std_error = 0.0;
    int n = 0;
    std::uint64_t master_seed = 0;
    std::string stream_scheme{RngStream::scheme};
    std::map<std::string, double> diagnostics;
};

/// Mean and standard error of per-replication values, summed in index order.
[[nodiscard]] SimEstimate summarize(const std::vector<double>& values, std::uint64_t master_seed);

/// Runs fn(i) for i in [0, n) on `jobs` threads (0 = hardware concurrency).
/// Results are stored by index, so reductions do not depend on `jobs`.
std::vector<double> run_replications(int n, int jobs, const std::function<double(int)>& fn);

/// Long-run average of c(X) ds + q_u dU + q_d dD over [burn_in, horizon] per path.
[[nodiscard]] SimEstimate estimate_ergodic_cost(const LevyModel& model, const CostSpec& cost, const Quotes& quotes,
                                                double a, double b, const SimConfig& cfg, int jobs = 1);

/// E[int e^{-eps s} (c(X) ds + q_u dU + q_d dD)] plus the undiscounted initial
/// pushes. Diagnostics carry the truncation bound
/// e^{-eps T} (max_{[a,b]} |c| + q r) / eps with r the observed push rate.
/// Throws ConfigError when exp(-eps horizon) > cfg.truncation_tol.
[[nodiscard]] SimEstimate estimate_discounted_cost(const LevyModel& model, const CostSpec& cost, const Quotes& quotes,
                                                   double eps, double a, double b, const SimConfig& cfg,
                                                   int jobs = 1);

/// Stopping-game payoff on the free path started at x0 (cfg.x0 is ignored):
/// int_0^{tau ^ sigma} e^{-eps s} X_s ds - q_u e^{-eps tau} 1{tau < sigma}
/// + q_d e^{-eps sigma} 1{sigma < tau}. Exits are detected at the end of a
/// step (no bridge correction). Requires a < x0 < b; throws ConfigError when
/// exp(-eps horizon) > cfg.truncation_tol.
[[nodiscard]] SimEstimate estimate_dynkin_payoff(const JumpDiffusionTwoExp& model, double eps, const Quotes& quotes,
                                                 double a, double b, double x0, const SimConfig& cfg, int jobs = 1);

/// Post-burn-in occupation of [a, b] split into equal bins. For compound
/// Poisson paths the time spent exactly at a or b is kept apart as atoms;
/// for the other kinds it falls into the end bins.
struct OccupationHistogram {
    double lower = 0.0;
    double upper = 0.0;
    bool separate_atoms = false;
    std::vector<double> fractions;
    std::vector<double> std_errors;
    double atom_low = 0.0;
    double atom_low_se = 0.0;
    double atom_high = 0.0;
    double atom_high_se = 0.0;
    /// Row per path: bin fractions, then the two atoms when separate.
    Eigen::MatrixXd per_path;
};

[[nodiscard]] OccupationHistogram occupation_histogram(const LevyModel& model, double a, double b,
                                                       const SimConfig& cfg, int n_bins, int jobs = 1);

/// Masses of the bins of [0, width] (and atoms) under a stationary law, in the
/// category order of OccupationHistogram::per_path.
[[nodiscard]] std::vector<double> expected_categories(const StationaryMeasure& pi, int n_bins, bool separate_atoms);

struct ChiSquareResult {
    double statistic = 0.0;
    int dof = 0;
    double critical = 0.0;
    bool pass = false;
};

/// Hotelling T^2 test of the mean per-path occupation vector against `expected`
/// (last category dropped), with the F-based critical value at `level`.
/// Tends to the chi-square test with dof = categories - 1 as paths grow.
[[nodiscard]] ChiSquareResult occupation_chi_square(const OccupationHistogram& hist,
                                                    const std::vector<double>& expected, double level = 0.99);

/// One CSV per path with columns time,state,u_cum,d_cum.
void write_path_csv(const PathRecord& path, const std::string& file);

}  // namespace reflex
