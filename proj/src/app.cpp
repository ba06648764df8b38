#include "reflex/app.hpp"

#include "reflex/discounted.hpp"
#include "reflex/optimizer.hpp"
#include "reflex/report.hpp"
#include "reflex/simulator.hpp"

#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

namespace reflex {

using nlohmann::json;

int exit_code_for(const Error& e) noexcept {
    return e.is_validation() || e.kind() == ErrorKind::unsupported ? kExitValidation : kExitNumerical;
}

namespace {

BarrierSolution solve(const RunConfig& c) {
    const auto& sv = c.solver;
    if (c.command == Command::solve_discounted || (c.sweep && c.sweep->target == Command::solve_discounted)) {
        const auto& m = std::get<JumpDiffusionTwoExp>(c.model);
        return solve_discounted_jd(m, *c.eps, c.quotes, sv.lower_range.value_or(default_lower_range(c.model)),
                                   sv.upper_range.value_or(default_upper_range(c.model)));
    }
    const bool ranged = sv.lower_range || sv.upper_range;
    if (!sv.general && !ranged) {
        if (const auto* m = std::get_if<CompoundPoissonTwoExp>(&c.model);
            m && std::holds_alternative<AbsCost>(c.cost.kind()))
            return solve_ergodic_cpp(*m, c.quotes);
        if (const auto* m = std::get_if<StableFiniteMean>(&c.model);
            m && std::holds_alternative<SquareCost>(c.cost.kind()))
            return solve_ergodic_stable(*m, c.quotes, sv.orientation);
    }
    return solve_ergodic_general(c.model, c.cost, c.quotes, sv.lower_range.value_or(default_lower_range(c.model)),
                                 sv.upper_range.value_or(default_upper_range(c.model)), sv.orientation);
}

// Applies one sweep value to a copy of the configuration.
RunConfig with_parameter(RunConfig c, const std::string& parameter, double value) {
    if (parameter == "q") {
        c.quotes = Quotes::even(value);
    } else if (parameter == "lower_price") {
        c.quotes = Quotes(value, c.quotes.upper());
    } else if (parameter == "upper_price") {
        c.quotes = Quotes(c.quotes.lower(), value);
    } else if (parameter == "eps") {
        if (!(value > 0.0)) throw ConfigError("sweep.values: eps must be positive");
        c.eps = value;
    } else {
        json m = to_json(c.model);
        m[parameter.substr(6)] = value;
        try {
            c.model = model_from_json(m);
        } catch (const DomainError& e) {
            throw ConfigError("sweep.values: " + std::string(e.what()));
        }
    }
    return c;
}

// fn(i) for i in [0, n) on up to `jobs` threads; the first failure by index is rethrown.
template <class T, class Fn>
std::vector<T> parallel_indexed(int n, int jobs, Fn&& fn) {
    std::vector<T> out(static_cast<std::size_t>(n));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
    const int workers = std::max(1, std::min(jobs, n));
    const auto work = [&](int w) {
        for (int i = w; i < n; i += workers) {
            try {
                out[static_cast<std::size_t>(i)] = fn(i);
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(work, w);
    work(0);
    for (auto& t : pool) t.join();
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

std::optional<double> ergodic_analytic(const RunConfig& c, double a, double b) {
    if (std::holds_alternative<JumpDiffusionTwoExp>(c.model) || !(a <= 0.0 && 0.0 <= b)) return std::nullopt;
    if (const auto* m = std::get_if<CompoundPoissonTwoExp>(&c.model);
        m && std::holds_alternative<AbsCost>(c.cost.kind()))
        return ergodic_cost_cpp(*m, c.quotes, a, b - a);
    return ergodic_cost_general(c.model, c.cost, c.quotes, a, b - a, c.solver.orientation);
}

std::optional<StationaryMeasure> stationary_law(const RunConfig& c, double d) {
    if (const auto* m = std::get_if<CompoundPoissonTwoExp>(&c.model)) return stationary_cpp(*m, d);
    if (const auto* m = std::get_if<StableFiniteMean>(&c.model)) return stationary_stable(*m, d, c.solver.orientation);
    return std::nullopt;
}

void write_traces(const RunConfig& c, const SimulateSpec& s) {
    if (s.trace_dir.empty() || s.trace_paths == 0) return;
    std::filesystem::create_directories(s.trace_dir);
    for (int i = 0; i < s.trace_paths; ++i) {
        RngStream rng(c.sim->master_seed, static_cast<std::uint64_t>(i));
        const auto p = simulate_reflected(c.model, s.lower, s.upper, *c.sim, rng);
        write_path_csv(p, (std::filesystem::path(s.trace_dir) / ("path_" + std::to_string(i) + ".csv")).string());
    }
}

void run_simulate(const RunConfig& c, const RunOptions& o, RunOutcome& out) {
    const auto& s = *c.simulate;
    const auto& cfg = *c.sim;
    json result{{"estimator", to_string(s.estimator)}, {"lower", s.lower}, {"upper", s.upper}};
    if (s.estimator == Estimator::histogram) {
        const auto h = occupation_histogram(c.model, s.lower, s.upper, cfg, s.n_bins, o.jobs);
        result["histogram"] = to_json(h);
        CsvTable t{kHistogramColumns, {}};
        std::vector<double> expected;
        if (const auto pi = stationary_law(c, s.upper - s.lower)) {
            expected = expected_categories(*pi, s.n_bins, h.separate_atoms);
            const auto chi = occupation_chi_square(h, expected);
            result["expected"] = expected;
            result["chi_square"] = {{"statistic", encode_number(chi.statistic)},
                                    {"dof", chi.dof},
                                    {"critical", encode_number(chi.critical)},
                                    {"level", 0.99},
                                    {"pass", chi.pass}};
        }
        const double w = (s.upper - s.lower) / s.n_bins;
        const auto cell = [&](std::size_t k) { return k < expected.size() ? format_number(expected[k]) : ""; };
        for (std::size_t k = 0; k < h.fractions.size(); ++k) {
            t.rows.push_back({"bin_" + std::to_string(k), format_number(s.lower + w * k),
                              format_number(s.lower + w * (k + 1)), format_number(h.fractions[k]),
                              format_number(h.std_errors[k]), cell(k)});
        }
        if (h.separate_atoms) {
            const std::size_t n = h.fractions.size();
            t.rows.push_back({"atom_lower", format_number(s.lower), format_number(s.lower), format_number(h.atom_low),
                              format_number(h.atom_low_se), cell(n)});
            t.rows.push_back({"atom_upper", format_number(s.upper), format_number(s.upper),
                              format_number(h.atom_high), format_number(h.atom_high_se), cell(n + 1)});
        }
        out.csv = t.str();
    } else {
        SimEstimate e;
        std::optional<double> analytic;
        switch (s.estimator) {
            case Estimator::ergodic:
                e = estimate_ergodic_cost(c.model, c.cost, c.quotes, s.lower, s.upper, cfg, o.jobs);
                analytic = ergodic_analytic(c, s.lower, s.upper);
                break;
            case Estimator::discounted:
                e = estimate_discounted_cost(c.model, c.cost, c.quotes, *c.eps, s.lower, s.upper, cfg, o.jobs);
                break;
            default: {
                const auto& m = std::get<JumpDiffusionTwoExp>(c.model);
                e = estimate_dynkin_payoff(m, *c.eps, c.quotes, s.lower, s.upper, cfg.x0, cfg, o.jobs);
                if (cfg.x0 == 0.0) analytic = dynkin_payoff_M(m, *c.eps, c.quotes, s.lower, s.upper);
            }
        }
        result["estimate"] = to_json(e);
        std::string a_cell, z_cell;
        if (analytic) {
            const double z = e.std_error > 0.0 ? (e.mean - *analytic) / e.std_error : 0.0;
            result["analytic"] = encode_number(*analytic);
            result["z_score"] = encode_number(z);
            result["within_3_stderr"] = std::abs(e.mean - *analytic) <= 3.0 * e.std_error;
            a_cell = format_number(*analytic);
            z_cell = format_number(z);
        }
        out.csv = CsvTable{kEstimateColumns,
                           {{std::string(to_string(s.estimator)), format_number(s.lower), format_number(s.upper),
                             format_number(e.mean), format_number(e.std_error), std::to_string(e.n),
                             std::to_string(e.master_seed), a_cell, z_cell}}}
                      .str();
    }
    write_traces(c, s);
    out.report["result"] = result;
}

void run_sweep(const RunConfig& c, const RunOptions& o, RunOutcome& out) {
    const auto& sw = *c.sweep;
    const int n = static_cast<int>(sw.values.size());
    const auto rows = parallel_indexed<BarrierSolution>(
        n, o.jobs, [&](int i) { return solve(with_parameter(c, sw.parameter, sw.values[static_cast<std::size_t>(i)])); });
    json arr = json::array();
    CsvTable t{kSweepColumns, {}};
    for (int i = 0; i < n; ++i) {
        const auto& s = rows[static_cast<std::size_t>(i)];
        const double v = sw.values[static_cast<std::size_t>(i)];
        arr.push_back({{"index", i}, {"value", encode_number(v)}, {"solution", to_json(s)}});
        t.rows.push_back({std::to_string(i), sw.parameter, format_number(v), format_number(s.a_star),
                          format_number(s.b_star), format_number(s.d_star()), format_number(s.objective_value),
                          std::string(to_string(s.method)), s.boundary ? "true" : "false"});
    }
    out.report["result"] = {{"parameter", sw.parameter}, {"rows", arr}};
    out.csv = t.str();
}

void run_validate(const RunOptions& o, RunOutcome& out) {
    ValidationOptions vo;
    vo.jobs = o.jobs;
    vo.skip_monte_carlo = o.skip_monte_carlo;
    vo.seed = o.seed;
    vo.only = o.only;
    const auto results = run_validation(vo);
    json arr = json::array();
    CsvTable t{{"id", "title", "status", "seconds", "time_limit", "measurement", "value", "target", "tolerance",
                "rule", "pass"},
               {}};
    int passed = 0, failed = 0, skipped = 0;
    for (const auto& r : results) {
        arr.push_back(to_json(r));
        out.summary.push_back(r.summary_line());
        const std::string status = r.skipped ? "skip" : r.pass() ? "pass" : "fail";
        (r.skipped ? skipped : r.pass() ? passed : failed) += 1;
        for (const auto& m : r.measurements) {
            t.rows.push_back({std::to_string(r.id), r.title, status, format_number(r.seconds),
                              format_number(r.time_limit), m.name, format_number(m.value), format_number(m.target),
                              format_number(m.tolerance), m.rule, m.pass ? "true" : "false"});
        }
        if (r.measurements.empty()) {
            t.rows.push_back({std::to_string(r.id), r.title, status, format_number(r.seconds),
                              format_number(r.time_limit), r.error, "", "", "", "", ""});
        }
    }
    out.report["result"] = {{"criteria", arr}, {"passed", passed}, {"failed", failed}, {"skipped", skipped}};
    out.csv = t.str();
    if (failed > 0) out.exit_code = kExitValidation;
}

}  // namespace

RunOutcome run(const RunConfig& config_in, const RunOptions& options) {
    RunOutcome out;
    RunConfig config = config_in;
    if (options.seed && config.sim) config.sim->master_seed = *options.seed;
    out.report = {{"schema_version", kSchemaVersion},
                  {"command", to_string(config.command)},
                  {"input", to_json(config)},
                  {"jobs", options.jobs}};
    try {
        config.validate();
        switch (config.command) {
            case Command::solve_ergodic:
            case Command::solve_discounted: {
                const auto s = solve(config);
                out.report["result"] = to_json(s);
                out.csv = CsvTable{kSolutionColumns, {solution_row(s)}}.str();
                break;
            }
            case Command::simulate: run_simulate(config, options, out); break;
            case Command::sweep: run_sweep(config, options, out); break;
            case Command::validate: run_validate(options, out); break;
        }
        out.report["status"] = out.exit_code == kExitOk ? "ok" : "failed";
    } catch (const Error& e) {
        out.exit_code = exit_code_for(e);
        out.report["status"] = "error";
        out.report["error"] = {{"kind", to_string(e.kind())}, {"message", e.what()}};
        out.csv = CsvTable{{"status", "kind", "message"}, {{"error", std::string(to_string(e.kind())), e.what()}}}.str();
    }
    out.report["exit_code"] = out.exit_code;
    return out;
}

void write_outcome(const RunOutcome& outcome, const OutputSpec& output) {
    const std::string text = output.format == OutputFormat::json ? outcome.report.dump(2) + "\n" : outcome.csv;
    if (output.path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(output.path);
    if (!f) throw ConfigError("cannot write output file '" + output.path + "'");
    f << text;
}

}  // namespace reflex
