#include "reflex/config.hpp"

#include "reflex/errors.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace reflex {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError(path + ": " + what);
}

// Typed access to one JSON object, remembering which keys were read.
class Node {
public:
    Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail(path_, "expected an object");
    }

    [[nodiscard]] bool has(const std::string& key) const { return j_.contains(key); }

    [[nodiscard]] std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const json& at(const std::string& key) {
        if (!j_.contains(key)) fail(field(key), "required field is missing");
        seen_.insert(key);
        return j_.at(key);
    }

    double number(const std::string& key) {
        const json& v = at(key);
        if (!v.is_number()) fail(field(key), "expected a number");
        return v.get<double>();
    }
    double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

    std::int64_t integer(const std::string& key, std::int64_t fallback) {
        if (!has(key)) return fallback;
        const json& v = at(key);
        if (!v.is_number_integer()) fail(field(key), "expected an integer");
        return v.get<std::int64_t>();
    }

    std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) {
        if (!has(key)) return fallback;
        const json& v = at(key);
        if (!v.is_number_unsigned()) fail(field(key), "expected a non-negative integer");
        return v.get<std::uint64_t>();
    }

    std::string text(const std::string& key) {
        const json& v = at(key);
        if (!v.is_string()) fail(field(key), "expected a string");
        return v.get<std::string>();
    }
    std::string text(const std::string& key, const std::string& fallback) { return has(key) ? text(key) : fallback; }

    bool boolean(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const json& v = at(key);
        if (!v.is_boolean()) fail(field(key), "expected true or false");
        return v.get<bool>();
    }

    Interval interval(const std::string& key) {
        const json& v = at(key);
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
            fail(field(key), "expected [lo, hi]");
        Interval r{v[0].get<double>(), v[1].get<double>()};
        if (!(r.lo <= r.hi)) fail(field(key), "expected lo <= hi");
        return r;
    }

    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            if (!seen_.count(key)) fail(field(key), "unknown field");
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

template <class Fn>
auto with_path(const std::string& path, Fn&& fn) {
    try {
        return fn();
    } catch (const DomainError& e) {
        fail(path, e.what());
    }
}

LevyModel read_model(Node n) {
    const std::string kind = n.text("kind");
    LevyModel m = with_path(n.field("kind"), [&]() -> LevyModel {
        if (kind == "compound_poisson")
            return CompoundPoissonTwoExp(n.number("intensity_up"), n.number("intensity_down"), n.number("size_rate_up"),
                                         n.number("size_rate_down"));
        if (kind == "jump_diffusion")
            return JumpDiffusionTwoExp(n.number("volatility"), n.number("intensity_up"), n.number("intensity_down"),
                                       n.number("size_rate_up"), n.number("size_rate_down"));
        if (kind == "stable") return StableFiniteMean(n.number("index"), n.number("c_plus"), n.number("c_minus"));
        fail(n.field("kind"), "expected compound_poisson, jump_diffusion or stable, got '" + kind + "'");
    });
    n.finish();
    return m;
}

CostSpec read_cost(Node n) {
    const std::string kind = n.text("kind");
    CostSpec c = with_path(n.field("kind"), [&] {
        if (kind == "abs") return CostSpec::abs();
        if (kind == "half_square") return CostSpec::half_square();
        if (kind == "square") return CostSpec::square();
        if (kind == "smoothed_abs") return CostSpec::smoothed_abs(n.number("delta"));
        if (kind == "zero") return CostSpec::zero();
        fail(n.field("kind"), "expected abs, half_square, square, smoothed_abs or zero, got '" + kind + "'");
    });
    n.finish();
    return c;
}

SimConfig read_sim(Node n) {
    SimConfig s;
    s.master_seed = n.unsigned_integer("master_seed", s.master_seed);
    const auto paths = n.integer("n_paths", s.n_paths);
    if (paths < 1 || paths > 100000000) fail(n.field("n_paths"), "must lie in [1, 1e8]");
    s.n_paths = static_cast<int>(paths);
    s.horizon = n.number("horizon", s.horizon);
    s.time_step = n.number("time_step", s.time_step);
    s.burn_in = n.number("burn_in", s.burn_in);
    s.x0 = n.number("x0", s.x0);
    s.truncation_tol = n.number("truncation_tol", s.truncation_tol);
    n.finish();
    s.validate();
    return s;
}

SimulateSpec read_simulate(Node n) {
    SimulateSpec s;
    s.estimator = with_path(n.field("estimator"), [&] { return estimator_from_string(n.text("estimator")); });
    s.lower = n.number("lower");
    s.upper = n.number("upper");
    if (!(s.lower < s.upper)) fail(n.field("upper"), "must exceed lower");
    const auto bins = n.integer("n_bins", s.n_bins);
    if (bins < 1 || bins > 10000) fail(n.field("n_bins"), "must lie in [1, 10000]");
    s.n_bins = static_cast<int>(bins);
    s.trace_dir = n.text("trace_dir", "");
    const auto traces = n.integer("trace_paths", s.trace_paths);
    if (traces < 0) fail(n.field("trace_paths"), "must be non-negative");
    s.trace_paths = static_cast<int>(traces);
    n.finish();
    return s;
}

SweepSpec read_sweep(Node n) {
    SweepSpec s;
    s.parameter = n.text("parameter");
    const json& v = n.at("values");
    if (!v.is_array() || v.empty()) fail(n.field("values"), "expected a non-empty array of numbers");
    for (const auto& x : v) {
        if (!x.is_number()) fail(n.field("values"), "expected a non-empty array of numbers");
        s.values.push_back(x.get<double>());
    }
    s.target = with_path(n.field("target"), [&] { return command_from_string(n.text("target", "solve-ergodic")); });
    if (s.target != Command::solve_ergodic && s.target != Command::solve_discounted)
        fail(n.field("target"), "expected solve-ergodic or solve-discounted");
    n.finish();
    return s;
}

SolverSpec read_solver(Node n) {
    SolverSpec s;
    s.general = n.text("method", "auto") == "general";
    if (n.has("method") && !s.general && n.text("method") != "auto") fail(n.field("method"), "expected auto or general");
    s.orientation = with_path(n.field("orientation"),
                              [&] { return beta_orientation_from_string(n.text("orientation", "positivity")); });
    if (n.has("lower_range")) s.lower_range = n.interval("lower_range");
    if (n.has("upper_range")) s.upper_range = n.interval("upper_range");
    n.finish();
    return s;
}

// Line and column of a byte offset.
std::string locate(const std::string& text, std::size_t offset) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

bool is_cpp(const LevyModel& m) { return std::holds_alternative<CompoundPoissonTwoExp>(m); }

}  // namespace

std::string_view to_string(Command c) noexcept {
    switch (c) {
        case Command::solve_ergodic: return "solve-ergodic";
        case Command::solve_discounted: return "solve-discounted";
        case Command::simulate: return "simulate";
        case Command::sweep: return "sweep";
        case Command::validate: return "validate";
    }
    return "?";
}

Command command_from_string(std::string_view name) {
    for (auto c : {Command::solve_ergodic, Command::solve_discounted, Command::simulate, Command::sweep,
                   Command::validate}) {
        if (to_string(c) == name) return c;
    }
    throw ConfigError("unknown command '" + std::string(name) + "'");
}

std::string_view to_string(OutputFormat f) noexcept { return f == OutputFormat::json ? "json" : "csv"; }

OutputFormat output_format_from_string(std::string_view name) {
    if (name == "json") return OutputFormat::json;
    if (name == "csv") return OutputFormat::csv;
    throw ConfigError("unknown output format '" + std::string(name) + "' (expected json or csv)");
}

std::string_view to_string(Estimator e) noexcept {
    switch (e) {
        case Estimator::ergodic: return "ergodic";
        case Estimator::discounted: return "discounted";
        case Estimator::stopping_game: return "stopping_game";
        case Estimator::histogram: return "histogram";
    }
    return "?";
}

Estimator estimator_from_string(std::string_view name) {
    for (auto e : {Estimator::ergodic, Estimator::discounted, Estimator::stopping_game, Estimator::histogram}) {
        if (to_string(e) == name) return e;
    }
    throw ConfigError("unknown estimator '" + std::string(name) +
                      "' (expected ergodic, discounted, stopping_game or histogram)");
}

bool RunConfig::discounted() const noexcept {
    switch (command) {
        case Command::solve_discounted: return true;
        case Command::simulate:
            return simulate && (simulate->estimator == Estimator::discounted ||
                                simulate->estimator == Estimator::stopping_game);
        case Command::sweep: return sweep && sweep->target == Command::solve_discounted;
        default: return false;
    }
}

void RunConfig::validate() const {
    if (schema_version != kSchemaVersion)
        fail("schema_version", "unsupported version " + std::to_string(schema_version) + " (this build reads " +
                                   std::to_string(kSchemaVersion) + ")");
    if (command == Command::validate) return;

    if (discounted() && !eps) fail("eps", "required for the discounted regime");
    if (!discounted() && eps) fail("eps", "only allowed for the discounted regime");
    if (eps && (!(*eps > 0.0) || !std::isfinite(*eps))) fail("eps", "must be a finite positive number");
    if ((command == Command::sweep) != sweep.has_value()) fail("sweep", "present if and only if command = sweep");
    if ((command == Command::simulate) != simulate.has_value())
        fail("simulate", "present if and only if command = simulate");
    if (command == Command::simulate && !sim) fail("sim", "required for command = simulate");

    const bool solves_discounted = command == Command::solve_discounted ||
                                   (command == Command::sweep && sweep->target == Command::solve_discounted);
    if (solves_discounted) {
        if (!std::holds_alternative<JumpDiffusionTwoExp>(model))
            fail("model.kind", "the discounted solver needs kind = jump_diffusion");
        if (!std::holds_alternative<HalfSquareCost>(cost.kind()))
            fail("cost.kind", "the discounted solver needs kind = half_square");
    }
    const bool ergodic = !discounted() && command != Command::validate;
    if (ergodic && std::holds_alternative<JumpDiffusionTwoExp>(model) && command != Command::simulate)
        fail("model.kind", "ergodic solvers support compound_poisson and stable only");
    if (ergodic && is_cpp(model)) {
        const auto& m = std::get<CompoundPoissonTwoExp>(model);
        if (!(m.mean() < 0.0)) {
            std::ostringstream os;
            os << "model: mean condition violated: the ergodic compound Poisson analysis needs "
                  "intensity_up/size_rate_up < intensity_down/size_rate_down (negative drift), got "
               << m.intensity_up() / m.size_rate_up() << " >= " << m.intensity_down() / m.size_rate_down();
            throw PreconditionError(os.str());
        }
    }
    if (command == Command::simulate) {
        const auto e = simulate->estimator;
        if (e == Estimator::stopping_game && !std::holds_alternative<JumpDiffusionTwoExp>(model))
            fail("model.kind", "the stopping_game estimator needs kind = jump_diffusion");
        if (e == Estimator::stopping_game && !(simulate->lower < sim->x0 && sim->x0 < simulate->upper))
            fail("sim.x0", "the stopping_game estimator needs simulate.lower < x0 < simulate.upper");
    }
    if (command == Command::sweep) {
        const auto& p = sweep->parameter;
        const bool model_field = p.rfind("model.", 0) == 0;
        if (!model_field && p != "q" && p != "lower_price" && p != "upper_price" && p != "eps")
            fail("sweep.parameter", "expected q, lower_price, upper_price, eps or model.<field>, got '" + p + "'");
        if (p == "eps" && !solves_discounted) fail("sweep.parameter", "eps sweeps need target = solve-discounted");
        if (model_field) {
            json probe = to_json(model);
            if (p.substr(6) == "kind" || !probe.contains(p.substr(6)))
                fail("sweep.parameter", "model has no numeric field '" + p.substr(6) + "'");
        }
    }
}

RunConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        std::string detail = e.what();
        if (const auto k = detail.find("syntax error"); k != std::string::npos) detail = detail.substr(k);
        throw ConfigError("parse error at " + locate(text, e.byte == 0 ? 0 : e.byte - 1) + ": " + detail);
    }
    Node root(doc, "");
    RunConfig c;
    c.schema_version = static_cast<int>(root.integer("schema_version", -1));
    if (!root.has("schema_version")) fail("schema_version", "required field is missing");
    c.command = with_path("command", [&] { return command_from_string(root.text("command")); });
    if (c.command != Command::validate || root.has("model")) {
        c.model = read_model(Node(root.at("model"), "model"));
        const json& q = root.at("quotes");
        Node qn(q, "quotes");
        c.quotes = with_path("quotes", [&] { return Quotes(qn.number("lower"), qn.number("upper")); });
        qn.finish();
    }
    if (root.has("eps")) c.eps = root.number("eps");
    if (root.has("cost")) {
        c.cost = read_cost(Node(root.at("cost"), "cost"));
    } else if (c.command == Command::solve_discounted ||
               (root.has("sweep") && doc["sweep"].value("target", "") == "solve-discounted") ||
               (root.has("simulate") && doc["simulate"].value("estimator", "") == "discounted" &&
                std::holds_alternative<JumpDiffusionTwoExp>(c.model))) {
        c.cost = CostSpec::half_square();
    } else if (std::holds_alternative<StableFiniteMean>(c.model)) {
        c.cost = CostSpec::square();
    }
    if (root.has("solver")) c.solver = read_solver(Node(root.at("solver"), "solver"));
    if (root.has("sim")) c.sim = read_sim(Node(root.at("sim"), "sim"));
    if (root.has("simulate")) c.simulate = read_simulate(Node(root.at("simulate"), "simulate"));
    if (root.has("sweep")) c.sweep = read_sweep(Node(root.at("sweep"), "sweep"));
    if (root.has("output")) {
        Node o(root.at("output"), "output");
        c.output.path = o.text("path", "");
        c.output.format = with_path("output.format", [&] { return output_format_from_string(o.text("format", "json")); });
        o.finish();
    }
    root.finish();
    c.validate();
    return c;
}

RunConfig load_config(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot read config file '" + file + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return parse_config(os.str());
}

json to_json(const LevyModel& model) {
    return std::visit(
        [](const auto& m) -> json {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, CompoundPoissonTwoExp>) {
                return {{"kind", "compound_poisson"},
                        {"intensity_up", m.intensity_up()},
                        {"intensity_down", m.intensity_down()},
                        {"size_rate_up", m.size_rate_up()},
                        {"size_rate_down", m.size_rate_down()}};
            } else if constexpr (std::is_same_v<T, JumpDiffusionTwoExp>) {
                const auto& j = m.jumps();
                return {{"kind", "jump_diffusion"},
                        {"volatility", m.volatility()},
                        {"intensity_up", j.intensity_up()},
                        {"intensity_down", j.intensity_down()},
                        {"size_rate_up", j.size_rate_up()},
                        {"size_rate_down", j.size_rate_down()}};
            } else {
                return {{"kind", "stable"}, {"index", m.index()}, {"c_plus", m.c_plus()}, {"c_minus", m.c_minus()}};
            }
        },
        model);
}

LevyModel model_from_json(const json& j) { return read_model(Node(j, "model")); }

json to_json(const CostSpec& cost) {
    json j{{"kind", cost.name()}};
    if (const auto* s = std::get_if<SmoothedAbsCost>(&cost.kind())) j["delta"] = s->delta;
    return j;
}

CostSpec cost_from_json(const json& j) { return read_cost(Node(j, "cost")); }

json to_json(const Quotes& quotes) { return {{"lower", quotes.lower()}, {"upper", quotes.upper()}}; }

json to_json(const SimConfig& s) {
    return {{"master_seed", s.master_seed}, {"n_paths", s.n_paths},   {"horizon", s.horizon},
            {"time_step", s.time_step},     {"burn_in", s.burn_in},   {"x0", s.x0},
            {"truncation_tol", s.truncation_tol}};
}

json to_json(const RunConfig& c) {
    json j{{"schema_version", c.schema_version}, {"command", to_string(c.command)}};
    if (c.command == Command::validate) return j;
    j["model"] = to_json(c.model);
    j["cost"] = to_json(c.cost);
    j["quotes"] = to_json(c.quotes);
    if (c.eps) j["eps"] = *c.eps;
    json solver{{"method", c.solver.general ? "general" : "auto"}, {"orientation", to_string(c.solver.orientation)}};
    if (c.solver.lower_range) solver["lower_range"] = {c.solver.lower_range->lo, c.solver.lower_range->hi};
    if (c.solver.upper_range) solver["upper_range"] = {c.solver.upper_range->lo, c.solver.upper_range->hi};
    j["solver"] = solver;
    if (c.sim) j["sim"] = to_json(*c.sim);
    if (c.simulate) {
        const auto& s = *c.simulate;
        j["simulate"] = {{"estimator", to_string(s.estimator)}, {"lower", s.lower},           {"upper", s.upper},
                         {"n_bins", s.n_bins},                  {"trace_dir", s.trace_dir}, {"trace_paths", s.trace_paths}};
    }
    if (c.sweep) {
        j["sweep"] = {{"parameter", c.sweep->parameter},
                      {"values", c.sweep->values},
                      {"target", to_string(c.sweep->target)}};
    }
    j["output"] = {{"path", c.output.path}, {"format", to_string(c.output.format)}};
    return j;
}

}  // namespace reflex
