#include "reflex/report.hpp"

#include "reflex/errors.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace reflex {

using nlohmann::json;

json encode_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return x;
}

double decode_number(const json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
    }
    throw ConfigError("expected a number, got " + j.dump());
}

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

json encode_map(const std::map<std::string, double>& m) {
    json j = json::object();
    for (const auto& [k, v] : m) j[k] = encode_number(v);
    return j;
}

std::map<std::string, double> decode_map(const json& j) {
    std::map<std::string, double> m;
    for (const auto& [k, v] : j.items()) m[k] = decode_number(v);
    return m;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

json to_json(const BarrierSolution& s) {
    json j{{"a_star", encode_number(s.a_star)},
           {"b_star", encode_number(s.b_star)},
           {"d_star", encode_number(s.d_star())},
           {"objective_value", encode_number(s.objective_value)},
           {"regime", to_string(s.regime)},
           {"method", to_string(s.method)},
           {"boundary", s.boundary},
           {"notes", s.notes},
           {"diagnostics", encode_map(s.diagnostics)}};
    if (s.regime == Regime::discounted && s.diagnostics.count("rho1")) {
        j["roots"] = {encode_number(s.diagnostics.at("rho1")), encode_number(s.diagnostics.at("rho2")),
                      encode_number(s.diagnostics.at("rho3")), encode_number(s.diagnostics.at("rho4"))};
    }
    return j;
}

BarrierSolution solution_from_json(const json& j) {
    try {
        BarrierSolution s;
        s.a_star = decode_number(j.at("a_star"));
        s.b_star = decode_number(j.at("b_star"));
        s.objective_value = decode_number(j.at("objective_value"));
        s.regime = regime_from_string(j.at("regime").get<std::string>());
        s.method = method_from_string(j.at("method").get<std::string>());
        s.boundary = j.at("boundary").get<bool>();
        s.notes = j.at("notes").get<std::string>();
        s.diagnostics = decode_map(j.at("diagnostics"));
        return s;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed solution report: ") + e.what());
    }
}

json to_json(const SimEstimate& e) {
    return {{"mean", encode_number(e.mean)},
            {"std_error", encode_number(e.std_error)},
            {"n", e.n},
            {"master_seed", e.master_seed},
            {"stream_scheme", e.stream_scheme},
            {"diagnostics", encode_map(e.diagnostics)}};
}

SimEstimate estimate_from_json(const json& j) {
    try {
        SimEstimate e;
        e.mean = decode_number(j.at("mean"));
        e.std_error = decode_number(j.at("std_error"));
        e.n = j.at("n").get<int>();
        e.master_seed = j.at("master_seed").get<std::uint64_t>();
        e.stream_scheme = j.at("stream_scheme").get<std::string>();
        e.diagnostics = decode_map(j.at("diagnostics"));
        return e;
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("malformed estimate report: ") + ex.what());
    }
}

json to_json(const OccupationHistogram& h) {
    json fr = json::array(), se = json::array();
    for (std::size_t i = 0; i < h.fractions.size(); ++i) {
        fr.push_back(encode_number(h.fractions[i]));
        se.push_back(encode_number(h.std_errors[i]));
    }
    json j{{"lower", encode_number(h.lower)},
           {"upper", encode_number(h.upper)},
           {"separate_atoms", h.separate_atoms},
           {"fractions", fr},
           {"std_errors", se},
           {"n_paths", h.per_path.rows()}};
    if (h.separate_atoms) {
        j["atom_low"] = encode_number(h.atom_low);
        j["atom_low_se"] = encode_number(h.atom_low_se);
        j["atom_high"] = encode_number(h.atom_high);
        j["atom_high_se"] = encode_number(h.atom_high_se);
    }
    return j;
}

std::string CsvTable::str() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << csv_field(header[i]);
    os << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_field(row[i]);
        os << '\n';
    }
    return os.str();
}

std::vector<std::string> solution_row(const BarrierSolution& s) {
    return {std::string(to_string(s.regime)),
            std::string(to_string(s.method)),
            format_number(s.a_star),
            format_number(s.b_star),
            format_number(s.d_star()),
            format_number(s.objective_value),
            s.boundary ? "true" : "false",
            s.notes};
}

}  // namespace reflex
