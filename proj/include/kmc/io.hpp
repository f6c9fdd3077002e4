#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kmc/cells.hpp"
#include "kmc/chains.hpp"
#include "kmc/experiments.hpp"
#include "kmc/solver.hpp"

namespace kmc {

using Json = nlohmann::json;

inline std::string format_double(double v) {
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

// ---------------------------------------------------------------------------
// chains
// ---------------------------------------------------------------------------

inline Json chain_to_json(const BoundaryChain& chain) {
    Json pts = Json::array();
    for (Point p : chain.interior.points) pts.push_back(Json::array({p.x, p.y}));
    return Json{{"k", chain.k}, {"a", chain.a}, {"b", chain.b}, {"points", std::move(pts)}};
}

inline BoundaryChain chain_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("k") || !j.contains("a") || !j.contains("b") ||
        !j.contains("points"))
        throw std::invalid_argument("chain json: expected {k, a, b, points}");
    BoundaryChain chain;
    chain.k = j.at("k").get<int>();
    chain.a = j.at("a").get<double>();
    chain.b = j.at("b").get<double>();
    for (const auto& e : j.at("points")) {
        if (!e.is_array() || e.size() != 2)
            throw std::invalid_argument("chain json: points must be [x, y] pairs");
        chain.interior.points.push_back({e[0].get<double>(), e[1].get<double>()});
    }
    return chain;
}

inline std::string points_to_csv(std::span<const Point> pts) {
    std::string out = "x,y\n";
    for (Point p : pts) {
        out += format_double(p.x);
        out += ',';
        out += format_double(p.y);
        out += '\n';
    }
    return out;
}

inline std::vector<Point> points_from_csv(std::istream& in) {
    std::vector<Point> pts;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (first && (line == "x,y" || line == "x,y\r")) {
            first = false;
            continue;
        }
        first = false;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw std::invalid_argument("points csv: expected 'x,y' rows");
        try {
            pts.push_back({std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
        } catch (const std::exception&) {
            throw std::invalid_argument("points csv: unparsable number in '" + line + "'");
        }
    }
    return pts;
}

/// Reads a bare point set from a chain JSON file or an "x,y" CSV file.
inline std::vector<Point> read_points_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open points file: " + path);
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
        Json j;
        in >> j;
        if (j.is_object() && j.contains("points")) {
            std::vector<Point> pts;
            for (const auto& e : j.at("points"))
                pts.push_back({e[0].get<double>(), e[1].get<double>()});
            return pts;
        }
        throw std::invalid_argument("points json: expected an object with a points array");
    }
    return points_from_csv(in);
}

// ---------------------------------------------------------------------------
// reports
// ---------------------------------------------------------------------------

inline Json validation_to_json(const ValidationReport& r) {
    Json j{{"valid", r.valid}, {"degenerate", r.degenerate}};
    if (r.first_failing_window) {
        j["first_failing_window"] =
            Json::array({r.first_failing_window->first, r.first_failing_window->last});
    } else {
        j["first_failing_window"] = nullptr;
    }
    return j;
}

inline Json solve_result_to_json(const SolveResult& r) {
    Json witness = Json::array();
    for (Point p : r.witness.points) witness.push_back(Json::array({p.x, p.y}));
    return Json{{"length", r.length},
                {"witness", std::move(witness)},
                {"method", method_name(r.method)},
                {"states_explored", r.states_explored}};
}

inline Json cell_info_to_json(const Cell& cell) {
    Json verts = Json::array();
    for (Point p : vertices(cell)) verts.push_back(Json::array({p.x, p.y}));
    return Json{{"k", cell.k},
                {"a", cell.a},
                {"b", cell.b},
                {"area", area(cell)},
                {"vertices", std::move(verts)}};
}

inline Json report_to_json(const EstimateReport& r) {
    Json j;
    j["k"] = r.k;
    j["model"] = model_name(r.model);
    j["base_domain"] = r.base_domain;
    j["n_grid"] = r.n_grid;
    j["per_n"] = Json::array();
    for (const auto& s : r.per_n) {
        Json e{{"n", s.n}, {"trials", s.trials}, {"mean_l", s.mean_l}};
        e["std_l"] = s.std_l ? Json(*s.std_l) : Json(nullptr);
        e["ci_half_width"] = s.ci_half_width ? Json(*s.ci_half_width) : Json(nullptr);
        j["per_n"].push_back(std::move(e));
    }
    j["alpha_hat"] = r.alpha_hat ? Json(*r.alpha_hat) : Json(nullptr);
    j["alpha_ci"] = r.alpha_ci ? Json::array({r.alpha_ci->first, r.alpha_ci->second})
                               : Json(nullptr);
    j["exponent_hat"] = r.exponent_hat ? Json(*r.exponent_hat) : Json(nullptr);
    j["exponent_ci"] = r.exponent_ci
                           ? Json::array({r.exponent_ci->first, r.exponent_ci->second})
                           : Json(nullptr);
    j["superadditive_lower_bounds"] = Json::array();
    for (const auto& lb : r.superadditive_lower_bounds)
        j["superadditive_lower_bounds"].push_back(
            Json{{"n", lb.n}, {"mean_l_over_n", lb.mean_l_over_n}});
    j["concentration"] = Json::array();
    for (const auto& c : r.concentration) {
        Json e{{"n", c.n}};
        e["std_l"] = c.std_l ? Json(*c.std_l) : Json(nullptr);
        e["std_over_scale"] = c.std_over_scale ? Json(*c.std_over_scale) : Json(nullptr);
        e["exceedance"] = Json::array({c.exceedance[0], c.exceedance[1], c.exceedance[2]});
        j["concentration"].push_back(std::move(e));
    }
    j["limit_shape"] = Json::array();
    for (const auto& s : r.limit_shape) {
        j["limit_shape"].push_back(Json{{"n", s.n},
                                        {"mean_distance", s.mean_distance},
                                        {"max_distance", s.max_distance},
                                        {"q50_trial_mean", s.q50_trial_mean},
                                        {"q90_trial_mean", s.q90_trial_mean}});
    }
    return j;
}

inline Json coupling_to_json(const CouplingReport& r) {
    return Json{{"k", r.k},
                {"n", r.n},
                {"trials", r.trials},
                {"lambda", r.lambda},
                {"mean_poisson", r.mean_poisson},
                {"mean_binomial", r.mean_binomial},
                {"deviation_freq", Json::array({r.deviation_freq[0], r.deviation_freq[1],
                                                r.deviation_freq[2]})},
                {"bound", Json::array({r.bound[0], r.bound[1], r.bound[2]})},
                {"slack", Json::array({r.slack[0], r.slack[1], r.slack[2]})},
                {"within_bound", Json::array({r.within_bound[0], r.within_bound[1],
                                              r.within_bound[2]})}};
}

inline std::string trial_csv_header() { return "k,model,n,stream_id,L,wall_ms"; }

inline std::string trials_to_csv(std::span<const TrialRecord> recs) {
    std::string out = trial_csv_header() + "\n";
    for (const auto& r : recs) {
        out += std::to_string(r.k);
        out += ',';
        out += model_name(r.model);
        out += ',';
        if (r.n == std::floor(r.n) && std::fabs(r.n) < 1e15) {
            out += std::to_string(static_cast<long long>(r.n));
        } else {
            out += format_double(r.n);
        }
        out += ',';
        out += std::to_string(r.stream_id);
        out += ',';
        out += std::to_string(r.L);
        out += ',';
        out += format_double(r.wall_ms);
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// minimal JSON-schema check (type / properties / required / items / enum)
// ---------------------------------------------------------------------------

namespace detail {

inline bool json_has_type(const Json& value, const std::string& type) {
    if (type == "object") return value.is_object();
    if (type == "array") return value.is_array();
    if (type == "string") return value.is_string();
    if (type == "boolean") return value.is_boolean();
    if (type == "null") return value.is_null();
    if (type == "integer") return value.is_number_integer();
    if (type == "number") return value.is_number();
    return false;
}

}  // namespace detail

/// Structural validation against the subset of JSON Schema used by the
/// shipped report schema. Returns false and fills *error on first mismatch.
inline bool matches_schema(const Json& value, const Json& schema, std::string* error,
                           const std::string& path = "$") {
    auto fail = [&](const std::string& msg) {
        if (error) *error = path + ": " + msg;
        return false;
    };
    if (schema.contains("type")) {
        const auto& t = schema.at("type");
        bool ok = false;
        if (t.is_string()) {
            ok = detail::json_has_type(value, t.get<std::string>());
        } else if (t.is_array()) {
            for (const auto& alt : t)
                if (detail::json_has_type(value, alt.get<std::string>())) ok = true;
        }
        if (!ok) return fail("type mismatch (got " + std::string(value.type_name()) + ")");
    }
    if (schema.contains("enum")) {
        bool ok = false;
        for (const auto& alt : schema.at("enum"))
            if (value == alt) ok = true;
        if (!ok) return fail("value not in enum");
    }
    if (value.is_object()) {
        if (schema.contains("required")) {
            for (const auto& key : schema.at("required"))
                if (!value.contains(key.get<std::string>()))
                    return fail("missing required key '" + key.get<std::string>() + "'");
        }
        if (schema.contains("properties")) {
            for (const auto& [key, sub] : schema.at("properties").items()) {
                if (value.contains(key) &&
                    !matches_schema(value.at(key), sub, error, path + "." + key))
                    return false;
            }
        }
    }
    if (value.is_array() && schema.contains("items")) {
        for (std::size_t i = 0; i < value.size(); ++i) {
            if (!matches_schema(value[i], schema.at("items"), error,
                                path + "[" + std::to_string(i) + "]"))
                return false;
        }
    }
    return true;
}

}  // namespace kmc
