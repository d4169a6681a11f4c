#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "equigrid/domain.hpp"

namespace equigrid {

class ScenarioParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

using ojson = nlohmann::ordered_json;

inline double require_number(const ojson& obj, const char* field, const std::string& where) {
    auto it = obj.find(field);
    if (it == obj.end()) throw ScenarioParseError(where + ": missing field '" + field + "'");
    if (!it->is_number()) throw ScenarioParseError(where + ": field '" + field + "' must be a number");
    return it->get<double>();
}

inline double optional_number(const ojson& obj, const char* field, const std::string& where,
                              double fallback) {
    if (!obj.contains(field)) return fallback;
    return require_number(obj, field, where);
}

inline Money require_money(const ojson& obj, const char* field, const std::string& where) {
    return Money::from_double(require_number(obj, field, where));
}

inline ojson money_json(Money m) { return m.to_double(); }

}  // namespace detail

/// Parses the scenario document and validates it. Supply/demand/population
/// fields may be rescaled by an optional `units` block.
inline Scenario parse_scenario(const std::string& text) {
    using detail::ojson;
    ojson doc;
    try {
        doc = ojson::parse(text);
    } catch (const ojson::parse_error& e) {
        throw ScenarioParseError(std::string("scenario parse error: ") + e.what());
    }
    if (!doc.is_object()) throw ScenarioParseError("scenario: top level must be an object");
    if (!doc.contains("params") || !doc["params"].is_object()) {
        throw ScenarioParseError("scenario: missing object 'params'");
    }
    if (!doc.contains("cities") || !doc["cities"].is_array()) {
        throw ScenarioParseError("scenario: missing array 'cities'");
    }

    const auto& p = doc["params"];
    const std::string where = "params";
    ScenarioParams params;
    params.initial_budget = detail::require_money(p, "initial_budget", where);
    params.add_re_cost = detail::require_money(p, "add_re_cost", where);
    params.add_nre_cost = detail::require_money(p, "add_nre_cost", where);
    params.remove_re_cost = detail::require_money(p, "remove_re_cost", where);
    params.remove_nre_cost = detail::require_money(p, "remove_nre_cost", where);
    params.re_increment = detail::require_number(p, "re_increment", where);
    params.nre_increment = detail::require_number(p, "nre_increment", where);
    params.gamma = detail::require_number(p, "gamma", where);
    const double horizon = detail::require_number(p, "horizon", where);
    if (horizon != static_cast<double>(static_cast<int>(horizon))) {
        throw ScenarioParseError("params: field 'horizon' must be an integer");
    }
    params.horizon = static_cast<int>(horizon);
    params.op_cost_scale = detail::require_number(p, "op_cost_scale", where);
    params.low_income_threshold = detail::require_number(p, "low_income_threshold", where);
    if (!p.contains("weights") || !p["weights"].is_object()) {
        throw ScenarioParseError("params: missing object 'weights'");
    }
    const auto& w = p["weights"];
    params.weights.budget_weight = detail::require_number(w, "budget", "params.weights");
    params.weights.underserved_penalty =
        detail::require_number(w, "underserved_penalty", "params.weights");
    params.weights.re_access_weight = detail::require_number(w, "re_access", "params.weights");

    double supply_scale = 1.0, demand_scale = 1.0, population_scale = 1.0;
    if (doc.contains("units")) {
        const auto& u = doc["units"];
        supply_scale = detail::optional_number(u, "supply_scale", "units", 1.0);
        demand_scale = detail::optional_number(u, "demand_scale", "units", 1.0);
        population_scale = detail::optional_number(u, "population_scale", "units", 1.0);
    }

    std::vector<CityState> cities;
    std::size_t index = 0;
    for (const auto& c : doc["cities"]) {
        ++index;
        std::string who = "city " + std::to_string(index);
        if (!c.is_object()) throw ScenarioParseError(who + ": must be an object");
        CityState city;
        if (!c.contains("name") || !c["name"].is_string()) {
            throw ScenarioParseError(who + ": missing field 'name'");
        }
        city.name = c["name"].get<std::string>();
        who += " '" + city.name + "'";
        city.population = detail::require_number(c, "population", who) * population_scale;
        city.low_income_share = detail::require_number(c, "pct_low_income", who);
        city.re_supply = detail::require_number(c, "re_supply", who) * supply_scale;
        city.nre_supply = detail::require_number(c, "nre_supply", who) * supply_scale;
        city.demand = detail::require_number(c, "demand", who) * demand_scale;
        city.baseline_demand =
            detail::optional_number(c, "baseline_demand", who, city.demand / demand_scale) * demand_scale;
        city.demand_stddev = detail::require_number(c, "demand_stddev", who) * demand_scale;
        city.re_op_cost = detail::require_number(c, "re_op_cost", who);
        city.nre_op_cost = detail::require_number(c, "nre_op_cost", who);
        try {
            city.income = income_class(city.low_income_share, params.low_income_threshold);
        } catch (const ValidationError& e) {
            throw ScenarioParseError(who + ": " + e.violations().front());
        }
        cities.push_back(std::move(city));
    }
    return validate_scenario(std::move(params), std::move(cities));
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioParseError("cannot open scenario file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_scenario(buf.str());
    } catch (const ScenarioParseError& e) {
        throw ScenarioParseError(path + ": " + e.what());
    }
}

/// Inverse of parse_scenario for unit scales of 1.
inline std::string write_scenario(const Scenario& scenario) {
    using detail::ojson;
    const auto& p = scenario.params;
    ojson doc;
    doc["params"] = {
        {"initial_budget", detail::money_json(p.initial_budget)},
        {"add_re_cost", detail::money_json(p.add_re_cost)},
        {"add_nre_cost", detail::money_json(p.add_nre_cost)},
        {"remove_re_cost", detail::money_json(p.remove_re_cost)},
        {"remove_nre_cost", detail::money_json(p.remove_nre_cost)},
        {"re_increment", p.re_increment},
        {"nre_increment", p.nre_increment},
        {"gamma", p.gamma},
        {"weights",
         {{"budget", p.weights.budget_weight},
          {"underserved_penalty", p.weights.underserved_penalty},
          {"re_access", p.weights.re_access_weight}}},
        {"horizon", p.horizon},
        {"op_cost_scale", p.op_cost_scale},
        {"low_income_threshold", p.low_income_threshold},
    };
    doc["cities"] = ojson::array();
    for (const auto& c : scenario.cities) {
        doc["cities"].push_back({
            {"name", c.name},
            {"population", c.population},
            {"pct_low_income", c.low_income_share},
            {"re_supply", c.re_supply},
            {"nre_supply", c.nre_supply},
            {"demand", c.demand},
            {"baseline_demand", c.baseline_demand},
            {"demand_stddev", c.demand_stddev},
            {"re_op_cost", c.re_op_cost},
            {"nre_op_cost", c.nre_op_cost},
        });
    }
    return doc.dump(2) + "\n";
}

}  // namespace equigrid
