#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "equigrid/money.hpp"

namespace equigrid {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Carries every violation found, not just the first.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(std::vector<std::string> violations)
        : std::runtime_error(join(violations)), violations_(std::move(violations)) {}

    const std::vector<std::string>& violations() const { return violations_; }

private:
    static std::string join(const std::vector<std::string>& items) {
        std::string out = "validation failed:";
        for (const auto& item : items) {
            out += "\n  - ";
            out += item;
        }
        return out;
    }

    std::vector<std::string> violations_;
};

class InfeasibleAction : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// State
// ---------------------------------------------------------------------------

enum class Income : std::uint8_t { Low = 0, High = 1 };

inline int indicator(Income income) { return income == Income::High ? 1 : 0; }

/// One region. Dynamic fields (demand, supplies) change under the dynamics;
/// everything else is fixed for the scenario's lifetime.
struct CityState {
    std::string name;
    double demand = 0.0;       // d_i
    double re_supply = 0.0;    // r_i
    double nre_supply = 0.0;   // n_i
    double population = 0.0;   // p_i
    Income income = Income::High;
    double low_income_share = 0.0;
    double baseline_demand = 0.0;  // mu_i
    double demand_stddev = 0.0;    // sigma_i
    double re_op_cost = 0.0;       // per energy-unit
    double nre_op_cost = 0.0;

    bool operator==(const CityState&) const = default;
};

struct GridState {
    Money budget;
    std::vector<CityState> cities;

    std::size_t size() const { return cities.size(); }
    bool operator==(const GridState&) const = default;
};

// ---------------------------------------------------------------------------
// Actions
// ---------------------------------------------------------------------------

enum class ActionKind : std::uint8_t { DoNothing, AddRE, AddNRE, RemoveRE, RemoveNRE };

inline const char* to_string(ActionKind kind) {
    switch (kind) {
        case ActionKind::DoNothing: return "DoNothing";
        case ActionKind::AddRE: return "AddRE";
        case ActionKind::AddNRE: return "AddNRE";
        case ActionKind::RemoveRE: return "RemoveRE";
        case ActionKind::RemoveNRE: return "RemoveNRE";
    }
    return "?";
}

/// `city` is a zero-based index into GridState::cities and is ignored for DoNothing.
struct Action {
    ActionKind kind = ActionKind::DoNothing;
    std::size_t city = 0;

    static constexpr Action do_nothing() { return {}; }
    static constexpr Action add_re(std::size_t i) { return {ActionKind::AddRE, i}; }
    static constexpr Action add_nre(std::size_t i) { return {ActionKind::AddNRE, i}; }
    static constexpr Action remove_re(std::size_t i) { return {ActionKind::RemoveRE, i}; }
    static constexpr Action remove_nre(std::size_t i) { return {ActionKind::RemoveNRE, i}; }

    constexpr bool targets_city() const { return kind != ActionKind::DoNothing; }

    constexpr bool operator==(const Action& o) const {
        return kind == o.kind && (kind == ActionKind::DoNothing || city == o.city);
    }

    /// Position in enumerate_actions order: DoNothing, then per city
    /// AddRE, AddNRE, RemoveRE, RemoveNRE.
    constexpr std::size_t ordinal() const {
        if (kind == ActionKind::DoNothing) return 0;
        return 1 + 4 * city + (static_cast<std::size_t>(kind) - 1);
    }

    static constexpr Action from_ordinal(std::size_t ordinal) {
        if (ordinal == 0) return do_nothing();
        const std::size_t k = ordinal - 1;
        return {static_cast<ActionKind>(1 + k % 4), k / 4};
    }
};

inline std::string to_string(const Action& action) {
    if (!action.targets_city()) return "DoNothing";
    return std::string(to_string(action.kind)) + "@" + std::to_string(action.city + 1);
}

inline std::string describe(const Action& action, const GridState& state) {
    if (!action.targets_city() || action.city >= state.size()) return to_string(action);
    return std::string(to_string(action.kind)) + "@" + state.cities[action.city].name;
}

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

struct ObjectiveWeights {
    double budget_weight = 0.15;        // w_1
    double underserved_penalty = -25.0;  // w_2
    double re_access_weight = 12.0;      // w_3

    bool operator==(const ObjectiveWeights&) const = default;
};

struct ScenarioParams {
    Money initial_budget = Money::from_cents(300000);
    Money add_re_cost = Money::from_cents(18000);
    Money add_nre_cost = Money::from_cents(12000);
    Money remove_re_cost = Money::from_cents(12000);
    Money remove_nre_cost = Money::from_cents(18000);
    double re_increment = 100.0;
    double nre_increment = 100.0;
    double gamma = 0.95;
    ObjectiveWeights weights;
    int horizon = 10;
    double op_cost_scale = 0.01;
    double low_income_threshold = 0.25;

    Money action_cost(ActionKind kind) const {
        switch (kind) {
            case ActionKind::AddRE: return add_re_cost;
            case ActionKind::AddNRE: return add_nre_cost;
            case ActionKind::RemoveRE: return remove_re_cost;
            case ActionKind::RemoveNRE: return remove_nre_cost;
            case ActionKind::DoNothing: break;
        }
        return Money{};
    }

    bool operator==(const ScenarioParams&) const = default;
};

/// A validated (params, cities) pair. Only validate_scenario produces one.
struct Scenario {
    ScenarioParams params;
    std::vector<CityState> cities;

    GridState initial_state() const { return GridState{params.initial_budget, cities}; }

    /// Same parameters restricted to `indices` (in the given order).
    Scenario subset(const std::vector<std::size_t>& indices) const {
        Scenario out{params, {}};
        for (std::size_t i : indices) {
            if (i >= cities.size()) {
                throw std::out_of_range("city index " + std::to_string(i + 1) + " out of range");
            }
            out.cities.push_back(cities[i]);
        }
        return out;
    }

    bool operator==(const Scenario&) const = default;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// 0 (low income) iff the low-income share reaches the threshold, else 1.
inline Income income_class(double pct_low_income, double threshold) {
    std::vector<std::string> errors;
    if (!(pct_low_income >= 0.0 && pct_low_income <= 1.0)) {
        errors.push_back("low-income share " + std::to_string(pct_low_income) + " outside [0, 1]");
    }
    if (!(threshold >= 0.0 && threshold <= 1.0)) {
        errors.push_back("low-income threshold " + std::to_string(threshold) + " outside [0, 1]");
    }
    if (!errors.empty()) throw ValidationError(std::move(errors));
    return pct_low_income >= threshold ? Income::Low : Income::High;
}

inline std::vector<Action> enumerate_actions(std::size_t n_cities) {
    if (n_cities == 0) throw ValidationError({"action space needs at least one city"});
    std::vector<Action> actions;
    actions.reserve(4 * n_cities + 1);
    actions.push_back(Action::do_nothing());
    for (std::size_t i = 0; i < n_cities; ++i) {
        actions.push_back(Action::add_re(i));
        actions.push_back(Action::add_nre(i));
        actions.push_back(Action::remove_re(i));
        actions.push_back(Action::remove_nre(i));
    }
    return actions;
}

namespace detail {

inline void check_nonneg(std::vector<std::string>& errors, const std::string& who, const char* field,
                         double value) {
    if (!std::isfinite(value)) {
        errors.push_back(who + ": " + field + " is not finite");
    } else if (value < 0.0) {
        errors.push_back(who + ": " + field + " must be >= 0 (got " + std::to_string(value) + ")");
    }
}

inline void check_nonneg(std::vector<std::string>& errors, const char* field, Money value) {
    if (value < Money{}) {
        errors.push_back(std::string("params: ") + field + " must be >= 0 (got " + value.to_string() +
                         ")");
    }
}

}  // namespace detail

inline Scenario validate_scenario(ScenarioParams params, std::vector<CityState> cities) {
    std::vector<std::string> errors;

    if (!(params.gamma > 0.0 && params.gamma < 1.0)) {
        errors.push_back("params: gamma discount out of range (0, 1) (got " +
                         std::to_string(params.gamma) + ")");
    }
    detail::check_nonneg(errors, "initial_budget", params.initial_budget);
    detail::check_nonneg(errors, "add_re_cost", params.add_re_cost);
    detail::check_nonneg(errors, "add_nre_cost", params.add_nre_cost);
    detail::check_nonneg(errors, "remove_re_cost", params.remove_re_cost);
    detail::check_nonneg(errors, "remove_nre_cost", params.remove_nre_cost);
    if (!(params.re_increment > 0.0) || !std::isfinite(params.re_increment)) {
        errors.push_back("params: re_increment must be > 0");
    }
    if (!(params.nre_increment > 0.0) || !std::isfinite(params.nre_increment)) {
        errors.push_back("params: nre_increment must be > 0");
    }
    if (params.horizon < 1) errors.push_back("params: horizon must be >= 1");
    detail::check_nonneg(errors, "params", "op_cost_scale", params.op_cost_scale);
    if (!(params.low_income_threshold >= 0.0 && params.low_income_threshold <= 1.0)) {
        errors.push_back("params: low_income_threshold outside [0, 1]");
    }
    const auto& w = params.weights;
    if (!std::isfinite(w.budget_weight) || w.budget_weight < 0.0) {
        errors.push_back("params: budget_weight must be >= 0");
    }
    if (!std::isfinite(w.underserved_penalty) || w.underserved_penalty > 0.0) {
        errors.push_back("params: underserved_penalty must be <= 0");
    }
    if (!std::isfinite(w.re_access_weight) || w.re_access_weight < 0.0) {
        errors.push_back("params: re_access_weight must be >= 0");
    }

    if (cities.empty()) errors.push_back("scenario has no cities");
    for (std::size_t i = 0; i < cities.size(); ++i) {
        const auto& c = cities[i];
        const std::string who =
            "city " + std::to_string(i + 1) + (c.name.empty() ? "" : " '" + c.name + "'");
        detail::check_nonneg(errors, who, "demand", c.demand);
        detail::check_nonneg(errors, who, "re_supply", c.re_supply);
        detail::check_nonneg(errors, who, "nre_supply", c.nre_supply);
        detail::check_nonneg(errors, who, "population", c.population);
        detail::check_nonneg(errors, who, "baseline_demand", c.baseline_demand);
        detail::check_nonneg(errors, who, "demand_stddev", c.demand_stddev);
        detail::check_nonneg(errors, who, "re_op_cost", c.re_op_cost);
        detail::check_nonneg(errors, who, "nre_op_cost", c.nre_op_cost);
        if (!(c.low_income_share >= 0.0 && c.low_income_share <= 1.0)) {
            errors.push_back(who + ": low_income_share outside [0, 1]");
        }
        if (c.income != Income::Low && c.income != Income::High) {
            errors.push_back(who + ": income indicator must be 0 or 1");
        }
    }

    if (!errors.empty()) throw ValidationError(std::move(errors));
    return Scenario{std::move(params), std::move(cities)};
}

}  // namespace equigrid
