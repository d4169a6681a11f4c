#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "equigrid/domain.hpp"
#include "equigrid/money.hpp"
#include "equigrid/rng.hpp"

namespace equigrid {

/// Result of one environment transition. Budget identity:
/// next_state.budget == previous budget - action_cost_paid - op_cost_paid.
struct StepOutcome {
    GridState next_state;
    double reward = 0.0;
    Money op_cost_paid;
    Money action_cost_paid;
    Money op_cost_shortfall;  // operating cost that could not be paid (budget floored at 0)
    std::vector<double> demands_drawn;
};

/// Operating cost of running every facility, with an optional supply delta at
/// `target`. Rounded to the cent.
inline Money operating_cost(const GridState& state, std::optional<std::size_t> target, double delta_re,
                            double delta_nre, double scale = 1.0) {
    if ((delta_re != 0.0 || delta_nre != 0.0) && (!target || *target >= state.size())) {
        throw InfeasibleAction("operating_cost: supply delta without a valid target city");
    }
    double total = 0.0;
    for (std::size_t j = 0; j < state.size(); ++j) {
        const auto& c = state.cities[j];
        double re = c.re_supply;
        double nre = c.nre_supply;
        if (target && *target == j) {
            re += delta_re;
            nre += delta_nre;
            if (re < 0.0 || nre < 0.0) {
                throw InfeasibleAction("operating_cost: supply at city " + std::to_string(j + 1) +
                                       " would become negative");
            }
        }
        total += c.re_op_cost * re + c.nre_op_cost * nre;
    }
    return Money::from_double(total * scale);
}

namespace detail {

struct SupplyDelta {
    double re = 0.0;
    double nre = 0.0;
};

inline SupplyDelta supply_delta(ActionKind kind, const ScenarioParams& params) {
    switch (kind) {
        case ActionKind::AddRE: return {params.re_increment, 0.0};
        case ActionKind::AddNRE: return {0.0, params.nre_increment};
        case ActionKind::RemoveRE: return {-params.re_increment, 0.0};
        case ActionKind::RemoveNRE: return {0.0, -params.nre_increment};
        case ActionKind::DoNothing: break;
    }
    return {};
}

}  // namespace detail

/// Empty string when feasible, otherwise the violated constraint.
inline std::string infeasibility_reason(const GridState& state, const Action& action,
                                        const ScenarioParams& params) {
    if (!action.targets_city()) return {};
    if (action.city >= state.size()) {
        return "city index " + std::to_string(action.city + 1) + " outside 1.." +
               std::to_string(state.size());
    }
    const auto& c = state.cities[action.city];
    if (action.kind == ActionKind::RemoveRE && c.re_supply < params.re_increment) {
        return "RE supply at " + c.name + " (" + std::to_string(c.re_supply) +
               ") is below the removal increment";
    }
    if (action.kind == ActionKind::RemoveNRE && c.nre_supply < params.nre_increment) {
        return "NRE supply at " + c.name + " (" + std::to_string(c.nre_supply) +
               ") is below the removal increment";
    }
    const Money cost = params.action_cost(action.kind);
    if (cost > state.budget) {
        return std::string(to_string(action.kind)) + " cost " + cost.to_string() +
               " exceeds remaining budget " + state.budget.to_string();
    }
    return {};
}

inline bool is_feasible(const GridState& state, const Action& action, const ScenarioParams& params) {
    if (!action.targets_city()) return true;
    if (action.city >= state.size()) return false;
    const auto& c = state.cities[action.city];
    if (action.kind == ActionKind::RemoveRE && c.re_supply < params.re_increment) return false;
    if (action.kind == ActionKind::RemoveNRE && c.nre_supply < params.nre_increment) return false;
    return params.action_cost(action.kind) <= state.budget;
}

/// Feasible subset of enumerate_actions(n), in enumeration order.
inline std::vector<Action> feasible_actions(const GridState& state, const ScenarioParams& params) {
    std::vector<Action> out;
    out.reserve(4 * state.size() + 1);
    out.push_back(Action::do_nothing());
    for (std::size_t i = 0; i < state.size(); ++i) {
        for (ActionKind kind :
             {ActionKind::AddRE, ActionKind::AddNRE, ActionKind::RemoveRE, ActionKind::RemoveNRE}) {
            const Action a{kind, i};
            if (is_feasible(state, a, params)) out.push_back(a);
        }
    }
    return out;
}

/// Deterministic part of a transition, with its cost breakdown.
struct AppliedAction {
    GridState state;
    Money action_cost;
    Money op_cost;
    Money op_cost_shortfall;
};

inline AppliedAction apply_action_detailed(const GridState& state, const Action& action,
                                           const ScenarioParams& params) {
    if (!is_feasible(state, action, params)) {
        throw InfeasibleAction("infeasible action " + to_string(action) + ": " +
                               infeasibility_reason(state, action, params));
    }
    const auto delta = detail::supply_delta(action.kind, params);
    const std::optional<std::size_t> target =
        action.targets_city() ? std::optional<std::size_t>(action.city) : std::nullopt;

    // Charged on post-action supply at the acted city, current supply elsewhere.
    const Money op = operating_cost(state, target, delta.re, delta.nre, params.op_cost_scale);
    const Money action_cost = params.action_cost(action.kind);

    AppliedAction out{state, action_cost, op, Money{}};
    if (target) {
        auto& c = out.state.cities[*target];
        c.re_supply += delta.re;
        c.nre_supply += delta.nre;
    }
    const Money after_action = state.budget - action_cost;
    if (op > after_action) {
        out.op_cost = after_action;
        out.op_cost_shortfall = op - after_action;
    }
    out.state.budget = after_action - out.op_cost;
    return out;
}

inline GridState apply_action(const GridState& state, const Action& action,
                              const ScenarioParams& params) {
    return apply_action_detailed(state, action, params).state;
}

/// d_i ~ Normal(mu_i, sigma_i^2), clamped at 0, one draw per city in city order.
inline std::vector<double> sample_demands(const GridState& state, Rng& rng) {
    std::vector<double> demands;
    demands.reserve(state.size());
    for (const auto& c : state.cities) {
        const double z = rng.standard_normal();
        demands.push_back(std::max(0.0, c.baseline_demand + c.demand_stddev * z));
    }
    return demands;
}

inline double reward(const GridState& next_state, const ObjectiveWeights& weights) {
    double unmet_low = 0.0;
    double re_served = 0.0;
    for (const auto& c : next_state.cities) {
        if (c.income == Income::Low) {
            unmet_low += std::max(0.0, c.demand - (c.re_supply + c.nre_supply)) * c.population;
        }
        re_served += std::min(c.re_supply, c.demand) * c.population;
    }
    return weights.budget_weight * next_state.budget.to_double() +
           weights.underserved_penalty * unmet_low + weights.re_access_weight * re_served;
}

/// apply_action, then demand refresh, then reward. `weights` overrides the
/// scenario weights (search-time reweighting).
inline StepOutcome step(const GridState& state, const Action& action, Rng& rng,
                        const ScenarioParams& params, const ObjectiveWeights& weights) {
    auto applied = apply_action_detailed(state, action, params);
    StepOutcome out;
    out.demands_drawn = sample_demands(applied.state, rng);
    for (std::size_t i = 0; i < applied.state.size(); ++i) {
        applied.state.cities[i].demand = out.demands_drawn[i];
    }
    out.reward = reward(applied.state, weights);
    out.next_state = std::move(applied.state);
    out.action_cost_paid = applied.action_cost;
    out.op_cost_paid = applied.op_cost;
    out.op_cost_shortfall = applied.op_cost_shortfall;
    return out;
}

inline StepOutcome step(const GridState& state, const Action& action, Rng& rng,
                        const ScenarioParams& params) {
    return step(state, action, rng, params, params.weights);
}

}  // namespace equigrid
