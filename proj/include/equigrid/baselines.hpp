#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <vector>

#include "equigrid/domain.hpp"
#include "equigrid/environment.hpp"
#include "equigrid/rng.hpp"

namespace equigrid {

/// Uniform draw over feasible_actions(state).
inline Action random_policy(const GridState& state, const ScenarioParams& params, Rng& rng) {
    const auto actions = feasible_actions(state, params);
    return actions[rng.uniform_index(actions.size())];
}

inline Action noop_policy(const GridState&) { return Action::do_nothing(); }

namespace detail {

inline double unmet_demand(const CityState& c) {
    return std::max(0.0, c.demand - c.re_supply - c.nre_supply);
}

/// City with the largest unmet-demand x population among cities with unmet
/// demand (optionally low-income only). Ties go to the lowest index.
inline std::optional<std::size_t> neediest_city(const GridState& state, bool low_income_only) {
    std::optional<std::size_t> best;
    double best_score = 0.0;
    for (std::size_t i = 0; i < state.size(); ++i) {
        const auto& c = state.cities[i];
        if (low_income_only && c.income != Income::Low) continue;
        const double u = unmet_demand(c);
        if (!(u > 0.0)) continue;
        const double score = u * c.population;
        if (!best || score > best_score) {
            best = i;
            best_score = score;
        }
    }
    return best;
}

}  // namespace detail

/// Deterministic expert rule: renewables for the neediest low-income city,
/// then for the neediest city overall, then non-renewables when only those
/// are affordable. Never removes facilities.
inline Action expert_policy(const GridState& state, const ScenarioParams& params) {
    const bool can_add_re = state.budget >= params.add_re_cost;
    if (can_add_re) {
        if (auto i = detail::neediest_city(state, true)) return Action::add_re(*i);
        if (auto i = detail::neediest_city(state, false)) return Action::add_re(*i);
    }
    if (state.budget >= params.add_nre_cost) {
        if (auto i = detail::neediest_city(state, false)) return Action::add_nre(*i);
    }
    return Action::do_nothing();
}

}  // namespace equigrid
