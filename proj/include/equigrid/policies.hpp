#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "equigrid/baselines.hpp"
#include "equigrid/discrete_mdp.hpp"
#include "equigrid/domain.hpp"
#include "equigrid/mcts.hpp"
#include "equigrid/rng.hpp"
#include "equigrid/value_iteration.hpp"

namespace equigrid {

struct DecisionContext {
    std::size_t step = 0;
    std::size_t horizon = 1;

    std::size_t steps_remaining() const { return horizon > step ? horizon - step : 0; }
};

struct Decision {
    Action action;
    bool state_clamped = false;  // VI lookup fell outside the bin range
};

/// A named decision rule. `scenario_override` is set when the policy is
/// defined on a reduced scenario (VI on a city subset).
struct PolicyHandle {
    std::string name;
    std::function<Decision(const GridState&, const DecisionContext&, Rng&)> decide;
    std::map<std::string, std::string> metadata;
    std::optional<Scenario> scenario_override;
};

inline const std::vector<std::string>& known_policy_names() {
    static const std::vector<std::string> names{"random", "expert", "noop", "vi", "mcts-base", "mcts-re"};
    return names;
}

struct PolicyOptions {
    MctsConfig mcts;
    double re_weight_scale = 5.0;
    double budget_weight_scale = 0.2;
    /// nullopt: one low-income plus one high-income city; empty: all cities.
    std::optional<std::vector<std::size_t>> vi_cities;
    std::size_t vi_bins = 8;
    DemandMode vi_demand_mode = DemandMode::FrozenAtMean;
    std::size_t vi_max_sweeps = 10'000;
    std::size_t vi_workers = 1;
};

/// First low-income city and first high-income city, in city order.
inline std::vector<std::size_t> default_vi_cities(const Scenario& scenario) {
    std::optional<std::size_t> low, high;
    for (std::size_t i = 0; i < scenario.cities.size(); ++i) {
        auto& slot = scenario.cities[i].income == Income::Low ? low : high;
        if (!slot) slot = i;
    }
    std::vector<std::size_t> out;
    if (low) out.push_back(*low);
    if (high) out.push_back(*high);
    std::sort(out.begin(), out.end());
    return out;
}

namespace detail {

inline std::string format_number(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

inline std::map<std::string, std::string> mcts_metadata(const MctsConfig& cfg) {
    std::map<std::string, std::string> m{
        {"iterations", std::to_string(cfg.iterations)},
        {"exploration_constant", format_number(cfg.exploration_constant)},
        {"max_depth", std::to_string(cfg.max_depth)},
        {"chance_samples", std::to_string(cfg.chance_samples)},
        {"rollout_policy", cfg.rollout_policy == RolloutPolicy::Expert ? "expert" : "random"},
    };
    if (cfg.weights_override) {
        m["weights"] = format_number(cfg.weights_override->budget_weight) + "," +
                       format_number(cfg.weights_override->underserved_penalty) + "," +
                       format_number(cfg.weights_override->re_access_weight);
    }
    return m;
}

inline PolicyHandle make_mcts_policy(std::string name, const Scenario& scenario, MctsConfig cfg) {
    cfg.validate();
    auto metadata = mcts_metadata(cfg);
    const ScenarioParams params = scenario.params;
    return PolicyHandle{
        std::move(name),
        [params, cfg](const GridState& s, const DecisionContext& ctx, Rng& rng) {
            MctsConfig local = cfg;
            local.max_depth = std::min(cfg.max_depth, ctx.steps_remaining());
            return Decision{mcts_search(s, params, local, rng)};
        },
        std::move(metadata), std::nullopt};
}

}  // namespace detail

inline PolicyHandle make_policy(const std::string& name, const Scenario& scenario,
                                const PolicyOptions& options = {}) {
    const ScenarioParams params = scenario.params;
    if (name == "random") {
        return PolicyHandle{name,
                            [params](const GridState& s, const DecisionContext&, Rng& rng) {
                                return Decision{random_policy(s, params, rng)};
                            },
                            {}, std::nullopt};
    }
    if (name == "expert") {
        return PolicyHandle{name,
                            [params](const GridState& s, const DecisionContext&, Rng&) {
                                return Decision{expert_policy(s, params)};
                            },
                            {}, std::nullopt};
    }
    if (name == "noop") {
        return PolicyHandle{
            name, [](const GridState& s, const DecisionContext&, Rng&) { return Decision{noop_policy(s)}; },
            {}, std::nullopt};
    }
    if (name == "mcts-base") {
        MctsConfig cfg = options.mcts;
        cfg.weights_override.reset();
        return detail::make_mcts_policy(name, scenario, cfg);
    }
    if (name == "mcts-re") {
        MctsConfig cfg = options.mcts;
        cfg.weights_override =
            re_emphasis_weights(params.weights, options.re_weight_scale, options.budget_weight_scale);
        return detail::make_mcts_policy(name, scenario, cfg);
    }
    if (name == "vi") {
        const auto cities = options.vi_cities ? *options.vi_cities : default_vi_cities(scenario);
        auto spec = default_discretization(params, options.vi_bins, cities);
        spec.demand_mode = options.vi_demand_mode;
        auto tables = std::make_shared<const ViPolicyTables>(
            solve_vi_policy(scenario, spec, options.vi_max_sweeps, options.vi_workers));
        std::map<std::string, std::string> metadata{
            {"discretization", spec.describe()},
            {"states", std::to_string(tables->model.mdp.state_count())},
            {"sweeps", std::to_string(tables->solution.sweeps)},
            {"residual", detail::format_number(tables->solution.residual)},
        };
        std::string names;
        for (const auto& c : tables->model.scenario.cities) names += (names.empty() ? "" : ",") + c.name;
        metadata["evaluated_on_cities"] = names;
        Scenario reduced = tables->model.scenario;
        return PolicyHandle{name,
                            [tables](const GridState& s, const DecisionContext&, Rng&) {
                                const auto d = vi_policy_action(*tables, s);
                                return Decision{d.action, d.clamped};
                            },
                            std::move(metadata), std::move(reduced)};
    }
    throw ValidationError({"unknown policy '" + name + "' (expected one of random, expert, noop, vi, "
                           "mcts-base, mcts-re)"});
}

}  // namespace equigrid
