#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "equigrid/baselines.hpp"
#include "equigrid/domain.hpp"
#include "equigrid/environment.hpp"
#include "equigrid/rng.hpp"
#include "equigrid/uct.hpp"

namespace equigrid {

enum class RolloutPolicy { Random, Expert };

struct MctsConfig {
    std::size_t iterations = 2000;
    double exploration_constant = 1.4142135623730951;
    std::size_t max_depth = 10;
    std::size_t chance_samples = 4;
    RolloutPolicy rollout_policy = RolloutPolicy::Random;
    std::optional<ObjectiveWeights> weights_override;

    void validate() const {
        std::vector<std::string> errors;
        if (iterations < 1) errors.push_back("mcts: iterations must be >= 1");
        if (!(exploration_constant >= 0.0)) errors.push_back("mcts: exploration constant must be >= 0");
        if (chance_samples < 1) errors.push_back("mcts: chance_samples must be >= 1");
        if (!errors.empty()) throw ValidationError(std::move(errors));
    }
};

/// Search-time weights for the renewable-emphasis variant: w_3 scaled up,
/// w_1 scaled down.
inline ObjectiveWeights re_emphasis_weights(const ObjectiveWeights& base, double re_scale = 5.0,
                                            double budget_scale = 0.2) {
    ObjectiveWeights w = base;
    w.re_access_weight *= re_scale;
    w.budget_weight *= budget_scale;
    return w;
}

/// gamma-discounted reward of `depth_remaining` steps of the rollout policy.
inline double rollout_estimate(const GridState& state, const ScenarioParams& params,
                               const MctsConfig& cfg, Rng& rng, std::size_t depth_remaining) {
    const ObjectiveWeights& weights = cfg.weights_override ? *cfg.weights_override : params.weights;
    double total = 0.0;
    double discount = 1.0;
    GridState current = state;
    for (std::size_t d = 0; d < depth_remaining; ++d) {
        const Action a = cfg.rollout_policy == RolloutPolicy::Expert
                             ? expert_policy(current, params)
                             : random_policy(current, params, rng);
        auto outcome = step(current, a, rng, params, weights);
        total += discount * outcome.reward;
        discount *= params.gamma;
        current = std::move(outcome.next_state);
    }
    return total;
}

/// The grid MDP seen through the SearchModel interface.
class GridSearchModel {
public:
    using State = GridState;
    using Action = equigrid::Action;

    GridSearchModel(const ScenarioParams& params, const MctsConfig& cfg)
        : params_(params), cfg_(cfg),
          weights_(cfg.weights_override ? *cfg.weights_override : params.weights) {}

    std::vector<Action> legal_actions(const GridState& s) const { return feasible_actions(s, params_); }

    std::pair<GridState, double> transition(const GridState& s, const Action& a, Rng& rng) const {
        auto outcome = step(s, a, rng, params_, weights_);
        return {std::move(outcome.next_state), outcome.reward};
    }

    double rollout(const GridState& s, Rng& rng, std::size_t depth) const {
        return rollout_estimate(s, params_, cfg_, rng, depth);
    }

    double discount() const { return params_.gamma; }

private:
    const ScenarioParams& params_;
    const MctsConfig& cfg_;
    ObjectiveWeights weights_;
};

inline UctSearch<GridSearchModel>::Result mcts_search_detailed(const GridState& state,
                                                               const ScenarioParams& params,
                                                               const MctsConfig& cfg, Rng& rng) {
    cfg.validate();
    GridSearchModel model(params, cfg);
    UctSearch<GridSearchModel> search(
        model, UctConfig{cfg.iterations, cfg.exploration_constant, cfg.max_depth, cfg.chance_samples});
    return search.search(state, rng);
}

inline Action mcts_search(const GridState& state, const ScenarioParams& params, const MctsConfig& cfg,
                          Rng& rng) {
    return mcts_search_detailed(state, params, cfg, rng).action;
}

}  // namespace equigrid
