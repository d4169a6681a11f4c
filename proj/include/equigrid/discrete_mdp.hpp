#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "equigrid/domain.hpp"
#include "equigrid/environment.hpp"

namespace equigrid {

class StateCapExceeded : public std::runtime_error {
public:
    StateCapExceeded(double state_count, std::size_t cap, const std::string& spec)
        : std::runtime_error(message(state_count, cap, spec)), state_count_(state_count) {}

    double state_count() const { return state_count_; }

private:
    static std::string message(double state_count, std::size_t cap, const std::string& spec) {
        std::ostringstream os;
        os << "discretized state space has " << state_count << " states, above the cap of " << cap
           << " (" << spec << "); tabular value iteration needs a city subset or coarser bins";
        return os.str();
    }

    double state_count_;
};

/// Strictly increasing bin edges; bin k covers [edges[k], edges[k+1]).
class BinEdges {
public:
    BinEdges() = default;

    explicit BinEdges(std::vector<double> edges) : edges_(std::move(edges)) {
        if (edges_.size() < 3) throw ValidationError({"bin edges need at least 2 bins"});
        for (std::size_t k = 1; k < edges_.size(); ++k) {
            if (!(edges_[k] > edges_[k - 1])) {
                throw ValidationError({"bin edges must be strictly increasing"});
            }
        }
    }

    static BinEdges uniform(double lo, double hi, std::size_t bins) {
        if (bins < 2) throw ValidationError({"bin count must be >= 2"});
        std::vector<double> e(bins + 1);
        for (std::size_t k = 0; k <= bins; ++k) {
            e[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(bins);
        }
        e.back() = hi;
        return BinEdges(std::move(e));
    }

    std::size_t count() const { return edges_.empty() ? 0 : edges_.size() - 1; }
    const std::vector<double>& edges() const { return edges_; }
    double midpoint(std::size_t k) const { return 0.5 * (edges_[k] + edges_[k + 1]); }

    /// Bin containing `v`; values outside [front, back] clamp to the end bins
    /// and set `clamped`. The top edge itself belongs to the last bin.
    std::size_t locate(double v, bool& clamped) const {
        if (v < edges_.front()) {
            clamped = true;
            return 0;
        }
        if (v > edges_.back()) {
            clamped = true;
            return count() - 1;
        }
        auto it = std::upper_bound(edges_.begin(), edges_.end(), v);
        const auto k = static_cast<std::size_t>(it - edges_.begin());
        return std::min(k == 0 ? 0 : k - 1, count() - 1);
    }

private:
    std::vector<double> edges_;
};

enum class DemandMode { FrozenAtMean, KPointQuantized };

struct DiscretizationSpec {
    BinEdges budget;
    BinEdges re_supply;
    BinEdges nre_supply;
    DemandMode demand_mode = DemandMode::FrozenAtMean;
    std::size_t demand_points = 3;     // used by KPointQuantized: 1, 2 or 3
    std::vector<std::size_t> city_subset;  // empty: all cities
    std::size_t state_cap = 1'000'000;

    std::string describe() const {
        std::ostringstream os;
        os << "budget_bins=" << budget.count() << " re_bins=" << re_supply.count()
           << " nre_bins=" << nre_supply.count() << " demand="
           << (demand_mode == DemandMode::FrozenAtMean ? "frozen" : "k-point")
           << " cities=";
        if (city_subset.empty()) {
            os << "all";
        } else {
            for (std::size_t k = 0; k < city_subset.size(); ++k) {
                os << (k ? "," : "") << city_subset[k] + 1;
            }
        }
        return os.str();
    }
};

/// Default grid: bins per axis, budget on [0, initial budget], supplies on
/// [0, bins * increment] so that one facility moves one supply bin.
inline DiscretizationSpec default_discretization(const ScenarioParams& params, std::size_t bins,
                                                 std::vector<std::size_t> city_subset) {
    DiscretizationSpec spec;
    spec.budget = BinEdges::uniform(0.0, params.initial_budget.to_double(), bins);
    spec.re_supply = BinEdges::uniform(0.0, params.re_increment * static_cast<double>(bins), bins);
    spec.nre_supply = BinEdges::uniform(0.0, params.nre_increment * static_cast<double>(bins), bins);
    spec.city_subset = std::move(city_subset);
    return spec;
}

/// Finite tabular MDP. Transition rows are sparse (next state, probability).
class DiscreteMdp {
public:
    using Row = std::vector<std::pair<std::size_t, double>>;

    DiscreteMdp(std::size_t states, std::size_t actions, std::vector<Row> transitions,
                std::vector<double> rewards)
        : states_(states), actions_(actions), transitions_(std::move(transitions)),
          rewards_(std::move(rewards)) {
        if (states_ == 0 || actions_ == 0) throw ValidationError({"MDP needs states and actions"});
        if (transitions_.size() != states_ * actions_ || rewards_.size() != states_ * actions_) {
            throw ValidationError({"MDP table sizes do not match S*A"});
        }
        for (std::size_t k = 0; k < transitions_.size(); ++k) {
            double sum = 0.0;
            for (auto [next, p] : transitions_[k]) {
                if (next >= states_ || !(p >= 0.0) || !std::isfinite(p)) {
                    throw ValidationError({"bad transition entry in row " + std::to_string(k)});
                }
                sum += p;
            }
            if (std::abs(sum - 1.0) > 1e-12) {
                throw ValidationError({"transition row " + std::to_string(k) + " sums to " +
                                       std::to_string(sum)});
            }
            if (!std::isfinite(rewards_[k])) {
                throw ValidationError({"reward entry " + std::to_string(k) + " is not finite"});
            }
        }
    }

    std::size_t state_count() const { return states_; }
    std::size_t action_count() const { return actions_; }
    const Row& transitions(std::size_t s, std::size_t a) const { return transitions_[s * actions_ + a]; }
    double reward(std::size_t s, std::size_t a) const { return rewards_[s * actions_ + a]; }

    double max_abs_reward() const {
        double m = 0.0;
        for (double r : rewards_) m = std::max(m, std::abs(r));
        return m;
    }

private:
    std::size_t states_;
    std::size_t actions_;
    std::vector<Row> transitions_;
    std::vector<double> rewards_;
};

/// Mixed-radix index between concrete GridStates (restricted to the spec's
/// cities) and abstract states.
class StateAbstraction {
public:
    StateAbstraction(DiscretizationSpec spec, std::size_t n_cities)
        : spec_(std::move(spec)), n_cities_(n_cities) {}

    const DiscretizationSpec& spec() const { return spec_; }
    std::size_t city_count() const { return n_cities_; }

    /// Number of abstract states as a double so overflow can be reported.
    double state_count_estimate() const {
        double s = static_cast<double>(spec_.budget.count());
        for (std::size_t i = 0; i < n_cities_; ++i) {
            s *= static_cast<double>(spec_.re_supply.count()) *
                 static_cast<double>(spec_.nre_supply.count());
        }
        return s;
    }

    std::size_t state_count() const { return static_cast<std::size_t>(state_count_estimate()); }

    std::size_t encode(const GridState& state, bool& clamped) const {
        std::size_t index = 0;
        std::size_t stride = 1;
        index += spec_.budget.locate(state.budget.to_double(), clamped) * stride;
        stride *= spec_.budget.count();
        for (std::size_t i = 0; i < n_cities_; ++i) {
            index += spec_.re_supply.locate(state.cities[i].re_supply, clamped) * stride;
            stride *= spec_.re_supply.count();
            index += spec_.nre_supply.locate(state.cities[i].nre_supply, clamped) * stride;
            stride *= spec_.nre_supply.count();
        }
        return index;
    }

    /// Bin-midpoint representative; demand and static city fields come from `cities`.
    GridState representative(std::size_t index, const std::vector<CityState>& cities) const {
        GridState s{Money{}, cities};
        s.budget = Money::from_double(spec_.budget.midpoint(index % spec_.budget.count()));
        index /= spec_.budget.count();
        for (std::size_t i = 0; i < n_cities_; ++i) {
            s.cities[i].re_supply = spec_.re_supply.midpoint(index % spec_.re_supply.count());
            index /= spec_.re_supply.count();
            s.cities[i].nre_supply = spec_.nre_supply.midpoint(index % spec_.nre_supply.count());
            index /= spec_.nre_supply.count();
            s.cities[i].demand = s.cities[i].baseline_demand;
        }
        return s;
    }

private:
    DiscretizationSpec spec_;
    std::size_t n_cities_;
};

/// Everything needed to run the abstract model against concrete states.
struct DiscreteModel {
    Scenario scenario;  // reduced to the spec's city subset
    StateAbstraction abstraction;
    DiscreteMdp mdp;
    std::vector<bool> feasible_at_representative;  // S*A
};

namespace detail {

/// Gauss-Hermite nodes/weights for a standard normal.
inline std::vector<std::pair<double, double>> normal_quadrature(std::size_t points) {
    switch (points) {
        case 1: return {{0.0, 1.0}};
        case 2: return {{-1.0, 0.5}, {1.0, 0.5}};
        case 3: return {{-std::sqrt(3.0), 1.0 / 6.0}, {0.0, 2.0 / 3.0}, {std::sqrt(3.0), 1.0 / 6.0}};
        default: break;
    }
    throw ValidationError({"demand_points must be 1, 2 or 3"});
}

inline double expected_reward(GridState state, const ObjectiveWeights& weights,
                              const DiscretizationSpec& spec) {
    if (spec.demand_mode == DemandMode::FrozenAtMean) {
        for (auto& c : state.cities) c.demand = c.baseline_demand;
        return reward(state, weights);
    }
    const auto nodes = normal_quadrature(spec.demand_points);
    const std::size_t n = state.size();
    std::vector<std::size_t> digit(n, 0);
    double total = 0.0;
    while (true) {
        double w = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            auto& c = state.cities[i];
            c.demand = std::max(0.0, c.baseline_demand + c.demand_stddev * nodes[digit[i]].first);
            w *= nodes[digit[i]].second;
        }
        total += w * reward(state, weights);
        std::size_t i = 0;
        while (i < n && ++digit[i] == nodes.size()) digit[i++] = 0;
        if (i == n) break;
    }
    return total;
}

}  // namespace detail

inline DiscreteModel build_discrete_mdp(const Scenario& scenario, const DiscretizationSpec& spec) {
    std::vector<std::size_t> subset = spec.city_subset;
    if (subset.empty()) {
        for (std::size_t i = 0; i < scenario.cities.size(); ++i) subset.push_back(i);
    }
    Scenario reduced = scenario.subset(subset);
    StateAbstraction abstraction(spec, reduced.cities.size());

    const double estimate = abstraction.state_count_estimate();
    if (!(estimate <= static_cast<double>(spec.state_cap))) {
        throw StateCapExceeded(estimate, spec.state_cap, spec.describe());
    }
    const std::size_t S = abstraction.state_count();
    const auto actions = enumerate_actions(reduced.cities.size());
    const std::size_t A = actions.size();
    const auto& params = reduced.params;

    std::vector<DiscreteMdp::Row> rows(S * A);
    std::vector<double> rewards(S * A);
    std::vector<bool> feasible(S * A, false);
    for (std::size_t s = 0; s < S; ++s) {
        const GridState rep = abstraction.representative(s, reduced.cities);
        for (std::size_t a = 0; a < A; ++a) {
            if (!is_feasible(rep, actions[a], params)) continue;
            feasible[s * A + a] = true;
            const GridState next = apply_action(rep, actions[a], params);
            bool clamped = false;
            rows[s * A + a] = {{abstraction.encode(next, clamped), 1.0}};
            rewards[s * A + a] = detail::expected_reward(next, params.weights, spec);
        }
        // Infeasible at the representative: behave as DoNothing.
        for (std::size_t a = 1; a < A; ++a) {
            if (!feasible[s * A + a]) {
                rows[s * A + a] = rows[s * A];
                rewards[s * A + a] = rewards[s * A];
            }
        }
    }
    DiscreteMdp mdp(S, A, std::move(rows), std::move(rewards));
    return DiscreteModel{std::move(reduced), std::move(abstraction), std::move(mdp),
                         std::move(feasible)};
}

}  // namespace equigrid
