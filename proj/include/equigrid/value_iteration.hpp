#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "equigrid/discrete_mdp.hpp"
#include "equigrid/environment.hpp"

namespace equigrid {

class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ValueIterationResult {
    std::vector<double> values;
    std::vector<std::size_t> policy;  // greedy action index per state
    double residual = 0.0;            // max-norm change of the last sweep
    std::size_t sweeps = 0;
    std::vector<double> residual_history;
};

/// One-step lookahead value of action `a` in state `s` under `values`.
inline double q_value(const DiscreteMdp& mdp, const std::vector<double>& values, double gamma,
                      std::size_t s, std::size_t a) {
    double expect = 0.0;
    for (auto [next, p] : mdp.transitions(s, a)) expect += p * values[next];
    return mdp.reward(s, a) + gamma * expect;
}

/// Greedy action, ties to the lowest action index.
inline std::size_t greedy_action(const DiscreteMdp& mdp, const std::vector<double>& values,
                                 double gamma, std::size_t s) {
    std::size_t best = 0;
    double best_q = q_value(mdp, values, gamma, s, 0);
    for (std::size_t a = 1; a < mdp.action_count(); ++a) {
        const double q = q_value(mdp, values, gamma, s, a);
        if (q > best_q) {
            best_q = q;
            best = a;
        }
    }
    return best;
}

/// Jacobi value iteration: sweep k+1 reads only sweep k, so the result does
/// not depend on `workers`.
inline ValueIterationResult value_iteration(const DiscreteMdp& mdp, double gamma, double tolerance,
                                            std::size_t max_sweeps, std::size_t workers = 1) {
    if (!(gamma > 0.0 && gamma < 1.0)) {
        throw ValidationError({"value_iteration: gamma must lie in (0, 1)"});
    }
    const std::size_t S = mdp.state_count();
    workers = std::clamp<std::size_t>(workers, 1, S);

    ValueIterationResult out;
    std::vector<double> current(S, 0.0);
    std::vector<double> next(S, 0.0);
    std::vector<double> chunk_residual(workers, 0.0);

    auto backup_range = [&](std::size_t worker) {
        const std::size_t lo = S * worker / workers;
        const std::size_t hi = S * (worker + 1) / workers;
        double residual = 0.0;
        for (std::size_t s = lo; s < hi; ++s) {
            double best = q_value(mdp, current, gamma, s, 0);
            for (std::size_t a = 1; a < mdp.action_count(); ++a) {
                best = std::max(best, q_value(mdp, current, gamma, s, a));
            }
            next[s] = best;
            residual = std::max(residual, std::abs(best - current[s]));
        }
        chunk_residual[worker] = residual;
    };

    out.residual = std::numeric_limits<double>::infinity();
    while (out.sweeps < max_sweeps) {
        if (workers == 1) {
            backup_range(0);
        } else {
            std::vector<std::jthread> pool;
            pool.reserve(workers);
            for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(backup_range, w);
        }
        for (std::size_t s = 0; s < S; ++s) {
            if (!std::isfinite(next[s])) {
                throw NumericError("value_iteration: non-finite value at state " + std::to_string(s) +
                                   " in sweep " + std::to_string(out.sweeps + 1));
            }
        }
        current.swap(next);
        ++out.sweeps;
        out.residual = *std::max_element(chunk_residual.begin(), chunk_residual.end());
        out.residual_history.push_back(out.residual);
        if (out.residual <= tolerance) break;
    }

    out.policy.resize(S);
    for (std::size_t s = 0; s < S; ++s) out.policy[s] = greedy_action(mdp, current, gamma, s);
    out.values = std::move(current);
    return out;
}

/// Exact evaluation of a stationary deterministic policy, V = (I - gamma P)^-1 R,
/// by Gaussian elimination with partial pivoting. Meant for small models.
inline std::vector<double> evaluate_policy(const DiscreteMdp& mdp, const std::vector<std::size_t>& policy,
                                           double gamma) {
    const std::size_t S = mdp.state_count();
    std::vector<double> m(S * (S + 1), 0.0);
    auto at = [&](std::size_t r, std::size_t c) -> double& { return m[r * (S + 1) + c]; };
    for (std::size_t s = 0; s < S; ++s) {
        at(s, s) += 1.0;
        for (auto [next, p] : mdp.transitions(s, policy[s])) at(s, next) -= gamma * p;
        at(s, S) = mdp.reward(s, policy[s]);
    }
    for (std::size_t col = 0; col < S; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < S; ++r) {
            if (std::abs(at(r, col)) > std::abs(at(pivot, col))) pivot = r;
        }
        if (pivot != col) {
            for (std::size_t c = 0; c <= S; ++c) std::swap(at(col, c), at(pivot, c));
        }
        const double d = at(col, col);
        for (std::size_t r = 0; r < S; ++r) {
            if (r == col || at(r, col) == 0.0) continue;
            const double f = at(r, col) / d;
            for (std::size_t c = col; c <= S; ++c) at(r, c) -= f * at(col, c);
        }
    }
    std::vector<double> v(S);
    for (std::size_t s = 0; s < S; ++s) v[s] = at(s, S) / at(s, s);
    return v;
}

/// Solved tables for online use by the VI policy.
struct ViPolicyTables {
    DiscreteModel model;
    ValueIterationResult solution;
    double gamma = 0.95;
};

inline ViPolicyTables solve_vi_policy(const Scenario& scenario, const DiscretizationSpec& spec,
                                      std::size_t max_sweeps = 10'000, std::size_t workers = 1) {
    DiscreteModel model = build_discrete_mdp(scenario, spec);
    const double gamma = model.scenario.params.gamma;
    // Absolute tolerance relative to the reward scale; rewards here reach ~1e10.
    const double tolerance = std::max(1e-9 * model.mdp.max_abs_reward(), 1e-9);
    auto solution = value_iteration(model.mdp, gamma, tolerance, max_sweeps, workers);
    return ViPolicyTables{std::move(model), std::move(solution), gamma};
}

struct ViDecision {
    Action action;
    bool clamped = false;
};

/// Greedy action for a concrete state of the reduced scenario. Actions that are
/// infeasible in the concrete state are skipped; ties go to enumeration order.
inline ViDecision vi_policy_action(const ViPolicyTables& tables, const GridState& state) {
    const auto& model = tables.model;
    if (state.size() != model.abstraction.city_count()) {
        throw ValidationError({"vi_policy_action: state has " + std::to_string(state.size()) +
                               " cities, tables were built for " +
                               std::to_string(model.abstraction.city_count())});
    }
    ViDecision out;
    const std::size_t s = model.abstraction.encode(state, out.clamped);
    const auto& params = model.scenario.params;
    const std::size_t A = model.mdp.action_count();
    double best_q = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < A; ++a) {
        const Action action = Action::from_ordinal(a);
        if (!is_feasible(state, action, params)) continue;
        const double q = q_value(model.mdp, tables.solution.values, tables.gamma, s, a);
        if (q > best_q) {
            best_q = q;
            out.action = action;
        }
    }
    return out;
}

}  // namespace equigrid
