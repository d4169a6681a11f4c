#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "equigrid/domain.hpp"
#include "equigrid/environment.hpp"
#include "equigrid/policies.hpp"
#include "equigrid/rng.hpp"

namespace equigrid {

class EpisodeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Environment demand draws and policy randomness use separate streams of the
/// episode seed, so every policy sees the same demand sequence.
inline constexpr std::uint64_t kEnvironmentStream = 0;
inline constexpr std::uint64_t kPolicyStream = 1;

struct StepRecord {
    GridState state;  // before the action
    Action action;
    double reward = 0.0;
    Money action_cost;
    Money op_cost;
    Money op_cost_shortfall;
    std::vector<double> demands;
    bool state_clamped = false;
};

struct EpisodeTrace {
    std::uint64_t seed = 0;
    std::string policy;
    GridState initial_state;
    std::vector<StepRecord> steps;
    GridState final_state;

    /// State after step t.
    const GridState& state_after(std::size_t t) const {
        return t + 1 < steps.size() ? steps[t + 1].state : final_state;
    }
};

inline EpisodeTrace run_episode(const PolicyHandle& policy, const Scenario& scenario, std::size_t horizon,
                                std::uint64_t seed) {
    if (horizon < 1) throw ValidationError({"run_episode: horizon must be >= 1"});
    const Scenario& sc = policy.scenario_override ? *policy.scenario_override : scenario;
    Rng env_rng(seed, kEnvironmentStream);
    Rng policy_rng(seed, kPolicyStream);

    EpisodeTrace trace;
    trace.seed = seed;
    trace.policy = policy.name;
    trace.initial_state = sc.initial_state();
    trace.steps.reserve(horizon);

    GridState state = trace.initial_state;
    for (std::size_t t = 0; t < horizon; ++t) {
        const Decision decision = policy.decide(state, DecisionContext{t, horizon}, policy_rng);
        if (!is_feasible(state, decision.action, sc.params)) {
            throw EpisodeError("policy '" + policy.name + "' returned infeasible action " +
                               describe(decision.action, state) + " at step " + std::to_string(t) +
                               " (seed " + std::to_string(seed) +
                               "): " + infeasibility_reason(state, decision.action, sc.params));
        }
        auto outcome = step(state, decision.action, env_rng, sc.params);
        trace.steps.push_back(StepRecord{std::move(state), decision.action, outcome.reward,
                                         outcome.action_cost_paid, outcome.op_cost_paid,
                                         outcome.op_cost_shortfall, std::move(outcome.demands_drawn),
                                         decision.state_clamped});
        state = std::move(outcome.next_state);
    }
    trace.final_state = std::move(state);
    return trace;
}

/// Sum over t of gamma^t r_t, t from 0.
inline double discounted_return(const EpisodeTrace& trace, double gamma) {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ValidationError({"discounted_return: gamma must lie in (0, 1]"});
    double total = 0.0;
    double discount = 1.0;
    for (const auto& rec : trace.steps) {
        total += discount * rec.reward;
        discount *= gamma;
    }
    return total;
}

struct MetricsRecord {
    double discounted_return = 0.0;
    double re_fraction = 0.0;
    double budget_used = 0.0;
    double underserved_low_income_cities = 0.0;
    double underserved_high_income_cities = 0.0;
    double underserved_low_income_population = 0.0;
    double underserved_high_income_population = 0.0;

    static constexpr std::size_t kFieldCount = 7;

    std::array<double, kFieldCount> values() const {
        return {discounted_return,
                re_fraction,
                budget_used,
                underserved_low_income_cities,
                underserved_high_income_cities,
                underserved_low_income_population,
                underserved_high_income_population};
    }
};

/// Outcome metrics of one state. Cities with zero demand are never
/// underserved and are skipped in the renewable fraction.
inline MetricsRecord state_metrics(const GridState& state, Money initial_budget) {
    MetricsRecord m;
    double re_served = 0.0;
    double demand = 0.0;
    for (const auto& c : state.cities) {
        if (!(c.demand > 0.0)) continue;
        re_served += std::min(c.re_supply, c.demand);
        demand += c.demand;
        const double unmet = c.demand - c.re_supply - c.nre_supply;
        if (unmet > 0.0) {
            const double pop = c.population * std::min(1.0, unmet / c.demand);
            if (c.income == Income::Low) {
                m.underserved_low_income_cities += 1.0;
                m.underserved_low_income_population += pop;
            } else {
                m.underserved_high_income_cities += 1.0;
                m.underserved_high_income_population += pop;
            }
        }
    }
    m.re_fraction = demand > 0.0 ? re_served / demand : 0.0;
    m.budget_used = (initial_budget - state.budget).to_double();
    return m;
}

inline MetricsRecord compute_metrics(const EpisodeTrace& trace, const Scenario& scenario) {
    MetricsRecord m = state_metrics(trace.final_state, trace.initial_state.budget);
    m.discounted_return = discounted_return(trace, scenario.params.gamma);
    return m;
}

struct MetricStat {
    double mean = 0.0;
    double std = 0.0;
};

struct AggregateResult {
    std::string policy;
    std::size_t episodes = 0;
    std::array<MetricStat, MetricsRecord::kFieldCount> stats{};

    const MetricStat& discounted_return() const { return stats[0]; }
    const MetricStat& re_fraction() const { return stats[1]; }
    const MetricStat& budget_used() const { return stats[2]; }
    const MetricStat& low_income_cities() const { return stats[3]; }
    const MetricStat& high_income_cities() const { return stats[4]; }
    const MetricStat& low_income_population() const { return stats[5]; }
    const MetricStat& high_income_population() const { return stats[6]; }
};

/// Per-metric sample mean and standard deviation (n - 1 denominator).
inline AggregateResult aggregate(const std::vector<MetricsRecord>& records, std::string policy = {}) {
    if (records.size() < 2) throw ValidationError({"aggregate: need at least 2 records"});
    AggregateResult out;
    out.policy = std::move(policy);
    out.episodes = records.size();
    const double n = static_cast<double>(records.size());
    for (std::size_t k = 0; k < MetricsRecord::kFieldCount; ++k) {
        double sum = 0.0;
        for (const auto& r : records) sum += r.values()[k];
        const double mean = sum / n;
        double ss = 0.0;
        for (const auto& r : records) {
            const double d = r.values()[k] - mean;
            ss += d * d;
        }
        out.stats[k] = MetricStat{mean, std::sqrt(ss / (n - 1.0))};
    }
    return out;
}

/// Per-step mean of the state metrics across episodes (plot series).
struct SeriesPoint {
    std::size_t step = 0;
    double reward_mean = 0.0;
    double re_fraction_mean = 0.0;
    double budget_used_mean = 0.0;
    double low_income_population_mean = 0.0;
    double high_income_population_mean = 0.0;
};

inline std::vector<SeriesPoint> step_series(const std::vector<EpisodeTrace>& traces) {
    std::vector<SeriesPoint> out;
    if (traces.empty()) return out;
    const std::size_t H = traces.front().steps.size();
    for (std::size_t t = 0; t < H; ++t) {
        SeriesPoint p;
        p.step = t + 1;
        for (const auto& tr : traces) {
            const auto m = state_metrics(tr.state_after(t), tr.initial_state.budget);
            p.reward_mean += tr.steps[t].reward;
            p.re_fraction_mean += m.re_fraction;
            p.budget_used_mean += m.budget_used;
            p.low_income_population_mean += m.underserved_low_income_population;
            p.high_income_population_mean += m.underserved_high_income_population;
        }
        const double n = static_cast<double>(traces.size());
        p.reward_mean /= n;
        p.re_fraction_mean /= n;
        p.budget_used_mean /= n;
        p.low_income_population_mean /= n;
        p.high_income_population_mean /= n;
        out.push_back(p);
    }
    return out;
}

struct PolicyRun {
    AggregateResult summary;
    std::vector<EpisodeTrace> traces;
    std::vector<MetricsRecord> metrics;
    std::map<std::string, std::string> metadata;
};

struct BenchmarkTable {
    std::vector<PolicyRun> rows;  // descending mean discounted return
};

/// Runs every policy on seeds base_seed .. base_seed + n_episodes - 1.
/// Episodes are spread over `jobs` workers; results do not depend on `jobs`.
inline BenchmarkTable benchmark(const std::vector<PolicyHandle>& policies, const Scenario& scenario,
                                std::size_t n_episodes, std::uint64_t base_seed, std::size_t horizon,
                                std::size_t jobs = 1) {
    if (n_episodes < 2) throw ValidationError({"benchmark: need at least 2 episodes"});
    if (policies.empty()) throw ValidationError({"benchmark: no policies"});

    const std::size_t total = policies.size() * n_episodes;
    std::vector<EpisodeTrace> traces(total);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        for (std::size_t k = next++; k < total; k = next++) {
            try {
                const auto& policy = policies[k / n_episodes];
                traces[k] = run_episode(policy, scenario, horizon, base_seed + k % n_episodes);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = total;
            }
        }
    };
    jobs = std::clamp<std::size_t>(jobs, 1, total);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    BenchmarkTable table;
    for (std::size_t p = 0; p < policies.size(); ++p) {
        const auto& policy = policies[p];
        const Scenario& sc = policy.scenario_override ? *policy.scenario_override : scenario;
        PolicyRun run;
        run.metadata = policy.metadata;
        for (std::size_t e = 0; e < n_episodes; ++e) {
            run.traces.push_back(std::move(traces[p * n_episodes + e]));
            run.metrics.push_back(compute_metrics(run.traces.back(), sc));
        }
        run.summary = aggregate(run.metrics, policy.name);
        table.rows.push_back(std::move(run));
    }
    std::stable_sort(table.rows.begin(), table.rows.end(), [](const PolicyRun& a, const PolicyRun& b) {
        return a.summary.discounted_return().mean > b.summary.discounted_return().mean;
    });
    return table;
}

}  // namespace equigrid
