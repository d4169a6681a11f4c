#include <algorithm>
#include <numeric>

#include <gtest/gtest.h>

#include "equigrid/evaluation.hpp"
#include "equigrid/report.hpp"
#include "test_support.hpp"

namespace equigrid {
namespace {

TEST(RunEpisode, HorizonOneNoop) {
    const auto sc = testing::default_scenario();
    const auto trace = run_episode(make_policy("noop", sc), sc, 1, 7);
    ASSERT_EQ(trace.steps.size(), 1u);
    EXPECT_EQ(trace.steps[0].action, Action::do_nothing());
    EXPECT_EQ(trace.steps[0].demands.size(), sc.cities.size());
    EXPECT_LT(trace.final_state.budget, trace.initial_state.budget);
}

TEST(RunEpisode, RepeatableTraces) {
    const auto sc = testing::default_scenario();
    const auto policy = make_policy("random", sc);
    EXPECT_EQ(trace_json(run_episode(policy, sc, 10, 99)), trace_json(run_episode(policy, sc, 10, 99)));
    EXPECT_NE(trace_json(run_episode(policy, sc, 10, 99)), trace_json(run_episode(policy, sc, 10, 100)));
}

TEST(RunEpisode, InfeasibleActionIsAnError) {
    const auto sc = testing::default_scenario();
    PolicyHandle bad{"bad",
                     [](const GridState&, const DecisionContext&, Rng&) {
                         return Decision{Action::remove_re(0)};
                     },
                     {},
                     std::nullopt};
    try {
        run_episode(bad, sc, 3, 1);
        FAIL();
    } catch (const EpisodeError& e) {
        EXPECT_NE(std::string(e.what()).find("RemoveRE@Atlanta"), std::string::npos) << e.what();
    }
}

TEST(RunEpisode, PoliciesShareDemandDraws) {
    const auto sc = testing::default_scenario();
    const auto a = run_episode(make_policy("random", sc), sc, 10, 5);
    const auto b = run_episode(make_policy("expert", sc), sc, 10, 5);
    for (std::size_t t = 0; t < 10; ++t) EXPECT_EQ(a.steps[t].demands, b.steps[t].demands);
}

TEST(DiscountedReturn, TwoSteps) {
    EpisodeTrace trace;
    trace.steps.resize(2);
    trace.steps[0].reward = 10;
    trace.steps[1].reward = 10;
    EXPECT_DOUBLE_EQ(discounted_return(trace, 0.95), 19.5);
    EXPECT_THROW(discounted_return(trace, 0.0), ValidationError);
}

TEST(StateMetrics, WorkedExample) {
    GridState g{Money::from_double(70.0), {testing::make_city("A", Income::Low, 10, 2, 3, 1000)}};
    const auto m = state_metrics(g, Money::from_double(100.0));
    EXPECT_DOUBLE_EQ(m.underserved_low_income_population, 500.0);
    EXPECT_DOUBLE_EQ(m.underserved_low_income_cities, 1.0);
    EXPECT_DOUBLE_EQ(m.underserved_high_income_population, 0.0);
    EXPECT_DOUBLE_EQ(m.re_fraction, 0.2);
    EXPECT_DOUBLE_EQ(m.budget_used, 30.0);
}

TEST(StateMetrics, ZeroDemandCitySkipped) {
    GridState g{Money{}, {testing::make_city("A", Income::High, 0, 5, 0, 1000),
                          testing::make_city("B", Income::High, 10, 5, 0, 1000)}};
    const auto m = state_metrics(g, Money{});
    EXPECT_DOUBLE_EQ(m.re_fraction, 0.5);
    EXPECT_DOUBLE_EQ(m.underserved_high_income_cities, 1.0);
}

TEST(ComputeMetrics, NoopBudgetUsedIsOperatingCost) {
    const auto sc = testing::default_scenario();
    const auto trace = run_episode(make_policy("noop", sc), sc, 10, 3);
    Money paid;
    for (const auto& s : trace.steps) paid += s.op_cost;
    EXPECT_DOUBLE_EQ(compute_metrics(trace, sc).budget_used, paid.to_double());
}

MetricsRecord with_return(double r) {
    MetricsRecord m;
    m.discounted_return = r;
    return m;
}

TEST(Aggregate, MeanAndSampleStd) {
    const auto agg = aggregate({with_return(1), with_return(3)}, "p");
    EXPECT_DOUBLE_EQ(agg.discounted_return().mean, 2.0);
    EXPECT_DOUBLE_EQ(agg.discounted_return().std, std::sqrt(2.0));
    EXPECT_EQ(agg.episodes, 2u);
}

TEST(Aggregate, NeedsTwoRecords) {
    EXPECT_THROW(aggregate({}), ValidationError);
    EXPECT_THROW(aggregate({with_return(1)}), ValidationError);
}

TEST(Aggregate, PermutationInvariant) {
    Rng rng(2);
    std::vector<MetricsRecord> recs;
    for (int k = 0; k < 20; ++k) {
        MetricsRecord m;
        m.discounted_return = rng.uniform(-1e9, 1e9);
        m.re_fraction = rng.uniform(0, 1);
        m.budget_used = rng.uniform(0, 3000);
        recs.push_back(m);
    }
    const auto a = aggregate(recs);
    std::reverse(recs.begin(), recs.end());
    std::rotate(recs.begin(), recs.begin() + 7, recs.end());
    const auto b = aggregate(recs);
    for (std::size_t k = 0; k < MetricsRecord::kFieldCount; ++k) {
        EXPECT_NEAR(a.stats[k].mean, b.stats[k].mean, 1e-9 * (1 + std::abs(a.stats[k].mean)));
        EXPECT_NEAR(a.stats[k].std, b.stats[k].std, 1e-9 * (1 + a.stats[k].std));
    }
}

TEST(Benchmark, RowsSortedByReturn) {
    const auto sc = testing::default_scenario();
    const auto table =
        benchmark({make_policy("random", sc), make_policy("noop", sc), make_policy("expert", sc)}, sc, 10, 1, 10);
    ASSERT_EQ(table.rows.size(), 3u);
    for (std::size_t k = 1; k < table.rows.size(); ++k) {
        EXPECT_GE(table.rows[k - 1].summary.discounted_return().mean, table.rows[k].summary.discounted_return().mean);
    }
    EXPECT_EQ(table.rows.front().summary.policy, "expert");
}

TEST(Benchmark, NoopSpendsLessThanBuilders) {
    const auto sc = testing::default_scenario();
    const auto table = benchmark({make_policy("noop", sc), make_policy("expert", sc), make_policy("random", sc)},
                                 sc, 20, 1, 10);
    double noop = 0;
    for (const auto& r : table.rows) {
        if (r.summary.policy == "noop") noop = r.summary.budget_used().mean;
    }
    for (const auto& r : table.rows) {
        if (r.summary.policy == "noop") continue;
        EXPECT_LT(noop, r.summary.budget_used().mean) << r.summary.policy;
    }
}

TEST(Benchmark, IndependentOfJobCount) {
    const auto sc = testing::default_scenario();
    PolicyOptions opts;
    opts.mcts.iterations = 40;
    const std::vector<PolicyHandle> policies{make_policy("random", sc), make_policy("mcts-base", sc, opts)};
    const auto one = benchmark(policies, sc, 6, 10, 10, 1);
    const auto three = benchmark(policies, sc, 6, 10, 10, 3);
    EXPECT_EQ(results_csv(one), results_csv(three));
    EXPECT_EQ(series_json(one), series_json(three));
}

TEST(Benchmark, RejectsTooFewEpisodes) {
    const auto sc = testing::default_scenario();
    EXPECT_THROW(benchmark({make_policy("noop", sc)}, sc, 1, 1, 10), ValidationError);
}

TEST(StepSeries, OnePointPerStep) {
    const auto sc = testing::default_scenario();
    const auto table = benchmark({make_policy("noop", sc)}, sc, 3, 1, 4);
    const auto series = step_series(table.rows[0].traces);
    ASSERT_EQ(series.size(), 4u);
    EXPECT_EQ(series.back().step, 4u);
    EXPECT_DOUBLE_EQ(series.back().budget_used_mean, table.rows[0].summary.budget_used().mean);
}

}  // namespace
}  // namespace equigrid
