#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "equigrid/environment.hpp"
#include "test_support.hpp"

namespace equigrid {
namespace {

using testing::make_city;
using testing::plain_params;

GridState two_city_grid() {
    return GridState{Money::from_double(1000.0),
                     {make_city("A", Income::Low, 50, 1, 3, 1, 10, 40), make_city("B", Income::High, 50, 2, 4, 1, 10, 40)}};
}

TEST(OperatingCost, EmptyGridIsZero) {
    GridState g{Money::from_double(100.0),
                {make_city("A", Income::Low, 10, 0, 0, 1, 10, 40), make_city("B", Income::High, 10, 0, 0, 1, 10, 40)}};
    EXPECT_EQ(operating_cost(g, std::nullopt, 0, 0), Money{});
}

TEST(OperatingCost, HandSum) {
    // 10*1 + 10*2 + 40*3 + 40*4
    EXPECT_EQ(operating_cost(two_city_grid(), std::nullopt, 0, 0), Money::from_double(310.0));
}

TEST(OperatingCost, DeltaOnlyAtTarget) {
    EXPECT_EQ(operating_cost(two_city_grid(), 0, 100, 0), Money::from_double(1310.0));
    EXPECT_EQ(operating_cost(two_city_grid(), 1, 0, 1), Money::from_double(350.0));
    EXPECT_EQ(operating_cost(two_city_grid(), 0, 0, 0, 0.01), Money::from_double(3.1));
}

TEST(OperatingCost, NegativeSupplyAfterDeltaIsInfeasible) {
    EXPECT_THROW(operating_cost(two_city_grid(), 0, -2, 0), InfeasibleAction);
    EXPECT_THROW(operating_cost(two_city_grid(), std::nullopt, 5, 0), InfeasibleAction);
}

TEST(ApplyAction, DoNothingOnEmptyGrid) {
    GridState g{Money::from_double(100.0), {make_city("A", Income::Low, 10, 0, 0, 1, 10, 40)}};
    const auto next = apply_action(g, Action::do_nothing(), plain_params(100.0));
    EXPECT_EQ(next, g);
}

TEST(ApplyAction, AddReHandEvaluation) {
    ScenarioParams p = plain_params(1000.0);
    p.add_re_cost = Money::from_double(180.0);
    p.re_increment = 100.0;
    GridState g{Money::from_double(1000.0), {make_city("A", Income::Low, 10, 5, 5, 1, 1, 1)}};
    const auto next = apply_action(g, Action::add_re(0), p);
    EXPECT_DOUBLE_EQ(next.cities[0].re_supply, 105.0);
    EXPECT_EQ(next.budget, Money::from_double(710.0));  // 1000 - 180 - (105 + 5)
}

TEST(ApplyAction, RemovalBelowIncrementIsInfeasible) {
    ScenarioParams p = plain_params(1000.0);
    GridState g{Money::from_double(1000.0), {make_city("A", Income::Low, 10, 5, 50, 1)}};
    try {
        apply_action(g, Action::remove_nre(0), p);
        FAIL();
    } catch (const InfeasibleAction& e) {
        EXPECT_NE(std::string(e.what()).find("NRE supply"), std::string::npos);
    }
}

TEST(ApplyAction, CostAndSupplyPerActionKind) {
    ScenarioParams p = plain_params(10000.0);
    p.re_increment = 7.0;
    p.nre_increment = 11.0;
    GridState g{Money::from_double(10000.0),
                {make_city("A", Income::Low, 10, 50, 50, 1), make_city("B", Income::High, 10, 50, 50, 1),
                 make_city("C", Income::Low, 10, 50, 50, 1)}};
    struct Row {
        ActionKind kind;
        double dr, dn;
    };
    for (const Row row : {Row{ActionKind::AddRE, 7, 0}, Row{ActionKind::AddNRE, 0, 11},
                          Row{ActionKind::RemoveRE, -7, 0}, Row{ActionKind::RemoveNRE, 0, -11}}) {
        for (std::size_t i = 0; i < g.size(); ++i) {
            const auto next = apply_action(g, Action{row.kind, i}, p);
            for (std::size_t j = 0; j < g.size(); ++j) {
                const double dr = j == i ? row.dr : 0.0;
                const double dn = j == i ? row.dn : 0.0;
                EXPECT_DOUBLE_EQ(next.cities[j].re_supply - g.cities[j].re_supply, dr);
                EXPECT_DOUBLE_EQ(next.cities[j].nre_supply - g.cities[j].nre_supply, dn);
                EXPECT_EQ(next.cities[j].demand, g.cities[j].demand);
                EXPECT_EQ(next.cities[j].population, g.cities[j].population);
            }
        }
    }
    const auto same = apply_action(g, Action::do_nothing(), p);
    for (std::size_t j = 0; j < g.size(); ++j) {
        EXPECT_EQ(same.cities[j], g.cities[j]);
    }
}

TEST(ApplyAction, BudgetFlooredAtZeroRecordsShortfall) {
    ScenarioParams p = plain_params(100.0);
    p.add_re_cost = Money::from_double(90.0);
    GridState g{Money::from_double(100.0), {make_city("A", Income::Low, 10, 5, 5, 1, 1, 1)}};
    const auto applied = apply_action_detailed(g, Action::add_re(0), p);
    EXPECT_EQ(applied.state.budget, Money{});
    EXPECT_EQ(applied.op_cost, Money::from_double(10.0));
    EXPECT_EQ(applied.op_cost_shortfall, Money::from_double(100.0));  // 105 + 5 - 10
    EXPECT_EQ(g.budget - applied.action_cost - applied.op_cost, applied.state.budget);
}

TEST(FeasibleActions, OnlyDoNothingWhenBroke) {
    GridState g{Money{}, {make_city("A", Income::Low, 10, 0, 0, 1), make_city("B", Income::High, 10, 0, 0, 1)}};
    const auto actions = feasible_actions(g, ScenarioParams{});
    ASSERT_EQ(actions.size(), 1u);
    EXPECT_EQ(actions[0], Action::do_nothing());
}

TEST(FeasibleActions, DefaultInitialState) {
    const auto sc = testing::default_scenario();
    const auto g = sc.initial_state();
    // Every shipped supply is below the 100-unit increment, so removals are out.
    for (const auto& c : g.cities) {
        ASSERT_LT(c.re_supply, sc.params.re_increment);
        ASSERT_LT(c.nre_supply, sc.params.nre_increment);
    }
    const auto actions = feasible_actions(g, sc.params);
    ASSERT_EQ(actions.size(), 17u);
    EXPECT_EQ(actions[0], Action::do_nothing());
    for (std::size_t i = 0; i < 8; ++i) {
        EXPECT_EQ(actions[1 + 2 * i], Action::add_re(i));
        EXPECT_EQ(actions[2 + 2 * i], Action::add_nre(i));
    }
}

TEST(FeasibleActions, CostGate) {
    auto sc = testing::default_scenario();
    auto g = sc.initial_state();
    g.budget = Money::from_double(150.0);
    const auto actions = feasible_actions(g, sc.params);
    std::size_t add_re = 0, add_nre = 0;
    for (const auto& a : actions) {
        add_re += a.kind == ActionKind::AddRE;
        add_nre += a.kind == ActionKind::AddNRE;
    }
    EXPECT_EQ(add_re, 0u);
    EXPECT_EQ(add_nre, 8u);
}

TEST(SampleDemands, ZeroSigmaReturnsMean) {
    GridState g{Money{}, {make_city("A", Income::Low, 580, 0, 0, 1, 0, 0, 0.0),
                          make_city("B", Income::High, 12.5, 0, 0, 1, 0, 0, 0.0)}};
    Rng rng(9);
    const auto d = sample_demands(g, rng);
    EXPECT_EQ(d[0], 580.0);
    EXPECT_EQ(d[1], 12.5);
}

TEST(SampleDemands, SameSeedSameDraws) {
    const auto g = testing::default_scenario().initial_state();
    Rng a(77), b(77), c(78);
    const auto da = sample_demands(g, a);
    EXPECT_EQ(da, sample_demands(g, b));
    EXPECT_NE(da, sample_demands(g, c));
}

TEST(SampleDemands, ClampedAtZero) {
    GridState g{Money{}, {make_city("A", Income::Low, 0.5, 0, 0, 1, 0, 0, 10.0)}};
    Rng rng(3);
    for (int k = 0; k < 1000; ++k) EXPECT_GE(sample_demands(g, rng)[0], 0.0);
}

TEST(SampleDemands, MomentsMatchDistribution) {
    GridState g{Money{}, {make_city("A", Income::Low, 580, 0, 0, 1, 0, 0, 1.0)}};
    Rng rng(2024);
    const int n = 100000;
    double sum = 0, sumsq = 0;
    for (int k = 0; k < n; ++k) {
        const double d = sample_demands(g, rng)[0];
        sum += d;
        sumsq += d * d;
    }
    const double mean = sum / n;
    const double sd = std::sqrt((sumsq - n * mean * mean) / (n - 1));
    EXPECT_NEAR(mean, 580.0, 0.02);
    EXPECT_NEAR(sd, 1.0, 0.02);
}

TEST(Reward, HighIncomeCityHandEvaluation) {
    GridState g{Money::from_double(100.0), {make_city("A", Income::High, 5, 0, 0, 10)}};
    EXPECT_DOUBLE_EQ(reward(g, ObjectiveWeights{0.15, -25, 12}), 15.0);
}

TEST(Reward, LowIncomeCityHandEvaluation) {
    GridState g{Money{}, {make_city("A", Income::Low, 10, 2, 3, 4)}};
    EXPECT_DOUBLE_EQ(reward(g, ObjectiveWeights{0.15, -25, 12}), -404.0);
}

TEST(Reward, FullyServedHasNoPenalty) {
    GridState g{Money{}, {make_city("A", Income::Low, 10, 12, 0, 4), make_city("B", Income::Low, 7, 7, 3, 2)}};
    EXPECT_DOUBLE_EQ(reward(g, ObjectiveWeights{0.15, -25, 12}), 12.0 * (10 * 4 + 7 * 2));
}

TEST(Reward, MatchesBruteForceOracleOnRandomStates) {
    Rng rng(11);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + rng.uniform_index(8);
        GridState g{Money::from_cents(static_cast<std::int64_t>(rng.uniform_index(1'000'000))), {}};
        std::vector<testing::OracleCity> oc;
        for (std::size_t i = 0; i < n; ++i) {
            const auto inc = rng.uniform_index(2) ? Income::High : Income::Low;
            const double d = rng.uniform(0, 3000), r = rng.uniform(0, 2000), nn = rng.uniform(0, 2000);
            const double p = rng.uniform(0, 1e7);
            g.cities.push_back(make_city("c", inc, d, r, nn, p));
            oc.push_back({d, r, nn, p, indicator(inc)});
        }
        const ObjectiveWeights w{rng.uniform(0, 1), rng.uniform(-50, 0), rng.uniform(0, 50)};
        const double expected = testing::oracle_reward(g.budget.to_double(), oc, w.budget_weight,
                                                       w.underserved_penalty, w.re_access_weight);
        const double got = reward(g, w);
        EXPECT_LE(std::abs(got - expected), 1e-9 * std::max(1.0, std::abs(expected))) << "trial " << trial;
    }
}

TEST(Step, FixedPointWithoutNoiseOrCosts) {
    ScenarioParams p = plain_params(500.0);
    GridState g{Money::from_double(500.0), {make_city("A", Income::Low, 40, 10, 5, 3)}};
    Rng rng(1);
    const auto out = step(g, Action::do_nothing(), rng, p);
    EXPECT_EQ(out.next_state, g);
    EXPECT_DOUBLE_EQ(out.reward, 0.15 * 500 - 25 * 25 * 3 + 12 * 10 * 3);
}

TEST(Step, DeterministicForSeed) {
    const auto sc = testing::default_scenario();
    const auto g = sc.initial_state();
    const Action memphis = Action::add_re(5);
    ASSERT_EQ(g.cities[5].name, "Memphis");
    Rng a(42), b(42);
    const auto x = step(g, memphis, a, sc.params);
    const auto y = step(g, memphis, b, sc.params);
    EXPECT_EQ(x.next_state, y.next_state);
    EXPECT_EQ(x.reward, y.reward);
    EXPECT_EQ(x.demands_drawn, y.demands_drawn);
    EXPECT_EQ(x.op_cost_paid, y.op_cost_paid);
}

TEST(Step, BudgetIdentityAndNonNegativeSupplyOnRandomWalks) {
    const auto sc = testing::default_scenario();
    Rng rng(5);
    std::size_t violations = 0;
    for (int episode = 0; episode < 50; ++episode) {
        GridState g = sc.initial_state();
        for (int t = 0; t < 40; ++t) {
            const auto actions = feasible_actions(g, sc.params);
            const auto a = actions[rng.uniform_index(actions.size())];
            const auto out = step(g, a, rng, sc.params);
            // Independent recomputation of the charge.
            double op = 0.0;
            for (std::size_t j = 0; j < g.size(); ++j) {
                op += out.next_state.cities[j].re_supply * g.cities[j].re_op_cost +
                      out.next_state.cities[j].nre_supply * g.cities[j].nre_op_cost;
            }
            const Money charged = Money::from_double(op * sc.params.op_cost_scale);
            violations += out.op_cost_paid + out.op_cost_shortfall != charged;
            violations += out.next_state.budget != g.budget - out.action_cost_paid - out.op_cost_paid;
            for (const auto& c : out.next_state.cities) violations += c.re_supply < 0 || c.nre_supply < 0;
            violations += out.next_state.budget < Money{};
            g = out.next_state;
        }
    }
    EXPECT_EQ(violations, 0u);
}

}  // namespace
}  // namespace equigrid
