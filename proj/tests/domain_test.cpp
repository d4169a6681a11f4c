#include <algorithm>
#include <set>

#include <gtest/gtest.h>

#include "equigrid/domain.hpp"
#include "equigrid/scenario_io.hpp"
#include "equigrid/run.hpp"

namespace equigrid {
namespace {

TEST(IncomeClass, DefaultCityExamples) {
    EXPECT_EQ(income_class(0.33, 0.25), Income::Low);   // Atlanta
    EXPECT_EQ(income_class(0.20, 0.25), Income::High);  // Houston
    EXPECT_EQ(income_class(0.25, 0.25), Income::Low);   // inclusive boundary
}

TEST(IncomeClass, RejectsOutOfRangeFractions) {
    EXPECT_THROW(income_class(-0.1, 0.25), ValidationError);
    EXPECT_THROW(income_class(1.1, 0.25), ValidationError);
    EXPECT_THROW(income_class(0.3, 1.5), ValidationError);
}

TEST(IncomeClass, MonotoneInShare) {
    for (double threshold : {0.0, 0.1, 0.25, 0.5, 1.0}) {
        Income prev = income_class(0.0, threshold);
        for (int k = 1; k <= 100; ++k) {
            const Income cur = income_class(k / 100.0, threshold);
            EXPECT_FALSE(prev == Income::Low && cur == Income::High) << "threshold " << threshold;
            prev = cur;
        }
    }
}

TEST(EnumerateActions, Counts) {
    EXPECT_EQ(enumerate_actions(1).size(), 5u);
    // Count the n=8 enumeration kind by kind.
    const auto actions = enumerate_actions(8);
    std::size_t do_nothing = 0, per_kind[5] = {};
    for (const auto& a : actions) {
        if (a.kind == ActionKind::DoNothing) ++do_nothing;
        ++per_kind[static_cast<int>(a.kind)];
    }
    EXPECT_EQ(do_nothing, 1u);
    for (int k = 1; k < 5; ++k) EXPECT_EQ(per_kind[k], 8u);
    EXPECT_EQ(actions.size(), 33u);
}

TEST(EnumerateActions, OrderAndOrdinals) {
    const auto actions = enumerate_actions(2);
    ASSERT_EQ(actions.size(), 9u);
    EXPECT_EQ(actions[0], Action::do_nothing());
    EXPECT_EQ(actions[1], Action::add_re(0));
    EXPECT_EQ(actions[2], Action::add_nre(0));
    EXPECT_EQ(actions[3], Action::remove_re(0));
    EXPECT_EQ(actions[4], Action::remove_nre(0));
    EXPECT_EQ(std::count(actions.begin(), actions.end(), Action::remove_nre(1)), 1);
    for (std::size_t k = 0; k < actions.size(); ++k) {
        EXPECT_EQ(actions[k].ordinal(), k);
        EXPECT_EQ(Action::from_ordinal(k), actions[k]);
    }
}

TEST(EnumerateActions, DistinctFor1To64) {
    for (std::size_t n = 1; n <= 64; ++n) {
        const auto actions = enumerate_actions(n);
        ASSERT_EQ(actions.size(), 4 * n + 1);
        std::set<std::size_t> ordinals;
        for (const auto& a : actions) ordinals.insert(a.ordinal());
        EXPECT_EQ(ordinals.size(), actions.size());
    }
}

TEST(EnumerateActions, ZeroCitiesRejected) { EXPECT_THROW(enumerate_actions(0), ValidationError); }

CityState plain_city(const std::string& name) {
    CityState c;
    c.name = name;
    c.demand = c.baseline_demand = 100;
    c.re_supply = 10;
    c.nre_supply = 10;
    c.population = 1000;
    c.demand_stddev = 1;
    c.re_op_cost = 8;
    c.nre_op_cost = 40;
    return c;
}

TEST(ValidateScenario, DefaultScenarioIsValid) {
    const Scenario sc = load_scenario(resolve_scenario_path("default"));
    EXPECT_EQ(sc.cities.size(), 8u);
}

TEST(ValidateScenario, GammaOneRejected) {
    ScenarioParams p;
    p.gamma = 1.0;
    try {
        validate_scenario(p, {plain_city("A")});
        FAIL() << "expected a validation error";
    } catch (const ValidationError& e) {
        ASSERT_EQ(e.violations().size(), 1u);
        EXPECT_NE(e.violations()[0].find("discount out of range"), std::string::npos);
    }
}

TEST(ValidateScenario, NegativeSupplyNamesCityAndField) {
    auto c = plain_city("Springfield");
    c.re_supply = -1;
    try {
        validate_scenario(ScenarioParams{}, {plain_city("A"), c});
        FAIL() << "expected a validation error";
    } catch (const ValidationError& e) {
        ASSERT_EQ(e.violations().size(), 1u);
        EXPECT_NE(e.violations()[0].find("Springfield"), std::string::npos);
        EXPECT_NE(e.violations()[0].find("re_supply"), std::string::npos);
    }
}

TEST(ValidateScenario, ReportsEveryViolation) {
    ScenarioParams p;
    p.gamma = 0.0;
    p.add_re_cost = Money::from_cents(-5);
    p.re_increment = 0;
    auto c = plain_city("B");
    c.demand_stddev = -1;
    try {
        validate_scenario(p, {c});
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_EQ(e.violations().size(), 4u);
    }
    EXPECT_THROW(validate_scenario(ScenarioParams{}, {}), ValidationError);
}

TEST(Money, ExactCentArithmetic) {
    const Money a = Money::from_double(3000.0);
    const Money b = Money::from_double(0.1);
    Money acc = a;
    for (int k = 0; k < 10; ++k) acc -= b;
    EXPECT_EQ(acc, Money::from_double(2999.0));
    EXPECT_EQ(Money::from_double(0.125).cents(), 13);  // half away from zero
    EXPECT_EQ(Money::from_double(-0.125).cents(), -13);
    EXPECT_EQ(Money::from_cents(-1234).to_string(), "-12.34");
}

}  // namespace
}  // namespace equigrid
