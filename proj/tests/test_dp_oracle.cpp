#include <cmath>

#include "doctest.h"
#include "mirplan/dp_oracle.hpp"
#include "mirplan/policies.hpp"
#include "support.hpp"

using namespace mirplan;
using namespace mirplan::testing;

TEST_CASE("two-arm instance reproduces the hand enumeration") {
    Instance instance = two_arm_two_point();
    const DpSolution sol = DpOracle::solve(instance);
    CHECK(sol.w_star_full() == doctest::Approx(0.64).epsilon(1e-12));
    CHECK(DpOracle::w_star(instance) == doctest::Approx(0.64).epsilon(1e-12));
    CHECK(sol.action(StateSet::full(2)) == PolicyAction::mix(0, 1));
}

TEST_CASE("no neg arms: every arm is explored with certainty") {
    std::vector<RewardPrior> arms;
    arms.push_back(RewardPrior::two_point(-1.0, 1.0, 0.7));
    arms.push_back(RewardPrior::two_point(-1.0, 1.0, 0.6));
    arms.push_back(RewardPrior::two_point(-1.0, 1.0, 0.55));
    Instance instance(std::move(arms), RewardPrior::point_mass(0.0));
    REQUIRE(instance.neg().empty());
    const DpSolution sol = DpOracle::solve(instance);
    CHECK(sol.w_star_full() ==
          doctest::Approx(terminal_reward(instance, StateSet::empty_set(),
                                          TerminalRewardMode::exact()))
              .epsilon(1e-12));
}

TEST_CASE("terminal full state is worthless") {
    std::vector<RewardPrior> arms;
    arms.push_back(RewardPrior::two_point(-1.0, 1.0, 0.2));
    arms.push_back(RewardPrior::two_point(-1.0, 1.0, 0.1));
    Instance instance(std::move(arms), RewardPrior::point_mass(0.0));
    REQUIRE(instance.above().empty());
    CHECK(DpOracle::w_star(instance) == 0.0);
}

TEST_CASE("index policy matches the oracle on ordered instances") {
    Rng rng(71);
    for (int it = 0; it < 30; ++it) {
        const int k = 2 + static_cast<int>(rng.below(7));
        Instance instance = generate_instance(
            k, it % 2 == 0 ? FamilyTemplate{TwoPointTemplate{}} : FamilyTemplate{DiscreteMixtureTemplate{}},
            rng);
        const double w_star = DpOracle::w_star(instance);
        OgpPolicy ogp(instance);
        const double w_ogp = w_value(instance, ogp.as_fn(), StateSet::full(k));
        CHECK(std::abs(w_ogp - w_star) <= 1e-9);
    }
}

TEST_CASE("discretized gaussian example: oracle equals the index policy") {
    Instance instance = example_gaussian_discretized();
    REQUIRE(instance.neg_arms_stochastically_ordered());
    const double w_star = DpOracle::w_star(instance);
    OgpPolicy ogp(instance);
    CHECK(std::abs(w_value(instance, ogp.as_fn(), StateSet::full(4)) - w_star) <= 1e-9);
}

TEST_CASE("value non-monotonicity across dominated-arm removals") {
    // Three arms: removing the higher-mean neg arm leaves strictly less value
    // than removing the dominated one, even though the pair is
    // dominance-ordered.
    Instance instance = nonmonotone_w_instance(0.01);
    REQUIRE(instance.neg_arms_stochastically_ordered());
    REQUIRE(dominates(instance.arm(1), instance.arm(2)) == Tristate::True);
    const DpSolution sol = DpOracle::solve(instance);
    const StateSet without_mid = StateSet::full(3).without(1);   // a2 explored
    const StateSet without_deep = StateSet::full(3).without(2);  // a3 explored

    // Independent two-step evaluation via the joint-enumeration oracle.
    OgpPolicy ogp(instance);
    CHECK(sol.value(without_mid) ==
          doctest::Approx(oracle_w(instance, ogp.as_fn(), without_mid)).epsilon(1e-12));
    CHECK(sol.value(without_deep) ==
          doctest::Approx(oracle_w(instance, ogp.as_fn(), without_deep)).epsilon(1e-12));

    CHECK(sol.value(without_mid) == doctest::Approx(637500.1375).epsilon(1e-9));
    CHECK(sol.value(without_deep) == doctest::Approx(739772.86477272725).epsilon(1e-9));
    CHECK(sol.value(without_mid) < sol.value(without_deep));

    // The pair is dominance-ordered, so the index policy is still optimal on
    // this instance.
    const double w_ogp = w_value(instance, ogp.as_fn(), StateSet::full(3));
    CHECK(std::abs(w_ogp - sol.w_star_full()) <= 1e-9 * sol.w_star_full());
}

TEST_CASE("index policy is strictly suboptimal without the stochastic order") {
    std::vector<RewardPrior> arms;
    arms.push_back(RewardPrior::finite_discrete({-1000.0, 1000.0}, {0.45, 0.55}));  // +100
    arms.push_back(RewardPrior::finite_discrete({-900.0, 50.0}, {0.9, 0.1}));       // -805
    arms.push_back(RewardPrior::finite_discrete({-102000.0, 100000.0}, {0.5, 0.5}));  // -1000
    Instance instance(std::move(arms), RewardPrior::point_mass(0.0), "unordered-gap");
    REQUIRE_FALSE(instance.neg_arms_stochastically_ordered());
    const double w_star = DpOracle::w_star(instance);
    OgpPolicy ogp(instance);
    const double w_ogp = w_value(instance, ogp.as_fn(), StateSet::full(3));
    CHECK(ogp.action(StateSet::full(3)) == PolicyAction::mix(0, 1));  // mean order picks a2
    CHECK(w_star - w_ogp > 1e3);
}

TEST_CASE("monotone in above-arm deletions") {
    Rng rng(73);
    for (int it = 0; it < 10; ++it) {
        Instance instance = generate_instance(6, DiscreteMixtureTemplate{}, rng);
        const DpSolution sol = DpOracle::solve(instance);
        for (std::uint64_t mask = 0; mask < 64; ++mask) {
            const StateSet s(mask);
            for (int i : instance.above()) {
                if (!s.contains(i)) continue;
                CHECK(sol.value(s.without(i)) <= sol.value(s) + 1e-12);
            }
        }
    }
}

TEST_CASE("random MIR polytope points never beat the oracle") {
    Rng rng(79);
    for (int it = 0; it < 4; ++it) {
        Instance instance = generate_instance(5, TwoPointTemplate{}, rng);
        const DpSolution sol = DpOracle::solve(instance);
        for (std::uint64_t mask = 1; mask < 32; ++mask) {
            const StateSet s(mask);
            if (is_terminal(instance, s)) continue;
            // Vertices of MIR(s): above singletons and boundary mixes.
            std::vector<Portfolio> vertices;
            for (int i : instance.above()) {
                if (!s.contains(i)) continue;
                vertices.push_back(Portfolio::singleton(i));
                for (int j : instance.neg())
                    if (s.contains(j)) vertices.push_back(mix_portfolio(instance, i, j));
            }
            for (int draw = 0; draw < 200; ++draw) {
                // Dirichlet-style mixture over the vertices.
                std::vector<double> lambda(vertices.size());
                double total = 0.0;
                for (auto& l : lambda) {
                    l = -std::log(1.0 - rng.uniform01());
                    total += l;
                }
                double value = 0.0, mir = 0.0;
                for (std::size_t v = 0; v < vertices.size(); ++v) {
                    for (const auto& [arm, w] : vertices[v].entries()) {
                        const double weight = lambda[v] / total * w;
                        value += weight * sol.value(s.without(arm));
                        mir += weight * instance.offset_mean(arm);
                    }
                }
                CHECK(mir >= -1e-9);
                CHECK(value <= sol.value(s) + 1e-9);
            }
        }
    }
}

TEST_CASE("solution serialization round-trips") {
    Instance instance = two_arm_two_point();
    const DpSolution sol = DpOracle::solve(instance);
    const DpSolution copy = DpSolution::deserialize(sol.serialize());
    REQUIRE(copy.num_arms == sol.num_arms);
    for (std::uint64_t mask = 0; mask < 4; ++mask) {
        CHECK(copy.w_star[mask] == sol.w_star[mask]);
        CHECK(copy.best_action[mask] == sol.best_action[mask]);
    }
}

TEST_CASE("golden solve output for the two-arm instance") {
    Instance instance = two_arm_two_point();
    const std::string golden =
        "dp-solution k=2\n"
        "0 0.71999999999999997 -1 -1\n"
        "1 0.71999999999999997 0 0\n"
        "2 0.59999999999999998 -1 -1\n"
        "3 0.64000000000000001 0 1\n";
    CHECK(DpOracle::solve(instance).serialize() == golden);
}

TEST_CASE("monte carlo terminal mode handles unbounded priors") {
    Instance gaussian = example_gaussian();
    CHECK_THROWS_AS(DpOracle::solve(gaussian), std::invalid_argument);  // exact mode
    const TerminalRewardMode mc = TerminalRewardMode::monte_carlo(31, 40000);
    const DpSolution sol = DpOracle::solve(gaussian, mc);
    OgpPolicy ogp(gaussian);
    const double w_ogp = w_value(gaussian, ogp.as_fn(), StateSet::full(4), mc);
    // The DP maximizes over the sampled reward table, so the index policy can
    // trail it, but only at the sampling-noise scale.
    CHECK(sol.w_star_full() >= w_ogp - 1e-12);
    CHECK(std::abs(sol.w_star_full() - w_ogp) <= 0.05);
    // The discretized instance brackets the Monte Carlo value.
    const double grid_value = DpOracle::w_star(example_gaussian_discretized());
    CHECK(std::abs(sol.w_star_full() - grid_value) <= 0.05);
}

TEST_CASE("lattice cap") {
    Rng rng(83);
    Instance instance = generate_instance(21, TwoPointTemplate{}, rng);
    CHECK_THROWS_AS(DpOracle::solve(instance), std::invalid_argument);
}
