#include <doctest.h>

#include "cirl/core.hpp"
#include "cirl/oracle.hpp"
#include "cirl/scenarios.hpp"

using namespace cirl;

namespace {

EnvSpec two_state_spec() {
    EnvSpec spec;
    spec.num_states = 2;
    spec.num_actions = 2;
    spec.horizon = 3;
    spec.terminal_scoring = true;
    Goal goal;
    goal.goal_id = 0;
    goal.initial_state = 0;
    goal.target_state = 1;
    spec.goals.push_back(goal);
    TransitionKernel::Table table(1);
    table[0] = {{{0.5, 0.5}, {0.5, 0.5}}, {{0.5, 0.5}, {0.5, 0.5}}};
    spec.kernels.emplace_back(KernelLabel::real, table);
    return spec;
}

} // namespace

TEST_CASE("make_environment accepts a well-formed spec and precomputes the reward scale") {
    const EnvironmentBundle bundle = make_environment(two_state_spec());
    CHECK(bundle.env.num_states() == 2);
    CHECK(bundle.env.horizon() == 3);
    CHECK(bundle.kernels.size() == 1);
    // Sparse scoring: the terminal score sets the scale.
    CHECK(bundle.env.r_max() == 1.0);

    EnvSpec chain = two_state_spec();
    chain.terminal_scoring = false;
    chain.step_reward = {{0.25, 0.5}, {0.0, 0.0}};
    CHECK(make_environment(chain).env.r_max() == 0.5);
}

TEST_CASE("make_environment rejects a kernel row with mass 0.9") {
    EnvSpec spec = two_state_spec();
    spec.kernels[0].second[0][0][0] = {0.5, 0.4};
    CHECK_THROWS_AS(make_environment(spec), InvalidKernelRow);
}

TEST_CASE("make_environment rejects negative-probability rows") {
    EnvSpec spec = two_state_spec();
    spec.kernels[0].second[0][1][1] = {1.2, -0.2};
    CHECK_THROWS_AS(make_environment(spec), InvalidKernelRow);
}

TEST_CASE("make_environment enforces absorbing closure on every kernel row") {
    EnvSpec spec = two_state_spec();
    spec.absorbing_states = {1};
    // State 1 rows must be self point masses.
    CHECK_THROWS_AS(make_environment(spec), NonAbsorbing);
    spec.kernels[0].second[0][1] = {{0.0, 1.0}, {0.0, 1.0}};
    CHECK_NOTHROW(make_environment(spec));
}

TEST_CASE("history-mode enumerability guard: 10 states with H=6 is rejected") {
    EnvSpec spec = two_state_spec();
    spec.num_states = 10;
    spec.horizon = 6;
    spec.context_mode = ContextMode::history;
    spec.kernels.clear();
    CHECK_THROWS_AS(make_environment(spec), SizeGuard);
}

TEST_CASE("score is an indicator without a table and a lookup with one") {
    Goal goal;
    goal.goal_id = 0;
    goal.target_state = 1;
    CHECK(score(1, goal) == 1.0);
    CHECK(score(0, goal) == 0.0);

    goal.score_table = std::map<int, double>{{0, 0.3}, {1, 1.0}};
    CHECK(score(0, goal) == 0.3);
    CHECK(score(1, goal) == 1.0);
    CHECK(score(2, goal) == 0.0); // absent key
}

TEST_CASE("score table must grade the target at exactly 1") {
    EnvSpec spec = two_state_spec();
    spec.goals[0].score_table = std::map<int, double>{{0, 0.4}, {1, 0.9}};
    CHECK_THROWS_AS(make_environment(spec), std::invalid_argument);
}

TEST_CASE("terminal scoring and step rewards are mutually exclusive") {
    EnvSpec spec = two_state_spec();
    spec.step_reward = {{1.0, 1.0}, {1.0, 1.0}};
    CHECK_THROWS_AS(make_environment(spec), std::invalid_argument);
}

TEST_CASE("score stays within [0,1] across states and goals of shipped scenarios") {
    const Scenario scenario = random_mdp(11, 5, 3, 4, 2);
    for (int g = 0; g < scenario.env.num_goals(); ++g) {
        const Goal& goal = scenario.env.goals()[static_cast<std::size_t>(g)];
        CHECK(goal.score(goal.target_state) == 1.0);
        for (int s = 0; s < scenario.env.num_states(); ++s) {
            const double value = scenario.env.score(s, g);
            CHECK(value >= 0.0);
            CHECK(value <= 1.0);
        }
    }
}

TEST_CASE("absorbing closure: rollouts started in an absorbing state never move") {
    EnvSpec spec = two_state_spec();
    spec.absorbing_states = {1};
    spec.kernels[0].second[0][1] = {{0.0, 1.0}, {0.0, 1.0}};
    spec.goals[0].initial_state = 1;
    const EnvironmentBundle bundle = make_environment(spec);

    const Policy uniform = Policy::uniform(ContextMode::markov, 2, 2);
    const std::vector<DistributionTable> tables =
        exact_distributions(bundle.env, uniform, bundle.kernels[0]);
    for (const DistributionTable& table : tables) {
        CHECK(table.p[table.marginal_index(0, 1)] == doctest::Approx(1.0).epsilon(1e-12));
    }
}
