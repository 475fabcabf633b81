#include "cirl/scenarios.hpp"

#include <cmath>
#include <stdexcept>

#include "cirl/rng.hpp"

namespace cirl {

BoundInstance Scenario::bound_instance() const {
    if (!reference.has_value()) {
        throw std::invalid_argument("Scenario::bound_instance: no reference policy");
    }
    return BoundInstance{env, kernel_real, behavior, *reference};
}

BoundInstance Scenario::bound_instance_swapped() const {
    if (!reference.has_value()) {
        throw std::invalid_argument("Scenario::bound_instance_swapped: no reference policy");
    }
    return BoundInstance{env, kernel_real, *reference, behavior};
}

namespace {

std::vector<double> random_row(int n, Rng& rng) {
    // Strictly positive rows keep calibration NLLs finite everywhere.
    std::vector<double> row(static_cast<std::size_t>(n));
    double sum = 0.0;
    for (double& v : row) {
        v = 0.05 + rng.next_double();
        sum += v;
    }
    for (double& v : row) v /= sum;
    return row;
}

TransitionKernel::Table random_table(int num_goals, int num_states, int num_actions, Rng& rng) {
    TransitionKernel::Table table(static_cast<std::size_t>(num_goals));
    for (auto& per_goal : table) {
        per_goal.resize(static_cast<std::size_t>(num_states));
        for (auto& per_state : per_goal) {
            per_state.resize(static_cast<std::size_t>(num_actions));
            for (auto& row : per_state) row = random_row(num_states, rng);
        }
    }
    return table;
}

std::vector<double> point_mass(int n, int at) {
    std::vector<double> row(static_cast<std::size_t>(n), 0.0);
    row[static_cast<std::size_t>(at)] = 1.0;
    return row;
}

} // namespace

Scenario random_mdp(std::uint64_t seed, int num_states, int num_actions, int horizon,
                    int num_goals) {
    if (num_states < 2 || num_actions < 1 || horizon < 1 || num_goals < 1) {
        throw std::invalid_argument("random_mdp: sizes below minimum");
    }
    Rng rng(seed);

    EnvSpec spec;
    spec.num_states = num_states;
    spec.num_actions = num_actions;
    spec.horizon = horizon;
    spec.terminal_scoring = true;
    for (int g = 0; g < num_goals; ++g) {
        Goal goal;
        goal.goal_id = g;
        goal.initial_state = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(num_states)));
        goal.target_state = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(num_states)));
        spec.goals.push_back(goal);
    }
    spec.kernels.emplace_back(KernelLabel::real,
                              random_table(num_goals, num_states, num_actions, rng));
    spec.kernels.emplace_back(KernelLabel::simulated,
                              random_table(num_goals, num_states, num_actions, rng));
    EnvironmentBundle bundle = make_environment(spec);

    Scenario scenario;
    scenario.name = "random";
    scenario.seed = seed;
    scenario.env = std::move(bundle.env);
    scenario.kernel_real = std::move(bundle.kernels[0]);
    scenario.kernel_sim = std::move(bundle.kernels[1]);
    scenario.behavior = Policy::random_gaussian(ContextMode::markov, num_states, num_actions, rng);
    scenario.reference =
        Policy::random_gaussian(ContextMode::markov, num_states, num_actions, rng);
    scenario.params = {{"num_states", static_cast<double>(num_states)},
                       {"num_actions", static_cast<double>(num_actions)},
                       {"horizon", static_cast<double>(horizon)},
                       {"num_goals", static_cast<double>(num_goals)}};
    return scenario;
}

Scenario tutoring_chain(int horizon, double deviation_prob) {
    if (horizon < 2) throw std::invalid_argument("tutoring_chain: horizon must be >= 2");
    if (!(deviation_prob >= 0.0 && deviation_prob <= 1.0)) {
        throw std::invalid_argument("tutoring_chain: deviation_prob outside [0,1]");
    }
    // States 0..H walk the good path; H is the completed chain, H+1 the bad
    // absorbing region. Every turn spent on the path pays 1 whatever the
    // action; deviation jumps to the bad region and stops paying.
    const int num_states = horizon + 2;
    const int chain_end = horizon;
    const int bad = horizon + 1;
    const int kContinue = 0;
    const int kDeviate = 1;

    EnvSpec spec;
    spec.num_states = num_states;
    spec.num_actions = 2;
    spec.horizon = horizon;
    spec.terminal_scoring = false;
    spec.absorbing_states = {chain_end, bad};
    spec.step_reward.assign(static_cast<std::size_t>(num_states), {0.0, 0.0});
    for (int s = 0; s < horizon; ++s) {
        spec.step_reward[static_cast<std::size_t>(s)] = {1.0, 1.0};
    }
    Goal goal;
    goal.goal_id = 0;
    goal.initial_state = 0;
    goal.target_state = chain_end;
    spec.goals.push_back(goal);

    TransitionKernel::Table table(1);
    table[0].resize(static_cast<std::size_t>(num_states));
    for (int s = 0; s < num_states; ++s) {
        table[0][static_cast<std::size_t>(s)].resize(2);
        if (s < horizon) {
            table[0][static_cast<std::size_t>(s)][kContinue] = point_mass(num_states, s + 1);
            table[0][static_cast<std::size_t>(s)][kDeviate] = point_mass(num_states, bad);
        } else {
            table[0][static_cast<std::size_t>(s)][kContinue] = point_mass(num_states, s);
            table[0][static_cast<std::size_t>(s)][kDeviate] = point_mass(num_states, s);
        }
    }
    spec.kernels.emplace_back(KernelLabel::real, table);
    spec.kernels.emplace_back(KernelLabel::simulated, table);
    EnvironmentBundle bundle = make_environment(spec);

    // Reference stays on the path (softmax cannot place exact zeros; a logit
    // gap of 60 leaves off-path mass ~1e-26, far inside every tolerance).
    const double kSharp = 60.0;
    std::vector<std::vector<double>> ref_logits(
        static_cast<std::size_t>(num_states), std::vector<double>{0.0, 0.0});
    for (int s = 0; s < horizon; ++s) {
        ref_logits[static_cast<std::size_t>(s)] = {kSharp, 0.0};
    }
    Policy reference(ContextMode::markov, ref_logits);

    std::vector<std::vector<double>> behavior_rows(
        static_cast<std::size_t>(num_states), std::vector<double>{0.5, 0.5});
    Policy behavior = Policy::uniform(ContextMode::markov, num_states, 2);
    if (deviation_prob > 0.0 && deviation_prob < 1.0) {
        for (int s = 0; s < horizon; ++s) {
            behavior_rows[static_cast<std::size_t>(s)] = {1.0 - deviation_prob, deviation_prob};
        }
        behavior = Policy::from_probabilities(ContextMode::markov, behavior_rows);
        // Off-path rows match the reference so the deviation lives only on
        // the good path.
        for (int s = horizon; s < num_states; ++s) {
            behavior.mutable_logits()[static_cast<std::size_t>(s)] = {0.0, 0.0};
        }
    } else if (deviation_prob == 0.0) {
        behavior = reference;
    } else { // deviation_prob == 1.0
        std::vector<std::vector<double>> always_deviate = ref_logits;
        for (int s = 0; s < horizon; ++s) {
            always_deviate[static_cast<std::size_t>(s)] = {0.0, kSharp};
        }
        behavior = Policy(ContextMode::markov, always_deviate);
    }

    Scenario scenario;
    scenario.name = "chain";
    scenario.seed = 0;
    scenario.env = std::move(bundle.env);
    scenario.kernel_real = std::move(bundle.kernels[0]);
    scenario.kernel_sim = std::move(bundle.kernels[1]);
    scenario.behavior = std::move(behavior);
    scenario.reference = std::move(reference);
    scenario.params = {{"horizon", static_cast<double>(horizon)},
                       {"deviation_prob", deviation_prob}};
    return scenario;
}

Scenario worst_case_compounding(int horizon, double eps) {
    if (!(eps > 0.0 && eps <= 0.5)) {
        throw std::invalid_argument("worst_case_compounding: eps outside (0, 0.5]");
    }
    Scenario scenario = tutoring_chain(horizon, eps);
    scenario.name = "compounding";
    scenario.params = {{"horizon", static_cast<double>(horizon)}, {"eps", eps}};
    return scenario;
}

Scenario qa_dialogue(int horizon, double solve_prob, double behavior_solve_prob) {
    if (horizon < 2) throw std::invalid_argument("qa_dialogue: horizon must be >= 2");
    if (!(solve_prob > 0.0 && solve_prob < 1.0)) {
        throw std::invalid_argument("qa_dialogue: solve_prob outside (0,1)");
    }
    if (!(behavior_solve_prob > 0.0 && behavior_solve_prob < 1.0)) {
        throw std::invalid_argument("qa_dialogue: behavior_solve_prob outside (0,1)");
    }
    const int kWork = 0;
    const int kAccepted = 1;
    const int kRejected = 2;
    const int kSolve = 0;
    const int kBluff = 1;

    EnvSpec spec;
    spec.num_states = 3;
    spec.num_actions = 2;
    spec.horizon = horizon;
    spec.terminal_scoring = true;
    spec.absorbing_states = {kAccepted};
    Goal goal;
    goal.goal_id = 0;
    goal.initial_state = kWork;
    goal.target_state = kAccepted;
    spec.goals.push_back(goal);

    TransitionKernel::Table table(1);
    table[0].resize(3);
    for (auto& per_state : table[0]) per_state.resize(2);
    // Honest work is accepted with probability solve_prob per turn, from the
    // working state and from the pushback state alike. A bluffed answer is
    // always rejected into the pushback state.
    table[0][kWork][kSolve] = {1.0 - solve_prob, solve_prob, 0.0};
    table[0][kWork][kBluff] = {0.0, 0.0, 1.0};
    table[0][kRejected][kSolve] = {0.0, solve_prob, 1.0 - solve_prob};
    table[0][kRejected][kBluff] = {0.0, 0.0, 1.0};
    table[0][kAccepted][kSolve] = point_mass(3, kAccepted);
    table[0][kAccepted][kBluff] = point_mass(3, kAccepted);
    spec.kernels.emplace_back(KernelLabel::real, table);
    spec.kernels.emplace_back(KernelLabel::simulated, table);
    EnvironmentBundle bundle = make_environment(spec);

    std::vector<std::vector<double>> behavior_rows(
        3, std::vector<double>{behavior_solve_prob, 1.0 - behavior_solve_prob});
    Policy behavior = Policy::from_probabilities(ContextMode::markov, behavior_rows);

    // Reference: (numerically) always solve.
    Policy reference(ContextMode::markov,
                     std::vector<std::vector<double>>(3, std::vector<double>{60.0, 0.0}));

    Scenario scenario;
    scenario.name = "qa";
    scenario.seed = 0;
    scenario.env = std::move(bundle.env);
    scenario.kernel_real = std::move(bundle.kernels[0]);
    scenario.kernel_sim = std::move(bundle.kernels[1]);
    scenario.behavior = std::move(behavior);
    scenario.reference = std::move(reference);
    scenario.answers = AnswerStructure{{kSolve}, {kBluff}, {kRejected}};
    scenario.params = {{"horizon", static_cast<double>(horizon)},
                       {"solve_prob", solve_prob},
                       {"behavior_solve_prob", behavior_solve_prob}};
    return scenario;
}

Scenario sycophantic_sim(const Scenario& base, double kappa) {
    if (!(kappa >= 0.0 && kappa <= 1.0)) {
        throw std::invalid_argument("sycophantic_sim: kappa outside [0,1]");
    }
    if (!base.answers.has_value()) {
        throw MissingAnswerStructure("sycophantic_sim: base scenario lacks answer annotations");
    }
    const AnswerStructure& answers = *base.answers;
    TransitionKernel::Table table = base.kernel_real.table();
    for (int g = 0; g < base.env.num_goals(); ++g) {
        const int incorrect = answers.incorrect_action[static_cast<std::size_t>(g)];
        const int reject = answers.reject_state[static_cast<std::size_t>(g)];
        const int target = base.env.goals()[static_cast<std::size_t>(g)].target_state;
        for (int s = 0; s < base.env.num_states(); ++s) {
            if (base.env.is_absorbing(s)) continue;
            auto& row = table[static_cast<std::size_t>(g)][static_cast<std::size_t>(s)]
                             [static_cast<std::size_t>(incorrect)];
            // A kappa-fraction of the rejection mass is falsely accepted.
            const double moved = kappa * row[static_cast<std::size_t>(reject)];
            row[static_cast<std::size_t>(target)] += moved;
            row[static_cast<std::size_t>(reject)] *= (1.0 - kappa);
        }
    }

    Scenario scenario = base;
    scenario.kernel_sim =
        TransitionKernel::create(base.env, std::move(table), KernelLabel::simulated);
    scenario.name = base.name + "+sycophantic";
    scenario.params["kappa"] = kappa;
    return scenario;
}

Scenario single_turn_bandit() {
    EnvSpec spec;
    spec.num_states = 3;
    spec.num_actions = 2;
    spec.horizon = 1;
    spec.terminal_scoring = true;
    spec.absorbing_states = {1, 2};
    Goal goal;
    goal.goal_id = 0;
    goal.initial_state = 0;
    goal.target_state = 1;
    spec.goals.push_back(goal);

    TransitionKernel::Table table(1);
    table[0].resize(3);
    for (auto& per_state : table[0]) per_state.resize(2);
    table[0][0][0] = point_mass(3, 1);
    table[0][0][1] = point_mass(3, 2);
    table[0][1][0] = point_mass(3, 1);
    table[0][1][1] = point_mass(3, 1);
    table[0][2][0] = point_mass(3, 2);
    table[0][2][1] = point_mass(3, 2);
    spec.kernels.emplace_back(KernelLabel::real, table);
    spec.kernels.emplace_back(KernelLabel::simulated, table);
    EnvironmentBundle bundle = make_environment(spec);

    Scenario scenario;
    scenario.name = "bandit";
    scenario.seed = 0;
    scenario.env = std::move(bundle.env);
    scenario.kernel_real = std::move(bundle.kernels[0]);
    scenario.kernel_sim = std::move(bundle.kernels[1]);
    scenario.behavior = Policy::uniform(ContextMode::markov, 3, 2);
    scenario.reference =
        Policy(ContextMode::markov,
               std::vector<std::vector<double>>(3, std::vector<double>{60.0, 0.0}));
    return scenario;
}

} // namespace cirl
