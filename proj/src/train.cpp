#include "cirl/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cirl/oracle.hpp"

namespace cirl {

std::string to_string(Paradigm paradigm) {
    switch (paradigm) {
        case Paradigm::static_context: return "static_context";
        case Paradigm::interactive_naive: return "interactive_naive";
        case Paradigm::interactive_calibrated: return "interactive_calibrated";
    }
    return "static_context";
}

Paradigm paradigm_from_string(const std::string& name) {
    if (name == "static_context") return Paradigm::static_context;
    if (name == "interactive_naive") return Paradigm::interactive_naive;
    if (name == "interactive_calibrated") return Paradigm::interactive_calibrated;
    throw std::invalid_argument("unknown paradigm: " + name);
}

void TrainConfig::validate() const {
    if (group_size < 2) throw GroupTooSmall("TrainConfig: group_size must be >= 2");
    if (!(clip_low > 0.0 && clip_low < 1.0)) {
        throw std::invalid_argument("TrainConfig: clip_low must be in (0,1)");
    }
    if (!(clip_high > 0.0)) throw std::invalid_argument("TrainConfig: clip_high must be > 0");
    if (iterations < 1) throw std::invalid_argument("TrainConfig: iterations must be >= 1");
    if (kl_coefficient != 0.0) {
        throw std::invalid_argument("TrainConfig: KL regularization is structurally disabled");
    }
    if (!(learning_rate >= 0.0)) {
        throw std::invalid_argument("TrainConfig: learning_rate must be >= 0");
    }
}

std::vector<double> compute_group_advantages(const std::vector<double>& rewards, double tol) {
    if (rewards.size() < 2) throw GroupTooSmall("compute_group_advantages: need >= 2 rewards");
    const double n = static_cast<double>(rewards.size());
    double mean = 0.0;
    for (double r : rewards) mean += r;
    mean /= n;
    double var = 0.0;
    for (double r : rewards) var += (r - mean) * (r - mean);
    var /= n; // population variance
    const double sd = std::sqrt(var);
    std::vector<double> adv(rewards.size(), 0.0);
    if (sd < tol) return adv; // degenerate group carries no ranking signal
    for (std::size_t i = 0; i < rewards.size(); ++i) adv[i] = (rewards[i] - mean) / sd;
    return adv;
}

GroupBatch GroupBatch::create(int goal_index, int initial_state,
                              std::vector<Trajectory> trajectories, std::vector<double> rewards,
                              const Policy& sampling_policy, double tol) {
    if (trajectories.size() != rewards.size()) {
        throw std::invalid_argument("GroupBatch: trajectory/reward count mismatch");
    }
    GroupBatch batch;
    batch.goal_index = goal_index;
    batch.initial_state = initial_state;
    batch.trajectories = std::move(trajectories);
    batch.rewards = std::move(rewards);
    batch.advantages = compute_group_advantages(batch.rewards, tol);
    batch.snapshot_logits = sampling_policy.logits();

    double mean = 0.0;
    double var = 0.0;
    for (double a : batch.advantages) mean += a;
    mean /= static_cast<double>(batch.advantages.size());
    for (double a : batch.advantages) var += (a - mean) * (a - mean);
    var /= static_cast<double>(batch.advantages.size());
    const bool degenerate =
        std::all_of(batch.advantages.begin(), batch.advantages.end(),
                    [](double a) { return a == 0.0; });
    if (!degenerate &&
        (std::abs(mean) > 1e-9 || std::abs(std::sqrt(var) - 1.0) > 1e-9)) {
        throw std::logic_error("GroupBatch: advantage normalization invariant violated");
    }
    return batch;
}

namespace {

struct SnapshotView {
    const std::vector<std::vector<double>>* logits;

    double log_prob(int state, int action) const {
        const auto& row = (*logits)[static_cast<std::size_t>(state)];
        const double m = *std::max_element(row.begin(), row.end());
        double sum = 0.0;
        for (double v : row) sum += std::exp(v - m);
        return row[static_cast<std::size_t>(action)] - m - std::log(sum);
    }
};

template <typename StepFn>
void for_each_decision_step(const std::vector<GroupBatch>& groups, StepFn&& fn) {
    for (const GroupBatch& group : groups) {
        SnapshotView snapshot{&group.snapshot_logits};
        for (std::size_t k = 0; k < group.trajectories.size(); ++k) {
            const Trajectory& traj = group.trajectories[k];
            const double advantage = group.advantages[k];
            for (std::size_t i = 0; i < traj.actions.size(); ++i) {
                fn(traj.states[i], traj.actions[i], advantage, snapshot);
            }
        }
    }
}

} // namespace

double grpo_surrogate(const Policy& policy, const std::vector<GroupBatch>& groups,
                      const TrainConfig& config) {
    double total = 0.0;
    long steps = 0;
    for_each_decision_step(groups, [&](int state, int action, double advantage,
                                       const SnapshotView& snapshot) {
        const double rho = std::exp(policy.log_prob(state, action) -
                                    snapshot.log_prob(state, action));
        const double clipped = std::clamp(rho, 1.0 - config.clip_low, 1.0 + config.clip_high);
        total += std::min(rho * advantage, clipped * advantage);
        ++steps;
    });
    return steps == 0 ? 0.0 : total / static_cast<double>(steps);
}

std::vector<std::vector<double>> grpo_gradient(const Policy& policy,
                                               const std::vector<GroupBatch>& groups,
                                               const TrainConfig& config, GrpoStats* stats) {
    std::vector<std::vector<double>> grad(
        static_cast<std::size_t>(policy.num_states()),
        std::vector<double>(static_cast<std::size_t>(policy.num_actions()), 0.0));
    long steps = 0;
    long clipped_steps = 0;
    double surrogate = 0.0;

    for_each_decision_step(groups, [&](int state, int action, double advantage,
                                       const SnapshotView& snapshot) {
        ++steps;
        if (advantage == 0.0) return;
        const double rho = std::exp(policy.log_prob(state, action) -
                                    snapshot.log_prob(state, action));
        const double lo = 1.0 - config.clip_low;
        const double hi = 1.0 + config.clip_high;
        const double clipped = std::clamp(rho, lo, hi);
        surrogate += std::min(rho * advantage, clipped * advantage);

        // The clipped branch is active (and the step contributes zero
        // gradient) when the ratio moved past its trust bound in the
        // direction the advantage is pushing.
        const bool clip_active = (advantage > 0.0 && rho > hi) || (advantage < 0.0 && rho < lo);
        if (clip_active) {
            ++clipped_steps;
            return;
        }
        const std::vector<double> probs = policy.action_probabilities(state);
        auto& row = grad[static_cast<std::size_t>(state)];
        const double scale = advantage * rho;
        for (int a = 0; a < policy.num_actions(); ++a) {
            row[static_cast<std::size_t>(a)] -= scale * probs[static_cast<std::size_t>(a)];
        }
        row[static_cast<std::size_t>(action)] += scale;
    });

    if (steps > 0) {
        const double inv = 1.0 / static_cast<double>(steps);
        for (auto& row : grad) {
            for (double& v : row) v *= inv;
        }
    }
    if (stats != nullptr) {
        stats->surrogate = steps == 0 ? 0.0 : surrogate / static_cast<double>(steps);
        stats->clip_fraction =
            steps == 0 ? 0.0 : static_cast<double>(clipped_steps) / static_cast<double>(steps);
        stats->decision_steps = static_cast<int>(steps);
        double inf_norm = 0.0;
        for (const auto& row : grad) {
            for (double v : row) inf_norm = std::max(inf_norm, std::abs(v));
        }
        stats->grad_inf_norm = inf_norm;
    }
    return grad;
}

std::pair<Policy, GrpoStats> grpo_update(const Policy& policy,
                                         const std::vector<GroupBatch>& groups,
                                         const TrainConfig& config) {
    config.validate();
    for (const GroupBatch& group : groups) {
        if (group.snapshot_logits != policy.logits()) {
            throw SnapshotMismatch("grpo_update: group was not sampled by this policy");
        }
    }
    GrpoStats stats;
    const std::vector<std::vector<double>> grad = grpo_gradient(policy, groups, config, &stats);
    std::vector<std::vector<double>> logits = policy.logits();
    for (std::size_t s = 0; s < logits.size(); ++s) {
        for (std::size_t a = 0; a < logits[s].size(); ++a) {
            logits[s][a] += config.learning_rate * grad[s][a];
        }
    }
    return {Policy(policy.context_mode(), std::move(logits)), stats};
}

double evaluate(const Policy& policy, const Environment& env, const TransitionKernel& kernel) {
    return expected_return_exact(env, policy, kernel);
}

std::pair<Policy, LearningCurve> train_interactive(const Environment& env,
                                                   const TransitionKernel& kernel_train,
                                                   const TransitionKernel* kernel_real,
                                                   const Policy& init_policy,
                                                   const TrainConfig& config, const Rng& rng) {
    config.validate();
    Policy policy = init_policy;
    LearningCurve curve;
    curve.reserve(static_cast<std::size_t>(config.iterations));

    for (int iter = 0; iter < config.iterations; ++iter) {
        Rng iter_rng = rng.child(static_cast<std::uint64_t>(iter));
        const int goal = static_cast<int>(
            iter_rng.next_below(static_cast<std::uint64_t>(env.num_goals())));

        std::vector<Trajectory> trajectories;
        std::vector<double> rewards;
        trajectories.reserve(static_cast<std::size_t>(config.group_size));
        rewards.reserve(static_cast<std::size_t>(config.group_size));
        for (int g = 0; g < config.group_size; ++g) {
            Rng episode_rng = iter_rng.child(static_cast<std::uint64_t>(g));
            Trajectory traj = run_episode(env, policy, kernel_train, goal, episode_rng);
            rewards.push_back(traj.total_return());
            trajectories.push_back(std::move(traj));
        }

        GroupBatch batch = GroupBatch::create(
            goal, env.goals()[static_cast<std::size_t>(goal)].initial_state,
            std::move(trajectories), std::move(rewards), policy, config.advantage_tol);
        double mean_reward = 0.0;
        for (double r : batch.rewards) mean_reward += r;
        mean_reward /= static_cast<double>(batch.rewards.size());

        auto [next_policy, stats] = grpo_update(policy, {batch}, config);
        policy = std::move(next_policy);

        CurvePoint point;
        point.iteration = iter;
        point.mean_reward = mean_reward;
        point.j_train = evaluate(policy, env, kernel_train);
        point.j_real = kernel_real != nullptr ? evaluate(policy, env, *kernel_real)
                                              : std::numeric_limits<double>::quiet_NaN();
        point.surrogate = stats.surrogate;
        point.clip_fraction = stats.clip_fraction;
        curve.push_back(point);
    }
    return {policy, curve};
}

namespace {

/// Return collected from (state, action) at turn `t`: the immediate table
/// reward, then a behavior-policy completion under the real kernel through
/// the remaining turns, plus the terminal score.
double completion_return(const Environment& env, const TransitionKernel& kernel_real,
                         const Policy& behavior, int goal, int state, int action, int t,
                         Rng& rng) {
    double value = env.step_reward(state, action);
    int current = rng.next_categorical(kernel_real.row(goal, state, action));
    for (int turn = t + 1; turn < env.horizon(); ++turn) {
        if (env.is_absorbing(current)) break;
        const int a = behavior.sample_action(current, rng);
        value += env.step_reward(current, a);
        current = rng.next_categorical(kernel_real.row(goal, current, a));
    }
    if (env.terminal_scoring()) value += env.score(current, goal);
    return value;
}

} // namespace

std::pair<Policy, LearningCurve> train_static_context(const LogDataset& logs,
                                                      const Environment& env,
                                                      const TransitionKernel& kernel_real,
                                                      const Policy& behavior_policy,
                                                      const Policy& init_policy,
                                                      const TrainConfig& config, const Rng& rng) {
    config.validate();
    if (logs.empty()) throw EmptyDataset("train_static_context: empty log dataset");

    // Flattened (goal, state, turn) index of every logged transition.
    struct LoggedContext {
        int goal;
        int state;
        int turn;
    };
    std::vector<LoggedContext> contexts;
    contexts.reserve(logs.num_transitions());
    for (const Trajectory& traj : logs.trajectories) {
        for (std::size_t i = 0; i < traj.actions.size(); ++i) {
            contexts.push_back(LoggedContext{traj.goal_id, traj.states[i], static_cast<int>(i)});
        }
    }
    if (contexts.empty()) throw EmptyDataset("train_static_context: logs hold no transitions");

    Policy policy = init_policy;
    LearningCurve curve;
    curve.reserve(static_cast<std::size_t>(config.iterations));

    for (int iter = 0; iter < config.iterations; ++iter) {
        Rng iter_rng = rng.child(static_cast<std::uint64_t>(iter));
        const LoggedContext ctx = contexts[iter_rng.next_below(contexts.size())];

        std::vector<Trajectory> steps;
        std::vector<double> rewards;
        steps.reserve(static_cast<std::size_t>(config.group_size));
        rewards.reserve(static_cast<std::size_t>(config.group_size));
        for (int g = 0; g < config.group_size; ++g) {
            Rng candidate_rng = iter_rng.child(static_cast<std::uint64_t>(g));
            const int action = policy.sample_action(ctx.state, candidate_rng);
            const double reward = completion_return(env, kernel_real, behavior_policy, ctx.goal,
                                                    ctx.state, action, ctx.turn, candidate_rng);
            Trajectory step;
            step.goal_id = ctx.goal;
            step.states = {ctx.state};
            step.actions = {action};
            step.states.push_back(ctx.state); // single decision step; successor unused
            rewards.push_back(reward);
            steps.push_back(std::move(step));
        }

        GroupBatch batch = GroupBatch::create(ctx.goal, ctx.state, std::move(steps),
                                              std::move(rewards), policy, config.advantage_tol);
        double mean_reward = 0.0;
        for (double r : batch.rewards) mean_reward += r;
        mean_reward /= static_cast<double>(batch.rewards.size());

        auto [next_policy, stats] = grpo_update(policy, {batch}, config);
        policy = std::move(next_policy);

        CurvePoint point;
        point.iteration = iter;
        point.mean_reward = mean_reward;
        point.j_train = evaluate(policy, env, kernel_real);
        point.j_real = point.j_train;
        point.surrogate = stats.surrogate;
        point.clip_fraction = stats.clip_fraction;
        curve.push_back(point);
    }
    return {policy, curve};
}

} // namespace cirl
