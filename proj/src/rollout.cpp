#include "cirl/rollout.hpp"

namespace cirl {

std::size_t LogDataset::num_transitions() const {
    std::size_t n = 0;
    for (const auto& traj : trajectories) n += traj.actions.size();
    return n;
}

Trajectory run_episode(const Environment& env, const Policy& policy,
                       const TransitionKernel& kernel, int goal_index, Rng& rng) {
    const Goal& goal = env.goals()[static_cast<std::size_t>(goal_index)];
    Trajectory traj;
    traj.goal_id = goal.goal_id;
    int state = goal.initial_state;
    traj.states.push_back(state);
    for (int t = 0; t < env.horizon(); ++t) {
        if (env.is_absorbing(state)) break;
        const int action = policy.sample_action(state, rng);
        traj.step_return += env.step_reward(state, action);
        const int next = rng.next_categorical(kernel.row(goal_index, state, action));
        traj.actions.push_back(action);
        traj.states.push_back(next);
        state = next;
    }
    traj.terminal_reward = env.terminal_scoring() ? goal.score(state) : 0.0;
    return traj;
}

LogDataset generate_offline_logs(const Environment& env, const Policy& behavior_policy,
                                 const TransitionKernel& kernel_real, int n_episodes,
                                 const Rng& rng) {
    if (n_episodes < 1) {
        throw std::invalid_argument("generate_offline_logs: n_episodes must be >= 1");
    }
    LogDataset logs;
    logs.kernel_label = kernel_real.label();
    logs.seed = rng.state();
    logs.trajectories.reserve(static_cast<std::size_t>(n_episodes));
    for (int i = 0; i < n_episodes; ++i) {
        Rng episode_rng = rng.child(static_cast<std::uint64_t>(i));
        const int goal = static_cast<int>(episode_rng.next_below(
            static_cast<std::uint64_t>(env.num_goals())));
        logs.trajectories.push_back(run_episode(env, behavior_policy, kernel_real, goal,
                                                episode_rng));
    }
    return logs;
}

LogDataset generate_logs_by_transitions(const Environment& env, const Policy& behavior_policy,
                                        const TransitionKernel& kernel_real,
                                        std::size_t min_transitions, const Rng& rng) {
    LogDataset logs;
    logs.kernel_label = kernel_real.label();
    logs.seed = rng.state();
    std::size_t transitions = 0;
    std::uint64_t episode = 0;
    while (transitions < min_transitions) {
        Rng episode_rng = rng.child(episode++);
        const int goal = static_cast<int>(episode_rng.next_below(
            static_cast<std::uint64_t>(env.num_goals())));
        Trajectory traj = run_episode(env, behavior_policy, kernel_real, goal, episode_rng);
        transitions += traj.actions.size();
        logs.trajectories.push_back(std::move(traj));
        if (episode > 100 * min_transitions + 1000) {
            // Degenerate setup (e.g. every goal starts absorbed) would loop forever.
            throw std::invalid_argument(
                "generate_logs_by_transitions: episodes produce no transitions");
        }
    }
    return logs;
}

std::vector<CalibrationSample> extract_calibration_samples(const Environment& env,
                                                           const LogDataset& logs) {
    if (logs.empty()) throw EmptyDataset("extract_calibration_samples: empty log dataset");
    std::vector<CalibrationSample> samples;
    samples.reserve(logs.num_transitions());
    for (const auto& traj : logs.trajectories) {
        const Goal& goal = env.goals()[static_cast<std::size_t>(traj.goal_id)];
        for (std::size_t t = 0; t < traj.actions.size(); ++t) {
            CalibrationSample s;
            s.goal_id = traj.goal_id;
            s.target_state = goal.target_state;
            s.state = traj.states[t];
            s.action = traj.actions[t];
            s.next_state = traj.states[t + 1];
            samples.push_back(s);
        }
    }
    return samples;
}

} // namespace cirl
