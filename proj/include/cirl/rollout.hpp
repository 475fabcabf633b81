#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cirl/core.hpp"
#include "cirl/policy.hpp"
#include "cirl/rng.hpp"

namespace cirl {

/// Offline episode log: trajectories generated by one behavior policy against
/// one kernel. Fully reproducible from (scenario, seed).
struct LogDataset {
    std::string behavior_policy_id;
    KernelLabel kernel_label = KernelLabel::real;
    std::uint64_t seed = 0;
    std::vector<Trajectory> trajectories;

    bool empty() const { return trajectories.empty(); }
    std::size_t num_transitions() const;
};

/// One observed transition, carrying the simulator's privileged conditioning
/// information (goal id and target state) that the policy never sees.
struct CalibrationSample {
    int goal_id = 0;
    int target_state = 0;
    int state = 0;      // policy-visible context at this turn
    int action = 0;
    int next_state = 0; // the user-turn outcome
};

/// One episode of alternating agent/kernel execution: exactly H agent turns
/// unless an absorbing state is entered earlier. The terminal reward is the
/// goal score of the final state (when the environment uses terminal
/// scoring); per-turn table rewards accumulate into step_return.
Trajectory run_episode(const Environment& env, const Policy& policy,
                       const TransitionKernel& kernel, int goal_index, Rng& rng);

/// n_episodes trajectories; episode i uses the stream rng.child(i) and draws
/// its goal uniformly from that stream. Identical seeds give byte-identical
/// datasets.
LogDataset generate_offline_logs(const Environment& env, const Policy& behavior_policy,
                                 const TransitionKernel& kernel_real, int n_episodes,
                                 const Rng& rng);

/// Keeps appending episodes (in the same per-episode stream order) until the
/// dataset holds at least `min_transitions` transitions.
LogDataset generate_logs_by_transitions(const Environment& env, const Policy& behavior_policy,
                                        const TransitionKernel& kernel_real,
                                        std::size_t min_transitions, const Rng& rng);

/// One sample per (state, action, next-state) transition of every trajectory,
/// goal fields attached. Throws EmptyDataset on an empty log.
std::vector<CalibrationSample> extract_calibration_samples(const Environment& env,
                                                           const LogDataset& logs);

} // namespace cirl
