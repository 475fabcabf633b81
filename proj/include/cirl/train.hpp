#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cirl/core.hpp"
#include "cirl/policy.hpp"
#include "cirl/rng.hpp"
#include "cirl/rollout.hpp"

namespace cirl {

enum class Paradigm { static_context, interactive_naive, interactive_calibrated };

std::string to_string(Paradigm paradigm);
Paradigm paradigm_from_string(const std::string& name);

struct TrainConfig {
    int group_size = 32;
    double learning_rate = 0.1;
    double clip_low = 0.2;   // ratio clipped below at 1 - clip_low
    double clip_high = 0.28; // ratio clipped above at 1 + clip_high
    int iterations = 1;
    double kl_coefficient = 0.0; // structurally disabled; clipping provides stability
    double advantage_tol = 1e-8;
    Paradigm paradigm = Paradigm::interactive_calibrated;

    void validate() const;
};

/// (r - mean) / population-std per group; all zeros when the rewards are
/// degenerate (std below tol). Throws GroupTooSmall for fewer than 2 rewards.
std::vector<double> compute_group_advantages(const std::vector<double>& rewards,
                                             double tol = 1e-8);

/// G trajectories sharing one initial context, their rewards, normalized
/// advantages, and a snapshot of the policy that sampled them. The advantage
/// invariant (mean 0, population std 1, unless degenerate) is asserted at
/// construction.
struct GroupBatch {
    int goal_index = 0;
    int initial_state = 0;
    std::vector<Trajectory> trajectories;
    std::vector<double> rewards;
    std::vector<double> advantages;
    std::vector<std::vector<double>> snapshot_logits; // pi_old

    static GroupBatch create(int goal_index, int initial_state,
                             std::vector<Trajectory> trajectories, std::vector<double> rewards,
                             const Policy& sampling_policy, double tol = 1e-8);
};

struct GrpoStats {
    double surrogate = 0.0;     // objective value at the pre-update policy
    double clip_fraction = 0.0; // fraction of decision steps on the clipped branch
    double grad_inf_norm = 0.0;
    int decision_steps = 0;
};

/// Clipped-surrogate objective mean over every decision step of every
/// trajectory: min(rho * A, clip(rho, 1-clip_low, 1+clip_high) * A) with
/// rho = pi_theta(a|c) / pi_old(a|c). Evaluable at any theta.
double grpo_surrogate(const Policy& policy, const std::vector<GroupBatch>& groups,
                      const TrainConfig& config);

/// Analytic gradient of grpo_surrogate w.r.t. the policy's logits.
std::vector<std::vector<double>> grpo_gradient(const Policy& policy,
                                               const std::vector<GroupBatch>& groups,
                                               const TrainConfig& config,
                                               GrpoStats* stats = nullptr);

/// One gradient-ascent step on the surrogate. The groups must have been
/// sampled by `policy` (bitwise snapshot check; SnapshotMismatch otherwise),
/// so the step is taken at rho = 1.
std::pair<Policy, GrpoStats> grpo_update(const Policy& policy,
                                         const std::vector<GroupBatch>& groups,
                                         const TrainConfig& config);

struct CurvePoint {
    int iteration = 0;
    double mean_reward = 0.0;
    double j_train = 0.0; // exact return under the training kernel
    double j_real = 0.0;  // exact return under the real kernel (NaN if none given)
    double surrogate = 0.0;
    double clip_fraction = 0.0;
};

using LearningCurve = std::vector<CurvePoint>;

/// Closed-loop training: per iteration, sample a goal, roll out G on-policy
/// episodes against `kernel_train`, and take one GRPO step on the group.
std::pair<Policy, LearningCurve> train_interactive(const Environment& env,
                                                   const TransitionKernel& kernel_train,
                                                   const TransitionKernel* kernel_real,
                                                   const Policy& init_policy,
                                                   const TrainConfig& config, const Rng& rng);

/// Open-loop training: per iteration, draw one context from the offline logs,
/// sample G candidate actions at that fixed context, score each by completing
/// the episode with the behavior policy under the real kernel, and take one
/// GRPO step at that single decision step.
std::pair<Policy, LearningCurve> train_static_context(const LogDataset& logs,
                                                      const Environment& env,
                                                      const TransitionKernel& kernel_real,
                                                      const Policy& behavior_policy,
                                                      const Policy& init_policy,
                                                      const TrainConfig& config, const Rng& rng);

/// Exact return of the policy under the designated kernel (no sampling).
double evaluate(const Policy& policy, const Environment& env, const TransitionKernel& kernel);

} // namespace cirl
