#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cirl/bounds.hpp"
#include "cirl/core.hpp"
#include "cirl/policy.hpp"

namespace cirl {

/// Per-goal annotation of which actions count as correct/incorrect answers
/// and which state represents the user rejecting an answer. Required by the
/// sycophantic kernel transform.
struct AnswerStructure {
    std::vector<int> correct_action;
    std::vector<int> incorrect_action;
    std::vector<int> reject_state;
};

/// Bundle of everything one experiment runs on: the environment, the real
/// and simulated user kernels, the behavior policy that generated any
/// offline logs, and an optional reference policy for bound checks.
struct Scenario {
    std::string name;
    std::uint64_t seed = 0;
    Environment env;
    TransitionKernel kernel_real;
    TransitionKernel kernel_sim;
    Policy behavior;
    std::optional<Policy> reference;
    std::optional<AnswerStructure> answers;
    std::map<std::string, double> params;

    BoundInstance bound_instance() const;
    BoundInstance bound_instance_swapped() const;
};

/// Random sparse-reward instance: strictly positive kernel rows, random
/// softmax behavior and reference policies, and an independently redrawn
/// simulated kernel.
Scenario random_mdp(std::uint64_t seed, int num_states, int num_actions, int horizon,
                    int num_goals);

/// Error-recovery chain: a good path paying 1 per on-path turn, a zero-reward
/// absorbing bad region, a reference policy that stays on the path, and a
/// behavior policy that deviates with probability deviation_prob (so its
/// per-step deviation from the reference is 2 * deviation_prob).
Scenario tutoring_chain(int horizon, double deviation_prob);

/// The chain family used for the growth-order sweep; per-step deviation is
/// the constant 2 * eps.
Scenario worst_case_compounding(int horizon, double eps);

/// Question-answering dialogue with sparse terminal reward. The agent either
/// solves (slow, genuinely accepted with probability solve_prob per turn) or
/// bluffs (an incorrect answer the real user always rejects into a pushback
/// state, from which solving still recovers). Carries the answer annotations
/// the sycophantic transform needs.
Scenario qa_dialogue(int horizon, double solve_prob = 0.3, double behavior_solve_prob = 0.55);

/// Sycophantic simulator: identical to the real kernel except that on
/// incorrect answer actions a kappa-fraction of the reject-state mass is
/// accepted (moved to the goal's target state) instead. kappa = 0 reproduces
/// the real kernel row-for-row.
Scenario sycophantic_sim(const Scenario& base, double kappa);

/// Single-turn two-action instance with a known optimum; the smallest
/// optimizer sanity check.
Scenario single_turn_bandit();

} // namespace cirl
