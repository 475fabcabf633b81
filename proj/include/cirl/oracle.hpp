#pragma once

#include <cstdint>
#include <vector>

#include "cirl/core.hpp"
#include "cirl/policy.hpp"
#include "cirl/rng.hpp"

namespace cirl {

/// Context enumeration shared by every exact computation. In markov mode a
/// context is the current state; in history mode it is the full alternating
/// prefix, encoded positionally so the enumeration depends only on the
/// environment's shape (never on kernels or policies).
namespace contexts {

/// Number of enumerated contexts per goal at timestep t.
std::uint64_t per_goal(const Environment& env, int t);

/// The context's current state (decoding the positional history encoding).
int last_state(const Environment& env, int goal_index, int t, std::uint64_t ctx);

/// Index of the context reached from `ctx` by playing `action` and observing
/// `next_state`.
std::uint64_t child(const Environment& env, std::uint64_t ctx, int action, int next_state);

/// Positional index of a full history (history mode) and its inverse. The
/// encoding is the fold of child() over the history's transitions.
std::uint64_t encode_history(const Environment& env, const History& history);
History decode_history(const Environment& env, int goal_index, int t, std::uint64_t ctx);

} // namespace contexts

enum class TableKind { marginal, joint };

/// Dense probability table over (goal, context) pairs at one timestep, or
/// over (goal, context, action) triples for the joint kind. Mass is validated
/// to be 1 within 1e-9 at construction.
struct DistributionTable {
    ContextMode mode = ContextMode::markov;
    TableKind kind = TableKind::marginal;
    int t = 0;
    int num_goals = 0;
    std::uint64_t contexts_per_goal = 0;
    int num_actions = 0; // 0 for marginals
    std::vector<double> p;

    static DistributionTable validated(ContextMode mode, TableKind kind, int t, int num_goals,
                                       std::uint64_t contexts_per_goal, int num_actions,
                                       std::vector<double> p);

    double mass() const;
    bool same_enumeration(const DistributionTable& other) const;

    std::size_t marginal_index(int goal, std::uint64_t ctx) const {
        return static_cast<std::size_t>(goal) * contexts_per_goal + ctx;
    }
    std::size_t joint_index(int goal, std::uint64_t ctx, int action) const {
        return (static_cast<std::size_t>(goal) * contexts_per_goal + ctx) *
                   static_cast<std::size_t>(num_actions) +
               static_cast<std::size_t>(action);
    }
};

/// Sum of |p - q| over the shared enumeration; symmetric, in [0, 2].
/// Throws EnumerationMismatch when the tables do not share kind/shape/t.
double l1_distance(const DistributionTable& p, const DistributionTable& q);

/// Point mass on each goal's initial context, goals weighted uniformly.
DistributionTable initial_distribution(const Environment& env);

/// Joint q(g, c, a) = d(g, c) * pi(a | c).
DistributionTable to_joint(const DistributionTable& marginal, const Policy& policy,
                           const Environment& env);

/// One application of the transition operator: maps the joint at t to the
/// marginal at t+1. Mass is preserved within 1e-9.
DistributionTable propagate_joint(const DistributionTable& joint, const TransitionKernel& kernel,
                                  const Environment& env);

/// Convenience composition of to_joint and propagate_joint.
DistributionTable propagate(const DistributionTable& marginal, const Policy& policy,
                            const TransitionKernel& kernel, const Environment& env);

/// Marginals d_0..d_H (H+1 tables). Throws SizeGuard when the history-mode
/// enumeration would exceed the guard.
std::vector<DistributionTable> exact_distributions(const Environment& env, const Policy& policy,
                                                   const TransitionKernel& kernel);

/// Exact finite-horizon return: per-turn table rewards summed over the joint
/// distributions, plus the expected terminal score when the environment uses
/// terminal scoring.
double expected_return_exact(const Environment& env, const Policy& policy,
                             const TransitionKernel& kernel);

/// eps_t = E_{c ~ d^{pi_ref}_t} || pi(.|c) - pi_ref(.|c) ||_1 for t = 0..H-1.
/// The expectation is taken under the *reference* policy's marginals.
std::vector<double> policy_deviation_series(const Policy& pi, const Policy& pi_ref,
                                            const Environment& env,
                                            const TransitionKernel& kernel);

/// Delta_t = || d^pi_t - d^{pi_ref}_t ||_1 for t = 0..H-1 (Delta_0 = 0).
std::vector<double> history_mismatch_series(const Policy& pi, const Policy& pi_ref,
                                            const Environment& env,
                                            const TransitionKernel& kernel);

/// delta_t = E_{(c,a) ~ q^{real}_t} || T_real(.|c,a) - T_sim(.|c,a) ||_1,
/// t = 0..H-1, expectation under the real on-policy joint distribution.
std::vector<double> simulator_error_series(const Policy& pi, const TransitionKernel& kernel_real,
                                           const TransitionKernel& kernel_sim,
                                           const Environment& env);

/// All four divergence series of one (pi, pi_ref, real, sim) configuration.
struct DivergenceSeries {
    std::vector<double> delta;     // policy-induced marginal mismatch
    std::vector<double> epsilon;   // per-step policy deviation
    std::vector<double> sim_delta; // local simulator error
    std::vector<double> env_delta; // real-vs-sim marginal mismatch under pi
};

DivergenceSeries divergence_series(const Environment& env, const Policy& pi, const Policy& pi_ref,
                                   const TransitionKernel& kernel_real,
                                   const TransitionKernel& kernel_sim);

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    int episodes = 0;
};

/// Monte-Carlo cross-check of expected_return_exact. Episode i draws its own
/// child stream rng.child(i), so the estimate is a pure function of the rng
/// seed and the episode count.
McEstimate expected_return_mc(const Environment& env, const Policy& policy,
                              const TransitionKernel& kernel, int episodes, const Rng& rng);

} // namespace cirl
