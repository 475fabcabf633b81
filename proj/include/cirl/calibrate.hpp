#pragma once

#include <array>
#include <optional>
#include <vector>

#include "cirl/bounds.hpp"
#include "cirl/core.hpp"
#include "cirl/policy.hpp"
#include "cirl/rollout.hpp"

namespace cirl {

/// Softmax parameterization of a simulator kernel: one logit row per
/// (goal, state, action) over next states, for non-absorbing states.
/// Absorbing rows are episode-termination structure, not user behavior, so
/// they are pinned to their exact self-loops rather than fitted.
class KernelParams {
  public:
    KernelParams() = default;
    static KernelParams zeros(const Environment& env);
    static KernelParams random_gaussian(const Environment& env, Rng& rng, double stddev = 1.0);
    /// Logit fit log(max(p, floor)) of an existing kernel's rows.
    static KernelParams from_kernel(const Environment& env, const TransitionKernel& kernel,
                                    double floor = 1e-300);

    int num_goals() const { return num_goals_; }
    int num_states() const { return num_states_; }
    int num_actions() const { return num_actions_; }

    std::size_t row_offset(int goal, int state, int action) const {
        return ((static_cast<std::size_t>(goal) * static_cast<std::size_t>(num_states_) +
                 static_cast<std::size_t>(state)) *
                    static_cast<std::size_t>(num_actions_) +
                static_cast<std::size_t>(action)) *
               static_cast<std::size_t>(num_states_);
    }

    const std::vector<double>& logits() const { return logits_; }
    std::vector<double>& mutable_logits() { return logits_; }

    /// Softmax probabilities of one row.
    std::vector<double> row_probabilities(int goal, int state, int action) const;

    /// Derived kernel: softmax rows plus exact self-loops at absorbing states.
    TransitionKernel to_kernel(const Environment& env) const;

  private:
    int num_goals_ = 0;
    int num_states_ = 0;
    int num_actions_ = 0;
    std::vector<double> logits_;
};

struct RowId {
    int goal = 0;
    int state = 0;
    int action = 0;
    bool operator==(const RowId&) const = default;
};

struct CountMleResult {
    TransitionKernel kernel;
    /// Non-absorbing rows with zero observations that fell back to uniform
    /// (only possible with smoothing 0).
    std::vector<RowId> uncovered_rows;
};

/// Closed-form maximum-likelihood kernel: empirical transition frequencies
/// with optional add-k smoothing. T(s'|g,s,a) = (count + k) / (total + k*S).
CountMleResult count_mle(const Environment& env, const std::vector<CalibrationSample>& samples,
                         double smoothing);

/// Negative log-likelihood of the observed user turns under the
/// parameterized kernel: -sum_i log T_phi(next_i | g_i, s_i, a_i).
double nll(const Environment& env, const KernelParams& params,
           const std::vector<CalibrationSample>& samples);

struct CalibrationReport {
    std::vector<double> nll_curve; // nll_curve[0] is the initial value
    TransitionKernel kernel;
    int steps_taken = 0;
    double final_grad_norm = 0.0;
    /// Max row l1 distance to count_mle(samples, 0) over covered rows.
    double max_row_tv_to_count_mle = 0.0;
    std::vector<RowId> uncovered_rows;
    // Filled by the caller that owns the evaluation context (cmd_calibrate):
    std::vector<double> delta_before;
    std::vector<double> delta_after;
    std::optional<BoundReport> bound_before;
    std::optional<BoundReport> bound_after;
};

/// Full-batch gradient descent on the calibration NLL with step-halving line
/// search (a step is accepted only if it does not increase the NLL, so the
/// curve is non-increasing by construction). Stops at max_steps or when the
/// gradient infinity-norm falls below 1e-8.
CalibrationReport calibrate_sgd(const Environment& env, const KernelParams& init,
                                const std::vector<CalibrationSample>& samples, int max_steps,
                                double init_lr);

struct SimGapReport {
    std::vector<double> delta; // delta_t series under the designated policy
    BoundReport bound;
};

/// delta series plus the sim-gap certificate for one (real, sim, policy) triple.
SimGapReport sim_gap_report(const TransitionKernel& kernel_real, const TransitionKernel& kernel_sim,
                            const Policy& policy, const Environment& env);

/// Synthetic sample set whose per-row next-state counts are round(p * per_row)
/// for every non-absorbing row; with probabilities that are multiples of
/// 1/per_row this makes count_mle recover the generating kernel exactly.
std::vector<CalibrationSample> proportional_samples(const Environment& env,
                                                    const TransitionKernel& kernel,
                                                    int per_row);

} // namespace cirl
