#pragma once

#include <vector>

#include "cirl/core.hpp"
#include "cirl/rng.hpp"

namespace cirl {

/// Tabular softmax policy: one logit row per state, temperature fixed at 1.
/// In history mode the policy conditions on the truncated history (its last
/// state), which keeps one parameterization for both context modes; kernels
/// condition the same way.
class Policy {
  public:
    Policy() = default;
    Policy(ContextMode mode, std::vector<std::vector<double>> logits);

    static Policy uniform(ContextMode mode, int num_states, int num_actions);
    static Policy random_gaussian(ContextMode mode, int num_states, int num_actions, Rng& rng,
                                  double stddev = 1.0);
    /// Exact logit fit of explicit action rows (rows must be strictly positive
    /// probability vectors).
    static Policy from_probabilities(ContextMode mode,
                                     const std::vector<std::vector<double>>& rows);

    ContextMode context_mode() const { return mode_; }
    int num_states() const { return static_cast<int>(logits_.size()); }
    int num_actions() const {
        return logits_.empty() ? 0 : static_cast<int>(logits_[0].size());
    }

    const std::vector<std::vector<double>>& logits() const { return logits_; }
    std::vector<std::vector<double>>& mutable_logits() { return logits_; }

    /// Softmax of the state's logit row; sums to 1 within 1e-12, strictly
    /// positive for finite logits.
    std::vector<double> action_probabilities(int state) const;

    double log_prob(int state, int action) const;

    int sample_action(int state, Rng& rng) const;

  private:
    ContextMode mode_ = ContextMode::markov;
    std::vector<std::vector<double>> logits_; // [state][action]
};

/// d/dlogits_j log pi(action | state) = 1{j == action} - pi(j | state).
std::vector<double> log_prob_gradient(const Policy& policy, int state, int action);

/// Policy whose action row at every state is (1-lambda) * pi + lambda * uniform,
/// realized by exact logit fitting. lambda = 0 returns the input unchanged.
Policy mixture_perturb(const Policy& policy, double lambda, const Environment& env);

/// l1 distance of the two action rows at `state`; in [0, 2].
double total_variation_to(const Policy& policy, const Policy& other, int state);

} // namespace cirl
