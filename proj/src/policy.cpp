#include "cirl/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cirl {

Policy::Policy(ContextMode mode, std::vector<std::vector<double>> logits)
    : mode_(mode), logits_(std::move(logits)) {
    if (logits_.empty() || logits_[0].empty()) {
        throw std::invalid_argument("Policy: empty logit table");
    }
    const std::size_t actions = logits_[0].size();
    for (const auto& row : logits_) {
        if (row.size() != actions) throw std::invalid_argument("Policy: ragged logit table");
        for (double v : row) {
            if (!std::isfinite(v)) throw std::invalid_argument("Policy: non-finite logit");
        }
    }
}

Policy Policy::uniform(ContextMode mode, int num_states, int num_actions) {
    return Policy(mode, std::vector<std::vector<double>>(
                            static_cast<std::size_t>(num_states),
                            std::vector<double>(static_cast<std::size_t>(num_actions), 0.0)));
}

Policy Policy::random_gaussian(ContextMode mode, int num_states, int num_actions, Rng& rng,
                               double stddev) {
    std::vector<std::vector<double>> logits(static_cast<std::size_t>(num_states),
                                            std::vector<double>(static_cast<std::size_t>(num_actions)));
    for (auto& row : logits) {
        for (double& v : row) v = stddev * rng.next_gaussian();
    }
    return Policy(mode, std::move(logits));
}

Policy Policy::from_probabilities(ContextMode mode,
                                  const std::vector<std::vector<double>>& rows) {
    std::vector<std::vector<double>> logits(rows.size());
    for (std::size_t s = 0; s < rows.size(); ++s) {
        logits[s].resize(rows[s].size());
        for (std::size_t a = 0; a < rows[s].size(); ++a) {
            const double p = rows[s][a];
            if (!(p > 0.0)) {
                throw std::invalid_argument("Policy::from_probabilities: rows must be strictly positive");
            }
            logits[s][a] = std::log(p);
        }
    }
    return Policy(mode, std::move(logits));
}

std::vector<double> Policy::action_probabilities(int state) const {
    const auto& row = logits_[static_cast<std::size_t>(state)];
    const double m = *std::max_element(row.begin(), row.end());
    std::vector<double> p(row.size());
    double sum = 0.0;
    for (std::size_t a = 0; a < row.size(); ++a) {
        p[a] = std::exp(row[a] - m);
        sum += p[a];
    }
    for (double& v : p) v /= sum;
    return p;
}

double Policy::log_prob(int state, int action) const {
    const auto& row = logits_[static_cast<std::size_t>(state)];
    const double m = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (double v : row) sum += std::exp(v - m);
    return row[static_cast<std::size_t>(action)] - m - std::log(sum);
}

int Policy::sample_action(int state, Rng& rng) const {
    const std::vector<double> p = action_probabilities(state);
    return rng.next_categorical(p);
}

std::vector<double> log_prob_gradient(const Policy& policy, int state, int action) {
    std::vector<double> grad = policy.action_probabilities(state);
    for (double& v : grad) v = -v;
    grad[static_cast<std::size_t>(action)] += 1.0;
    return grad;
}

Policy mixture_perturb(const Policy& policy, double lambda, const Environment& env) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
        throw std::invalid_argument("mixture_perturb: lambda outside [0,1]");
    }
    (void)env;
    if (lambda == 0.0) return policy;
    const int num_actions = policy.num_actions();
    const double u = 1.0 / static_cast<double>(num_actions);
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(policy.num_states()));
    for (int s = 0; s < policy.num_states(); ++s) {
        std::vector<double> p = policy.action_probabilities(s);
        for (double& v : p) v = (1.0 - lambda) * v + lambda * u;
        rows[static_cast<std::size_t>(s)] = std::move(p);
    }
    return Policy::from_probabilities(policy.context_mode(), rows);
}

double total_variation_to(const Policy& policy, const Policy& other, int state) {
    const std::vector<double> p = policy.action_probabilities(state);
    const std::vector<double> q = other.action_probabilities(state);
    if (p.size() != q.size()) {
        throw EnumerationMismatch("total_variation_to: action count mismatch");
    }
    double d = 0.0;
    for (std::size_t a = 0; a < p.size(); ++a) d += std::abs(p[a] - q[a]);
    return d;
}

} // namespace cirl
