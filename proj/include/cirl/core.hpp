#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cirl/errors.hpp"

namespace cirl {

enum class ContextMode { markov, history };

enum class KernelLabel { real, simulated, calibrated };

struct EnvSpec;
struct EnvironmentBundle;
EnvironmentBundle make_environment(const EnvSpec& spec);

std::string to_string(ContextMode mode);
std::string to_string(KernelLabel label);

/// Task instance: the fixed initial instruction and its ground-truth target,
/// plus an optional graded score over terminal states. Without a score table
/// the score is the 0/1 indicator of hitting the target.
struct Goal {
    int goal_id = 0;
    int target_state = 0;
    int initial_state = 0;
    /// terminal_state -> score in [0,1]; absent keys score 0.
    std::optional<std::map<int, double>> score_table;

    double score(int terminal_state) const;
};

/// Validated, immutable description of a finite dialogue MDP: sizes, horizon,
/// per-turn reward table, goals, absorbing states and the context mode used
/// for exact enumeration. Kernels live outside (see TransitionKernel); an
/// Environment only fixes their required shape and the absorbing set.
class Environment {
  public:
    Environment() = default;

    int num_states() const { return num_states_; }
    int num_actions() const { return num_actions_; }
    int horizon() const { return horizon_; }
    ContextMode context_mode() const { return mode_; }
    bool terminal_scoring() const { return terminal_scoring_; }
    const std::vector<Goal>& goals() const { return goals_; }
    int num_goals() const { return static_cast<int>(goals_.size()); }

    bool is_absorbing(int state) const { return absorbing_[static_cast<std::size_t>(state)]; }
    const std::vector<int>& absorbing_states() const { return absorbing_list_; }

    /// Per-turn reward of playing `action` in `state`. Absorbing states accrue
    /// nothing: the episode has effectively terminated there.
    double step_reward(int state, int action) const {
        if (absorbing_[static_cast<std::size_t>(state)]) return 0.0;
        return step_reward_[static_cast<std::size_t>(state)][static_cast<std::size_t>(action)];
    }

    double raw_step_reward(int state, int action) const {
        return step_reward_[static_cast<std::size_t>(state)][static_cast<std::size_t>(action)];
    }

    /// Reward scale used by every bound: the largest per-turn reward magnitude
    /// the environment can emit (step table on non-absorbing states, and the
    /// terminal score scale when terminal scoring is enabled).
    double r_max() const { return r_max_; }

    double score(int terminal_state, int goal_index) const {
        return goals_[static_cast<std::size_t>(goal_index)].score(terminal_state);
    }

    friend EnvironmentBundle make_environment(const EnvSpec& spec);

  private:
    int num_states_ = 0;
    int num_actions_ = 0;
    int horizon_ = 0;
    ContextMode mode_ = ContextMode::markov;
    bool terminal_scoring_ = true;
    std::vector<std::vector<double>> step_reward_; // [state][action]
    std::vector<Goal> goals_;
    std::vector<bool> absorbing_;
    std::vector<int> absorbing_list_;
    double r_max_ = 0.0;
};

/// Stochastic next-state table T(s' | goal, state, action). Rows are
/// validated at construction: nonnegative and summing to 1 within 1e-12.
/// Invalid rows are rejected, never renormalized.
class TransitionKernel {
  public:
    using Table = std::vector<std::vector<std::vector<std::vector<double>>>>; // [g][s][a][s']

    TransitionKernel() = default;

    /// Validates row structure against `env` (shape, row mass, absorbing
    /// closure). Throws InvalidKernelRow / NonAbsorbing.
    static TransitionKernel create(const Environment& env, Table table, KernelLabel label);

    const std::vector<double>& row(int goal, int state, int action) const {
        return table_[static_cast<std::size_t>(goal)][static_cast<std::size_t>(state)]
                     [static_cast<std::size_t>(action)];
    }

    KernelLabel label() const { return label_; }
    void set_label(KernelLabel label) { label_ = label; }
    const Table& table() const { return table_; }
    int num_goals() const { return static_cast<int>(table_.size()); }
    int num_states() const { return table_.empty() ? 0 : static_cast<int>(table_[0].size()); }
    int num_actions() const {
        return num_states() == 0 ? 0 : static_cast<int>(table_[0][0].size());
    }

  private:
    Table table_;
    KernelLabel label_ = KernelLabel::real;
};

/// One alternating prefix (s0, a0, s1, ..., st) with the goal it belongs to.
struct History {
    int goal_id = 0;
    std::vector<int> states;  // length t+1
    std::vector<int> actions; // length t

    int t() const { return static_cast<int>(actions.size()); }
    /// The policy-visible context in markov mode; history mode uses the full
    /// sequence (see contexts::encode_history).
    int last_state() const { return states.back(); }

    /// Alternation and index-range invariants against an environment.
    void validate(const Environment& env) const;

    bool operator==(const History&) const = default;
};

/// Completed episode: at most H agent turns (fewer if an absorbing state was
/// entered), a terminal state, and the sparse terminal reward. step_return
/// carries any per-turn table rewards collected along the way.
struct Trajectory {
    int goal_id = 0;
    std::vector<int> states;  // s0..sL
    std::vector<int> actions; // a0..a(L-1)
    double terminal_reward = 0.0;
    double step_return = 0.0;

    int length() const { return static_cast<int>(actions.size()); }
    int terminal_state() const { return states.back(); }
    double total_return() const { return step_return + terminal_reward; }
};

/// Input to make_environment. Kernels included here are validated together
/// with the environment (row mass, absorbing closure).
struct EnvSpec {
    int num_states = 0;
    int num_actions = 0;
    int horizon = 0;
    ContextMode context_mode = ContextMode::markov;
    bool terminal_scoring = true;
    std::vector<std::vector<double>> step_reward; // empty -> all zeros
    std::vector<Goal> goals;
    std::vector<int> absorbing_states;
    std::vector<std::pair<KernelLabel, TransitionKernel::Table>> kernels;
};

/// Output of make_environment: the immutable environment plus any kernels the
/// spec carried, validated together (row mass, absorbing closure, guards).
struct EnvironmentBundle {
    Environment env;
    std::vector<TransitionKernel> kernels;
};

/// Terminal score of a state under a goal (indicator or table lookup).
double score(int terminal_state, const Goal& goal);

namespace detail {
/// Row mass tolerance shared by kernel validation and policy rows.
inline constexpr double kRowMassTol = 1e-12;
} // namespace detail

} // namespace cirl
