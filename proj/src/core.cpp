#include "cirl/core.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>

namespace cirl {

std::string to_string(ContextMode mode) {
    return mode == ContextMode::markov ? "markov" : "history";
}

std::string to_string(KernelLabel label) {
    switch (label) {
        case KernelLabel::real: return "real";
        case KernelLabel::simulated: return "simulated";
        case KernelLabel::calibrated: return "calibrated";
    }
    return "real";
}

double Goal::score(int terminal_state) const {
    if (!score_table.has_value()) {
        return terminal_state == target_state ? 1.0 : 0.0;
    }
    auto it = score_table->find(terminal_state);
    return it == score_table->end() ? 0.0 : it->second;
}

double score(int terminal_state, const Goal& goal) { return goal.score(terminal_state); }

void History::validate(const Environment& env) const {
    if (states.size() != actions.size() + 1) {
        throw std::invalid_argument("History: needs exactly one more state than actions");
    }
    if (goal_id < 0 || goal_id >= env.num_goals()) {
        throw std::invalid_argument("History: goal out of range");
    }
    for (int s : states) {
        if (s < 0 || s >= env.num_states()) throw std::invalid_argument("History: state out of range");
    }
    for (int a : actions) {
        if (a < 0 || a >= env.num_actions()) {
            throw std::invalid_argument("History: action out of range");
        }
    }
}

namespace {

void validate_row(const std::vector<double>& row, int num_states, const std::string& where) {
    if (static_cast<int>(row.size()) != num_states) {
        throw InvalidKernelRow(where + ": row has " + std::to_string(row.size()) +
                               " entries, expected " + std::to_string(num_states));
    }
    double sum = 0.0;
    for (double p : row) {
        if (!std::isfinite(p) || p < 0.0) {
            throw InvalidKernelRow(where + ": negative or non-finite entry");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > detail::kRowMassTol) {
        std::ostringstream oss;
        oss.precision(17);
        oss << where << ": row mass " << sum << " != 1 within 1e-12";
        throw InvalidKernelRow(oss.str());
    }
}

void validate_absorbing_row(const std::vector<double>& row, int state, const std::string& where) {
    for (std::size_t next = 0; next < row.size(); ++next) {
        const double p = row[next];
        if (static_cast<int>(next) == state) {
            if (std::abs(p - 1.0) > detail::kRowMassTol) {
                throw NonAbsorbing(where + ": self-loop mass " + std::to_string(p));
            }
        } else if (p > detail::kRowMassTol) {
            throw NonAbsorbing(where + ": leaks mass " + std::to_string(p) + " to state " +
                               std::to_string(next));
        }
    }
}

} // namespace

TransitionKernel TransitionKernel::create(const Environment& env, Table table, KernelLabel label) {
    const int num_goals = env.num_goals();
    const int num_states = env.num_states();
    const int num_actions = env.num_actions();
    if (static_cast<int>(table.size()) != num_goals) {
        throw std::invalid_argument("TransitionKernel: goal dimension mismatch");
    }
    for (int g = 0; g < num_goals; ++g) {
        if (static_cast<int>(table[g].size()) != num_states) {
            throw std::invalid_argument("TransitionKernel: state dimension mismatch");
        }
        for (int s = 0; s < num_states; ++s) {
            if (static_cast<int>(table[g][s].size()) != num_actions) {
                throw std::invalid_argument("TransitionKernel: action dimension mismatch");
            }
            for (int a = 0; a < num_actions; ++a) {
                std::string where = "kernel row (g=" + std::to_string(g) + ",s=" +
                                    std::to_string(s) + ",a=" + std::to_string(a) + ")";
                validate_row(table[g][s][a], num_states, where);
                if (env.is_absorbing(s)) {
                    validate_absorbing_row(table[g][s][a], s, where);
                }
            }
        }
    }
    TransitionKernel kernel;
    kernel.table_ = std::move(table);
    kernel.label_ = label;
    return kernel;
}

EnvironmentBundle make_environment(const EnvSpec& spec) {
    if (spec.num_states < 1 || spec.num_actions < 1 || spec.horizon < 1) {
        throw std::invalid_argument("make_environment: sizes and horizon must be positive");
    }
    if (spec.goals.empty()) {
        throw std::invalid_argument("make_environment: at least one goal required");
    }

    Environment env;
    env.num_states_ = spec.num_states;
    env.num_actions_ = spec.num_actions;
    env.horizon_ = spec.horizon;
    env.mode_ = spec.context_mode;
    env.terminal_scoring_ = spec.terminal_scoring;

    if (spec.context_mode == ContextMode::history) {
        // Enumerability guard: states^(H+1) capped so full-history tables stay exact.
        double count = 1.0;
        for (int i = 0; i <= spec.horizon; ++i) count *= static_cast<double>(spec.num_states);
        if (count > 50000.0) {
            throw SizeGuard("make_environment: history mode needs states^(H+1) <= 50000, got " +
                            std::to_string(count));
        }
    }

    env.absorbing_.assign(static_cast<std::size_t>(spec.num_states), false);
    for (int s : spec.absorbing_states) {
        if (s < 0 || s >= spec.num_states) {
            throw std::invalid_argument("make_environment: absorbing state out of range");
        }
        env.absorbing_[static_cast<std::size_t>(s)] = true;
    }
    for (int s = 0; s < spec.num_states; ++s) {
        if (env.absorbing_[static_cast<std::size_t>(s)]) env.absorbing_list_.push_back(s);
    }

    if (spec.step_reward.empty()) {
        env.step_reward_.assign(static_cast<std::size_t>(spec.num_states),
                                std::vector<double>(static_cast<std::size_t>(spec.num_actions), 0.0));
    } else {
        if (static_cast<int>(spec.step_reward.size()) != spec.num_states) {
            throw std::invalid_argument("make_environment: reward table state dimension mismatch");
        }
        for (const auto& row : spec.step_reward) {
            if (static_cast<int>(row.size()) != spec.num_actions) {
                throw std::invalid_argument("make_environment: reward table action dimension mismatch");
            }
            for (double r : row) {
                if (!std::isfinite(r)) {
                    throw std::invalid_argument("make_environment: non-finite reward entry");
                }
            }
        }
        env.step_reward_ = spec.step_reward;
    }

    for (std::size_t i = 0; i < spec.goals.size(); ++i) {
        const Goal& g = spec.goals[i];
        // goal_id doubles as the goal's index everywhere (kernel slices, logs).
        if (g.goal_id != static_cast<int>(i)) {
            throw std::invalid_argument("make_environment: goal_id must equal its position");
        }
        if (g.target_state < 0 || g.target_state >= spec.num_states ||
            g.initial_state < 0 || g.initial_state >= spec.num_states) {
            throw std::invalid_argument("make_environment: goal state index out of range");
        }
        if (g.score_table.has_value()) {
            for (const auto& [state, value] : *g.score_table) {
                if (state < 0 || state >= spec.num_states) {
                    throw std::invalid_argument("make_environment: score table state out of range");
                }
                if (!(value >= 0.0 && value <= 1.0)) {
                    throw std::invalid_argument("make_environment: score outside [0,1]");
                }
            }
            auto it = g.score_table->find(g.target_state);
            if (it == g.score_table->end() || it->second != 1.0) {
                throw std::invalid_argument("make_environment: score_table(target_state) must be 1");
            }
        }
    }
    env.goals_ = spec.goals;

    // Reward scale. Step rewards count only where they can actually accrue
    // (non-absorbing states); the terminal score contributes its [0,1] scale.
    double step_max = 0.0;
    for (int s = 0; s < spec.num_states; ++s) {
        if (env.absorbing_[static_cast<std::size_t>(s)]) continue;
        for (int a = 0; a < spec.num_actions; ++a) {
            step_max = std::max(step_max, std::abs(env.step_reward_[static_cast<std::size_t>(s)]
                                                                   [static_cast<std::size_t>(a)]));
        }
    }
    if (spec.terminal_scoring && step_max > 0.0) {
        // A single turn must never pay more than r_max, or the return-gap
        // bounds lose their per-turn scale; the shipped scenarios use one
        // reward channel at a time.
        throw std::invalid_argument(
            "make_environment: terminal scoring and a nonzero step-reward table are exclusive");
    }
    env.r_max_ = spec.terminal_scoring ? 1.0 : step_max;

    EnvironmentBundle bundle;
    bundle.env = std::move(env);
    for (const auto& [label, table] : spec.kernels) {
        bundle.kernels.push_back(TransitionKernel::create(bundle.env, table, label));
    }
    return bundle;
}

} // namespace cirl
