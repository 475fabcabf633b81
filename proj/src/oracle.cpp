#include "cirl/oracle.hpp"

#include <cmath>
#include <stdexcept>

#include "cirl/rollout.hpp"

namespace cirl {

namespace {

constexpr double kMassTol = 1e-9;
// Hard cap on materialized table entries; history-mode enumerations beyond
// this are rejected rather than silently thrashing memory.
constexpr double kMaxTableEntries = 5e7;

} // namespace

namespace contexts {

std::uint64_t per_goal(const Environment& env, int t) {
    if (env.context_mode() == ContextMode::markov) {
        return static_cast<std::uint64_t>(env.num_states());
    }
    const double branch = static_cast<double>(env.num_states()) *
                          static_cast<double>(env.num_actions());
    double count = 1.0;
    for (int i = 0; i < t; ++i) {
        count *= branch;
        if (count > kMaxTableEntries) {
            throw SizeGuard("history enumeration exceeds table cap at t=" + std::to_string(t));
        }
    }
    return static_cast<std::uint64_t>(count);
}

int last_state(const Environment& env, int goal_index, int t, std::uint64_t ctx) {
    if (env.context_mode() == ContextMode::markov) return static_cast<int>(ctx);
    if (t == 0) return env.goals()[static_cast<std::size_t>(goal_index)].initial_state;
    return static_cast<int>(ctx % static_cast<std::uint64_t>(env.num_states()));
}

std::uint64_t child(const Environment& env, std::uint64_t ctx, int action, int next_state) {
    if (env.context_mode() == ContextMode::markov) return static_cast<std::uint64_t>(next_state);
    const std::uint64_t branch = static_cast<std::uint64_t>(env.num_states()) *
                                 static_cast<std::uint64_t>(env.num_actions());
    return ctx * branch + static_cast<std::uint64_t>(action) *
                              static_cast<std::uint64_t>(env.num_states()) +
           static_cast<std::uint64_t>(next_state);
}

std::uint64_t encode_history(const Environment& env, const History& history) {
    history.validate(env);
    const int start =
        env.goals()[static_cast<std::size_t>(history.goal_id)].initial_state;
    if (history.states.front() != start) {
        throw std::invalid_argument("encode_history: history does not start at the goal's state");
    }
    std::uint64_t ctx = 0;
    for (std::size_t i = 0; i < history.actions.size(); ++i) {
        ctx = child(env, ctx, history.actions[i], history.states[i + 1]);
    }
    return ctx;
}

History decode_history(const Environment& env, int goal_index, int t, std::uint64_t ctx) {
    const std::uint64_t states = static_cast<std::uint64_t>(env.num_states());
    History history;
    history.goal_id = goal_index;
    history.states.assign(static_cast<std::size_t>(t) + 1, 0);
    history.actions.assign(static_cast<std::size_t>(t), 0);
    history.states[0] = env.goals()[static_cast<std::size_t>(goal_index)].initial_state;
    for (int i = t; i >= 1; --i) {
        history.states[static_cast<std::size_t>(i)] = static_cast<int>(ctx % states);
        ctx /= states;
        history.actions[static_cast<std::size_t>(i) - 1] =
            static_cast<int>(ctx % static_cast<std::uint64_t>(env.num_actions()));
        ctx /= static_cast<std::uint64_t>(env.num_actions());
    }
    return history;
}

} // namespace contexts

DistributionTable DistributionTable::validated(ContextMode mode, TableKind kind, int t,
                                               int num_goals, std::uint64_t contexts_per_goal,
                                               int num_actions, std::vector<double> p) {
    DistributionTable table;
    table.mode = mode;
    table.kind = kind;
    table.t = t;
    table.num_goals = num_goals;
    table.contexts_per_goal = contexts_per_goal;
    table.num_actions = kind == TableKind::joint ? num_actions : 0;
    table.p = std::move(p);
    const std::size_t expected =
        static_cast<std::size_t>(num_goals) * contexts_per_goal *
        (kind == TableKind::joint ? static_cast<std::size_t>(num_actions) : 1u);
    if (table.p.size() != expected) {
        throw std::invalid_argument("DistributionTable: entry count mismatch");
    }
    double mass = 0.0;
    for (double v : table.p) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument("DistributionTable: negative or non-finite entry");
        }
        mass += v;
    }
    if (std::abs(mass - 1.0) > kMassTol) {
        throw std::invalid_argument("DistributionTable: mass " + std::to_string(mass) +
                                    " not 1 within 1e-9");
    }
    return table;
}

double DistributionTable::mass() const {
    double m = 0.0;
    for (double v : p) m += v;
    return m;
}

bool DistributionTable::same_enumeration(const DistributionTable& other) const {
    return mode == other.mode && kind == other.kind && t == other.t &&
           num_goals == other.num_goals && contexts_per_goal == other.contexts_per_goal &&
           num_actions == other.num_actions;
}

double l1_distance(const DistributionTable& p, const DistributionTable& q) {
    if (!p.same_enumeration(q)) {
        throw EnumerationMismatch("l1_distance: tables do not share an enumeration");
    }
    double d = 0.0;
    for (std::size_t i = 0; i < p.p.size(); ++i) d += std::abs(p.p[i] - q.p[i]);
    return d;
}

DistributionTable initial_distribution(const Environment& env) {
    const int num_goals = env.num_goals();
    const std::uint64_t per_goal = contexts::per_goal(env, 0);
    std::vector<double> p(static_cast<std::size_t>(num_goals) * per_goal, 0.0);
    const double w = 1.0 / static_cast<double>(num_goals);
    for (int g = 0; g < num_goals; ++g) {
        const std::uint64_t ctx =
            env.context_mode() == ContextMode::markov
                ? static_cast<std::uint64_t>(env.goals()[static_cast<std::size_t>(g)].initial_state)
                : 0u;
        p[static_cast<std::size_t>(g) * per_goal + ctx] = w;
    }
    return DistributionTable::validated(env.context_mode(), TableKind::marginal, 0, num_goals,
                                        per_goal, 0, std::move(p));
}

DistributionTable to_joint(const DistributionTable& marginal, const Policy& policy,
                           const Environment& env) {
    if (marginal.kind != TableKind::marginal) {
        throw std::invalid_argument("to_joint: input must be a marginal");
    }
    const int num_actions = env.num_actions();
    std::vector<double> q(marginal.p.size() * static_cast<std::size_t>(num_actions), 0.0);
    for (int g = 0; g < marginal.num_goals; ++g) {
        for (std::uint64_t c = 0; c < marginal.contexts_per_goal; ++c) {
            const double mass = marginal.p[marginal.marginal_index(g, c)];
            if (mass == 0.0) continue;
            const int state = contexts::last_state(env, g, marginal.t, c);
            const std::vector<double> probs = policy.action_probabilities(state);
            const std::size_t base =
                (static_cast<std::size_t>(g) * marginal.contexts_per_goal + c) *
                static_cast<std::size_t>(num_actions);
            for (int a = 0; a < num_actions; ++a) {
                q[base + static_cast<std::size_t>(a)] = mass * probs[static_cast<std::size_t>(a)];
            }
        }
    }
    return DistributionTable::validated(marginal.mode, TableKind::joint, marginal.t,
                                        marginal.num_goals, marginal.contexts_per_goal,
                                        num_actions, std::move(q));
}

DistributionTable propagate_joint(const DistributionTable& joint, const TransitionKernel& kernel,
                                  const Environment& env) {
    if (joint.kind != TableKind::joint) {
        throw std::invalid_argument("propagate_joint: input must be a joint");
    }
    const int num_actions = joint.num_actions;
    const std::uint64_t next_per_goal = contexts::per_goal(env, joint.t + 1);
    std::vector<double> d(static_cast<std::size_t>(joint.num_goals) * next_per_goal, 0.0);
    for (int g = 0; g < joint.num_goals; ++g) {
        for (std::uint64_t c = 0; c < joint.contexts_per_goal; ++c) {
            const int state = contexts::last_state(env, g, joint.t, c);
            for (int a = 0; a < num_actions; ++a) {
                const double mass = joint.p[joint.joint_index(g, c, a)];
                if (mass == 0.0) continue;
                const std::vector<double>& row = kernel.row(g, state, a);
                for (int next = 0; next < env.num_states(); ++next) {
                    if (row[static_cast<std::size_t>(next)] == 0.0) continue;
                    const std::uint64_t ctx = contexts::child(env, c, a, next);
                    d[static_cast<std::size_t>(g) * next_per_goal + ctx] +=
                        mass * row[static_cast<std::size_t>(next)];
                }
            }
        }
    }
    return DistributionTable::validated(joint.mode, TableKind::marginal, joint.t + 1,
                                        joint.num_goals, next_per_goal, 0, std::move(d));
}

DistributionTable propagate(const DistributionTable& marginal, const Policy& policy,
                            const TransitionKernel& kernel, const Environment& env) {
    return propagate_joint(to_joint(marginal, policy, env), kernel, env);
}

std::vector<DistributionTable> exact_distributions(const Environment& env, const Policy& policy,
                                                   const TransitionKernel& kernel) {
    // Re-check the enumerability guard at the point of use.
    contexts::per_goal(env, env.horizon());
    std::vector<DistributionTable> tables;
    tables.reserve(static_cast<std::size_t>(env.horizon()) + 1);
    tables.push_back(initial_distribution(env));
    for (int t = 0; t < env.horizon(); ++t) {
        tables.push_back(propagate(tables.back(), policy, kernel, env));
    }
    return tables;
}

double expected_return_exact(const Environment& env, const Policy& policy,
                             const TransitionKernel& kernel) {
    DistributionTable d = initial_distribution(env);
    double j = 0.0;
    for (int t = 0; t < env.horizon(); ++t) {
        const DistributionTable q = to_joint(d, policy, env);
        for (int g = 0; g < q.num_goals; ++g) {
            for (std::uint64_t c = 0; c < q.contexts_per_goal; ++c) {
                const int state = contexts::last_state(env, g, t, c);
                for (int a = 0; a < q.num_actions; ++a) {
                    const double mass = q.p[q.joint_index(g, c, a)];
                    if (mass == 0.0) continue;
                    j += mass * env.step_reward(state, a);
                }
            }
        }
        d = propagate_joint(q, kernel, env);
    }
    if (env.terminal_scoring()) {
        for (int g = 0; g < d.num_goals; ++g) {
            for (std::uint64_t c = 0; c < d.contexts_per_goal; ++c) {
                const double mass = d.p[d.marginal_index(g, c)];
                if (mass == 0.0) continue;
                j += mass * env.score(contexts::last_state(env, g, env.horizon(), c), g);
            }
        }
    }
    return j;
}

std::vector<double> policy_deviation_series(const Policy& pi, const Policy& pi_ref,
                                            const Environment& env,
                                            const TransitionKernel& kernel) {
    std::vector<double> tv_per_state(static_cast<std::size_t>(env.num_states()));
    for (int s = 0; s < env.num_states(); ++s) {
        tv_per_state[static_cast<std::size_t>(s)] = total_variation_to(pi, pi_ref, s);
    }
    const std::vector<DistributionTable> ref = exact_distributions(env, pi_ref, kernel);
    std::vector<double> eps(static_cast<std::size_t>(env.horizon()), 0.0);
    for (int t = 0; t < env.horizon(); ++t) {
        const DistributionTable& d = ref[static_cast<std::size_t>(t)];
        double value = 0.0;
        for (int g = 0; g < d.num_goals; ++g) {
            for (std::uint64_t c = 0; c < d.contexts_per_goal; ++c) {
                const double mass = d.p[d.marginal_index(g, c)];
                if (mass == 0.0) continue;
                value += mass *
                         tv_per_state[static_cast<std::size_t>(contexts::last_state(env, g, t, c))];
            }
        }
        eps[static_cast<std::size_t>(t)] = value;
    }
    return eps;
}

std::vector<double> history_mismatch_series(const Policy& pi, const Policy& pi_ref,
                                            const Environment& env,
                                            const TransitionKernel& kernel) {
    const std::vector<DistributionTable> d_pi = exact_distributions(env, pi, kernel);
    const std::vector<DistributionTable> d_ref = exact_distributions(env, pi_ref, kernel);
    std::vector<double> delta(static_cast<std::size_t>(env.horizon()), 0.0);
    for (int t = 0; t < env.horizon(); ++t) {
        delta[static_cast<std::size_t>(t)] =
            l1_distance(d_pi[static_cast<std::size_t>(t)], d_ref[static_cast<std::size_t>(t)]);
    }
    return delta;
}

std::vector<double> simulator_error_series(const Policy& pi, const TransitionKernel& kernel_real,
                                           const TransitionKernel& kernel_sim,
                                           const Environment& env) {
    // Per-(goal,state,action) row distances, computed once.
    const int num_goals = env.num_goals();
    const int num_states = env.num_states();
    const int num_actions = env.num_actions();
    std::vector<double> row_dist(
        static_cast<std::size_t>(num_goals) * static_cast<std::size_t>(num_states) *
            static_cast<std::size_t>(num_actions),
        0.0);
    for (int g = 0; g < num_goals; ++g) {
        for (int s = 0; s < num_states; ++s) {
            for (int a = 0; a < num_actions; ++a) {
                const std::vector<double>& pr = kernel_real.row(g, s, a);
                const std::vector<double>& ps = kernel_sim.row(g, s, a);
                double d = 0.0;
                for (int next = 0; next < num_states; ++next) {
                    d += std::abs(pr[static_cast<std::size_t>(next)] -
                                  ps[static_cast<std::size_t>(next)]);
                }
                row_dist[(static_cast<std::size_t>(g) * static_cast<std::size_t>(num_states) +
                          static_cast<std::size_t>(s)) *
                             static_cast<std::size_t>(num_actions) +
                         static_cast<std::size_t>(a)] = d;
            }
        }
    }

    const std::vector<DistributionTable> real = exact_distributions(env, pi, kernel_real);
    std::vector<double> delta(static_cast<std::size_t>(env.horizon()), 0.0);
    for (int t = 0; t < env.horizon(); ++t) {
        const DistributionTable q = to_joint(real[static_cast<std::size_t>(t)], pi, env);
        double value = 0.0;
        for (int g = 0; g < q.num_goals; ++g) {
            for (std::uint64_t c = 0; c < q.contexts_per_goal; ++c) {
                const int state = contexts::last_state(env, g, t, c);
                for (int a = 0; a < num_actions; ++a) {
                    const double mass = q.p[q.joint_index(g, c, a)];
                    if (mass == 0.0) continue;
                    value += mass * row_dist[(static_cast<std::size_t>(g) *
                                                  static_cast<std::size_t>(num_states) +
                                              static_cast<std::size_t>(state)) *
                                                 static_cast<std::size_t>(num_actions) +
                                             static_cast<std::size_t>(a)];
                }
            }
        }
        delta[static_cast<std::size_t>(t)] = value;
    }
    return delta;
}

DivergenceSeries divergence_series(const Environment& env, const Policy& pi, const Policy& pi_ref,
                                   const TransitionKernel& kernel_real,
                                   const TransitionKernel& kernel_sim) {
    DivergenceSeries series;
    series.delta = history_mismatch_series(pi, pi_ref, env, kernel_real);
    series.epsilon = policy_deviation_series(pi, pi_ref, env, kernel_real);
    series.sim_delta = simulator_error_series(pi, kernel_real, kernel_sim, env);
    const std::vector<DistributionTable> real = exact_distributions(env, pi, kernel_real);
    const std::vector<DistributionTable> sim = exact_distributions(env, pi, kernel_sim);
    series.env_delta.resize(static_cast<std::size_t>(env.horizon()));
    for (int t = 0; t < env.horizon(); ++t) {
        series.env_delta[static_cast<std::size_t>(t)] =
            l1_distance(real[static_cast<std::size_t>(t)], sim[static_cast<std::size_t>(t)]);
    }
    return series;
}

McEstimate expected_return_mc(const Environment& env, const Policy& policy,
                              const TransitionKernel& kernel, int episodes, const Rng& rng) {
    if (episodes < 1) throw std::invalid_argument("expected_return_mc: episodes must be >= 1");
    double sum = 0.0;
    double sum_sq = 0.0;
    for (int i = 0; i < episodes; ++i) {
        Rng episode_rng = rng.child(static_cast<std::uint64_t>(i));
        const int goal = static_cast<int>(
            episode_rng.next_below(static_cast<std::uint64_t>(env.num_goals())));
        const Trajectory traj = run_episode(env, policy, kernel, goal, episode_rng);
        const double r = traj.total_return();
        sum += r;
        sum_sq += r * r;
    }
    McEstimate est;
    est.episodes = episodes;
    est.mean = sum / static_cast<double>(episodes);
    if (episodes > 1) {
        const double var =
            std::max(0.0, (sum_sq - sum * sum / static_cast<double>(episodes)) /
                              static_cast<double>(episodes - 1));
        est.std_error = std::sqrt(var / static_cast<double>(episodes));
    }
    return est;
}

} // namespace cirl
