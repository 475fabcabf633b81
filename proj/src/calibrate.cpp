#include "cirl/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cirl {

namespace {

/// Observation counts aggregated per (goal, state, action) row; all NLL and
/// gradient evaluations run on counts, never on raw samples.
struct CountTable {
    int num_goals = 0;
    int num_states = 0;
    int num_actions = 0;
    std::vector<double> counts; // [g][s][a][s']

    static CountTable from_samples(const Environment& env,
                                   const std::vector<CalibrationSample>& samples) {
        CountTable table;
        table.num_goals = env.num_goals();
        table.num_states = env.num_states();
        table.num_actions = env.num_actions();
        table.counts.assign(static_cast<std::size_t>(table.num_goals) *
                                static_cast<std::size_t>(table.num_states) *
                                static_cast<std::size_t>(table.num_actions) *
                                static_cast<std::size_t>(table.num_states),
                            0.0);
        for (const auto& s : samples) {
            if (s.goal_id < 0 || s.goal_id >= table.num_goals || s.state < 0 ||
                s.state >= table.num_states || s.action < 0 || s.action >= table.num_actions ||
                s.next_state < 0 || s.next_state >= table.num_states) {
                throw std::invalid_argument("calibration sample index out of range");
            }
            table.counts[table.offset(s.goal_id, s.state, s.action) +
                         static_cast<std::size_t>(s.next_state)] += 1.0;
        }
        return table;
    }

    std::size_t offset(int g, int s, int a) const {
        return ((static_cast<std::size_t>(g) * static_cast<std::size_t>(num_states) +
                 static_cast<std::size_t>(s)) *
                    static_cast<std::size_t>(num_actions) +
                static_cast<std::size_t>(a)) *
               static_cast<std::size_t>(num_states);
    }

    double row_total(int g, int s, int a) const {
        const std::size_t base = offset(g, s, a);
        double total = 0.0;
        for (int next = 0; next < num_states; ++next) {
            total += counts[base + static_cast<std::size_t>(next)];
        }
        return total;
    }
};

} // namespace

KernelParams KernelParams::zeros(const Environment& env) {
    KernelParams params;
    params.num_goals_ = env.num_goals();
    params.num_states_ = env.num_states();
    params.num_actions_ = env.num_actions();
    params.logits_.assign(static_cast<std::size_t>(params.num_goals_) *
                              static_cast<std::size_t>(params.num_states_) *
                              static_cast<std::size_t>(params.num_actions_) *
                              static_cast<std::size_t>(params.num_states_),
                          0.0);
    return params;
}

KernelParams KernelParams::random_gaussian(const Environment& env, Rng& rng, double stddev) {
    KernelParams params = zeros(env);
    for (double& v : params.logits_) v = stddev * rng.next_gaussian();
    return params;
}

KernelParams KernelParams::from_kernel(const Environment& env, const TransitionKernel& kernel,
                                       double floor) {
    KernelParams params = zeros(env);
    for (int g = 0; g < params.num_goals_; ++g) {
        for (int s = 0; s < params.num_states_; ++s) {
            for (int a = 0; a < params.num_actions_; ++a) {
                const std::size_t base = params.row_offset(g, s, a);
                const std::vector<double>& row = kernel.row(g, s, a);
                for (int next = 0; next < params.num_states_; ++next) {
                    params.logits_[base + static_cast<std::size_t>(next)] =
                        std::log(std::max(row[static_cast<std::size_t>(next)], floor));
                }
            }
        }
    }
    return params;
}

std::vector<double> KernelParams::row_probabilities(int goal, int state, int action) const {
    const std::size_t base = row_offset(goal, state, action);
    double m = -std::numeric_limits<double>::infinity();
    for (int next = 0; next < num_states_; ++next) {
        m = std::max(m, logits_[base + static_cast<std::size_t>(next)]);
    }
    std::vector<double> p(static_cast<std::size_t>(num_states_));
    double sum = 0.0;
    for (int next = 0; next < num_states_; ++next) {
        p[static_cast<std::size_t>(next)] =
            std::exp(logits_[base + static_cast<std::size_t>(next)] - m);
        sum += p[static_cast<std::size_t>(next)];
    }
    for (double& v : p) v /= sum;
    return p;
}

TransitionKernel KernelParams::to_kernel(const Environment& env) const {
    TransitionKernel::Table table(static_cast<std::size_t>(num_goals_));
    for (int g = 0; g < num_goals_; ++g) {
        table[static_cast<std::size_t>(g)].resize(static_cast<std::size_t>(num_states_));
        for (int s = 0; s < num_states_; ++s) {
            table[static_cast<std::size_t>(g)][static_cast<std::size_t>(s)].resize(
                static_cast<std::size_t>(num_actions_));
            for (int a = 0; a < num_actions_; ++a) {
                if (env.is_absorbing(s)) {
                    std::vector<double> row(static_cast<std::size_t>(num_states_), 0.0);
                    row[static_cast<std::size_t>(s)] = 1.0;
                    table[static_cast<std::size_t>(g)][static_cast<std::size_t>(s)]
                         [static_cast<std::size_t>(a)] = std::move(row);
                } else {
                    table[static_cast<std::size_t>(g)][static_cast<std::size_t>(s)]
                         [static_cast<std::size_t>(a)] = row_probabilities(g, s, a);
                }
            }
        }
    }
    return TransitionKernel::create(env, std::move(table), KernelLabel::calibrated);
}

CountMleResult count_mle(const Environment& env, const std::vector<CalibrationSample>& samples,
                         double smoothing) {
    if (smoothing < 0.0) throw std::invalid_argument("count_mle: smoothing must be >= 0");
    const CountTable counts = CountTable::from_samples(env, samples);
    const int num_states = env.num_states();

    CountMleResult result;
    TransitionKernel::Table table(static_cast<std::size_t>(env.num_goals()));
    for (int g = 0; g < env.num_goals(); ++g) {
        table[static_cast<std::size_t>(g)].resize(static_cast<std::size_t>(num_states));
        for (int s = 0; s < num_states; ++s) {
            table[static_cast<std::size_t>(g)][static_cast<std::size_t>(s)].resize(
                static_cast<std::size_t>(env.num_actions()));
            for (int a = 0; a < env.num_actions(); ++a) {
                std::vector<double> row(static_cast<std::size_t>(num_states), 0.0);
                if (env.is_absorbing(s)) {
                    row[static_cast<std::size_t>(s)] = 1.0;
                } else {
                    const double total = counts.row_total(g, s, a);
                    const std::size_t base = counts.offset(g, s, a);
                    if (total == 0.0 && smoothing == 0.0) {
                        result.uncovered_rows.push_back(RowId{g, s, a});
                        const double u = 1.0 / static_cast<double>(num_states);
                        for (double& v : row) v = u;
                    } else {
                        const double denom =
                            total + smoothing * static_cast<double>(num_states);
                        for (int next = 0; next < num_states; ++next) {
                            row[static_cast<std::size_t>(next)] =
                                (counts.counts[base + static_cast<std::size_t>(next)] +
                                 smoothing) /
                                denom;
                        }
                    }
                }
                table[static_cast<std::size_t>(g)][static_cast<std::size_t>(s)]
                     [static_cast<std::size_t>(a)] = std::move(row);
            }
        }
    }
    result.kernel = TransitionKernel::create(env, std::move(table), KernelLabel::calibrated);
    return result;
}

double nll(const Environment& env, const KernelParams& params,
           const std::vector<CalibrationSample>& samples) {
    if (samples.empty()) throw EmptyDataset("nll: empty sample set");
    const CountTable counts = CountTable::from_samples(env, samples);
    double value = 0.0;
    for (int g = 0; g < counts.num_goals; ++g) {
        for (int s = 0; s < counts.num_states; ++s) {
            for (int a = 0; a < counts.num_actions; ++a) {
                const std::size_t base = counts.offset(g, s, a);
                if (env.is_absorbing(s)) {
                    // Pinned self-loop: consistent observations contribute
                    // -log(1) = 0; anything else is corrupt data.
                    for (int next = 0; next < counts.num_states; ++next) {
                        if (next != s &&
                            counts.counts[base + static_cast<std::size_t>(next)] > 0.0) {
                            throw std::invalid_argument(
                                "nll: observed transition leaving an absorbing state");
                        }
                    }
                    continue;
                }
                if (counts.row_total(g, s, a) == 0.0) continue;
                const std::vector<double> p = params.row_probabilities(g, s, a);
                for (int next = 0; next < counts.num_states; ++next) {
                    const double c = counts.counts[base + static_cast<std::size_t>(next)];
                    if (c > 0.0) value -= c * std::log(p[static_cast<std::size_t>(next)]);
                }
            }
        }
    }
    return value;
}

CalibrationReport calibrate_sgd(const Environment& env, const KernelParams& init,
                                const std::vector<CalibrationSample>& samples, int max_steps,
                                double init_lr) {
    if (samples.empty()) throw EmptyDataset("calibrate_sgd: empty sample set");
    if (max_steps < 1) throw std::invalid_argument("calibrate_sgd: max_steps must be >= 1");
    if (!(init_lr > 0.0)) throw std::invalid_argument("calibrate_sgd: init_lr must be positive");

    const CountTable counts = CountTable::from_samples(env, samples);
    KernelParams params = init;

    const auto eval_nll = [&](const KernelParams& q) { return nll(env, q, samples); };

    // Gradient of the NLL w.r.t. a row's logits: total * softmax(row) - counts.
    const auto gradient = [&](const KernelParams& q, std::vector<double>& grad) {
        grad.assign(q.logits().size(), 0.0);
        double inf_norm = 0.0;
        for (int g = 0; g < counts.num_goals; ++g) {
            for (int s = 0; s < counts.num_states; ++s) {
                if (env.is_absorbing(s)) continue;
                for (int a = 0; a < counts.num_actions; ++a) {
                    const double total = counts.row_total(g, s, a);
                    if (total == 0.0) continue;
                    const std::vector<double> p = q.row_probabilities(g, s, a);
                    const std::size_t cbase = counts.offset(g, s, a);
                    const std::size_t pbase = q.row_offset(g, s, a);
                    for (int next = 0; next < counts.num_states; ++next) {
                        const double gval =
                            total * p[static_cast<std::size_t>(next)] -
                            counts.counts[cbase + static_cast<std::size_t>(next)];
                        grad[pbase + static_cast<std::size_t>(next)] = gval;
                        inf_norm = std::max(inf_norm, std::abs(gval));
                    }
                }
            }
        }
        return inf_norm;
    };

    CalibrationReport report;
    double current = eval_nll(params);
    report.nll_curve.push_back(current);

    std::vector<double> grad;
    for (int step = 0; step < max_steps; ++step) {
        const double inf_norm = gradient(params, grad);
        report.final_grad_norm = inf_norm;
        if (inf_norm < 1e-8) break;

        double lr = init_lr;
        KernelParams candidate = params;
        bool accepted = false;
        while (lr > 1e-18) {
            for (std::size_t i = 0; i < grad.size(); ++i) {
                candidate.mutable_logits()[i] = params.logits()[i] - lr * grad[i];
            }
            const double value = eval_nll(candidate);
            if (value <= current) {
                params = candidate;
                current = value;
                accepted = true;
                break;
            }
            lr *= 0.5;
        }
        if (!accepted) break; // no non-increasing step exists at this scale
        report.nll_curve.push_back(current);
        report.steps_taken = step + 1;
    }

    report.kernel = params.to_kernel(env);

    const CountMleResult mle = count_mle(env, samples, 0.0);
    report.uncovered_rows = mle.uncovered_rows;
    double max_tv = 0.0;
    for (int g = 0; g < counts.num_goals; ++g) {
        for (int s = 0; s < counts.num_states; ++s) {
            if (env.is_absorbing(s)) continue;
            for (int a = 0; a < counts.num_actions; ++a) {
                if (counts.row_total(g, s, a) == 0.0) continue; // uncovered: not comparable
                const std::vector<double>& fitted = report.kernel.row(g, s, a);
                const std::vector<double>& target = mle.kernel.row(g, s, a);
                double tv = 0.0;
                for (int next = 0; next < counts.num_states; ++next) {
                    tv += std::abs(fitted[static_cast<std::size_t>(next)] -
                                   target[static_cast<std::size_t>(next)]);
                }
                max_tv = std::max(max_tv, tv);
            }
        }
    }
    report.max_row_tv_to_count_mle = max_tv;
    return report;
}

SimGapReport sim_gap_report(const TransitionKernel& kernel_real, const TransitionKernel& kernel_sim,
                            const Policy& policy, const Environment& env) {
    SimGapReport report;
    report.delta = simulator_error_series(policy, kernel_real, kernel_sim, env);
    report.bound = check_theorem2(env, kernel_real, kernel_sim, policy);
    return report;
}

std::vector<CalibrationSample> proportional_samples(const Environment& env,
                                                    const TransitionKernel& kernel, int per_row) {
    if (per_row < 1) throw std::invalid_argument("proportional_samples: per_row must be >= 1");
    std::vector<CalibrationSample> samples;
    for (int g = 0; g < env.num_goals(); ++g) {
        const Goal& goal = env.goals()[static_cast<std::size_t>(g)];
        for (int s = 0; s < env.num_states(); ++s) {
            if (env.is_absorbing(s)) continue;
            for (int a = 0; a < env.num_actions(); ++a) {
                const std::vector<double>& row = kernel.row(g, s, a);
                for (int next = 0; next < env.num_states(); ++next) {
                    const long count = std::lround(row[static_cast<std::size_t>(next)] *
                                                   static_cast<double>(per_row));
                    for (long i = 0; i < count; ++i) {
                        samples.push_back(CalibrationSample{g, goal.target_state, s, a, next});
                    }
                }
            }
        }
    }
    return samples;
}

} // namespace cirl
