#include "cirl/bounds.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cirl {

namespace {

/// Marginal mismatch of two policies under one kernel for t = 0..H inclusive.
/// The t = H entry is what the terminal-score step of the return bound rests
/// on, so the recurrence is certified through it.
std::vector<double> mismatch_through_horizon(const Policy& pi, const Policy& pi_ref,
                                             const Environment& env,
                                             const TransitionKernel& kernel) {
    const std::vector<DistributionTable> d_pi = exact_distributions(env, pi, kernel);
    const std::vector<DistributionTable> d_ref = exact_distributions(env, pi_ref, kernel);
    std::vector<double> delta(d_pi.size());
    for (std::size_t t = 0; t < d_pi.size(); ++t) {
        delta[t] = l1_distance(d_pi[t], d_ref[t]);
    }
    return delta;
}

std::vector<double> env_mismatch_through_horizon(const Policy& pi,
                                                 const TransitionKernel& kernel_real,
                                                 const TransitionKernel& kernel_sim,
                                                 const Environment& env) {
    const std::vector<DistributionTable> real = exact_distributions(env, pi, kernel_real);
    const std::vector<DistributionTable> sim = exact_distributions(env, pi, kernel_sim);
    std::vector<double> delta(real.size());
    for (std::size_t t = 0; t < real.size(); ++t) {
        delta[t] = l1_distance(real[t], sim[t]);
    }
    return delta;
}

} // namespace

BoundReport check_joint_decomposition(const JointMatrix& p, const JointMatrix& q) {
    if (p.empty() || p.size() != q.size()) {
        throw EnumerationMismatch("check_joint_decomposition: x-dimension mismatch");
    }
    const std::size_t nx = p.size();
    const std::size_t ny = p[0].size();
    for (std::size_t x = 0; x < nx; ++x) {
        if (p[x].size() != ny || q[x].size() != ny) {
            throw EnumerationMismatch("check_joint_decomposition: y-dimension mismatch");
        }
    }

    double lhs = 0.0;
    double marginal_term = 0.0;
    double conditional_term = 0.0;
    for (std::size_t x = 0; x < nx; ++x) {
        double px = 0.0;
        double qx = 0.0;
        for (std::size_t y = 0; y < ny; ++y) {
            lhs += std::abs(p[x][y] - q[x][y]);
            px += p[x][y];
            qx += q[x][y];
        }
        marginal_term += std::abs(px - qx);
        if (qx > 0.0) {
            // E_{x~q}: conditional rows; a zero p-marginal row uses q's
            // conditional (a valid factorization of the all-zero row).
            double row = 0.0;
            if (px > 0.0) {
                for (std::size_t y = 0; y < ny; ++y) {
                    row += std::abs(p[x][y] / px - q[x][y] / qx);
                }
            }
            conditional_term += qx * row;
        }
    }

    BoundReport report;
    report.name = "joint_decomposition";
    report.lhs = lhs;
    report.rhs = marginal_term + conditional_term;
    report.rhs_intermediate = report.rhs;
    report.holds = report.lhs <= report.rhs + kBoundSlack;
    report.slack = report.rhs - report.lhs;
    return report;
}

BoundReport check_error_propagation(const Policy& pi, const Policy& pi_ref,
                                    const Environment& env, const TransitionKernel& kernel) {
    const std::vector<double> delta = mismatch_through_horizon(pi, pi_ref, env, kernel);
    const std::vector<double> eps = policy_deviation_series(pi, pi_ref, env, kernel);
    const int horizon = env.horizon();

    BoundReport report;
    report.name = "error_propagation";
    report.recurrence_holds = delta[0] <= kBoundSlack;

    // One-step recurrence at every t, telescoped bound at every t; the
    // primary pair is the tightest telescoped check.
    double prefix = 0.0;
    double best_slack = std::numeric_limits<double>::infinity();
    for (int t = 0; t < horizon; ++t) {
        const double next = delta[static_cast<std::size_t>(t) + 1];
        const double step_rhs = delta[static_cast<std::size_t>(t)] +
                                eps[static_cast<std::size_t>(t)];
        if (next > step_rhs + kBoundSlack) report.recurrence_holds = false;

        prefix += eps[static_cast<std::size_t>(t)];
        const double telescoped_slack = prefix - next;
        if (telescoped_slack < best_slack) {
            best_slack = telescoped_slack;
            report.lhs = next;
            report.rhs = prefix;
            report.tightest_t = t + 1;
        }
        report.per_term.push_back(BoundTerm{t, delta[static_cast<std::size_t>(t)],
                                            eps[static_cast<std::size_t>(t)], horizon - t});
    }
    report.holds = report.lhs <= report.rhs + kBoundSlack;
    report.slack = report.rhs - report.lhs;
    report.rhs_intermediate = report.rhs;
    return report;
}

BoundReport check_theorem1(const Environment& env, const TransitionKernel& kernel,
                           const Policy& pi, const Policy& pi_ref) {
    const double j_pi = expected_return_exact(env, pi, kernel);
    const double j_ref = expected_return_exact(env, pi_ref, kernel);
    const std::vector<double> delta = mismatch_through_horizon(pi, pi_ref, env, kernel);
    const std::vector<double> eps = policy_deviation_series(pi, pi_ref, env, kernel);
    const int horizon = env.horizon();
    const double r_max = env.r_max();

    BoundReport report;
    report.name = "policy_shift_bound";
    report.lhs = std::abs(j_pi - j_ref);

    double intermediate = 0.0;
    double final_form = 0.0;
    for (int t = 0; t < horizon; ++t) {
        intermediate += delta[static_cast<std::size_t>(t)] + eps[static_cast<std::size_t>(t)];
        final_form += static_cast<double>(horizon - t) * eps[static_cast<std::size_t>(t)];
        report.per_term.push_back(BoundTerm{t, delta[static_cast<std::size_t>(t)],
                                            eps[static_cast<std::size_t>(t)], horizon - t});
    }
    report.rhs = r_max * final_form;
    report.rhs_intermediate = r_max * intermediate;
    report.holds = report.lhs <= report.rhs + kBoundSlack;
    report.intermediate_holds = report.lhs <= report.rhs_intermediate + kBoundSlack;
    report.dominance_holds = report.rhs_intermediate <= report.rhs + kBoundSlack;
    report.slack = report.rhs - report.lhs;
    return report;
}

BoundReport check_theorem2(const Environment& env, const TransitionKernel& kernel_real,
                           const TransitionKernel& kernel_sim, const Policy& pi) {
    const double j_real = expected_return_exact(env, pi, kernel_real);
    const double j_sim = expected_return_exact(env, pi, kernel_sim);
    const std::vector<double> env_delta =
        env_mismatch_through_horizon(pi, kernel_real, kernel_sim, env);
    const std::vector<double> sim_delta = simulator_error_series(pi, kernel_real, kernel_sim, env);
    const int horizon = env.horizon();
    const double r_max = env.r_max();

    BoundReport report;
    report.name = "sim_gap_bound";
    report.lhs = std::abs(j_real - j_sim);
    report.recurrence_holds = env_delta[0] <= kBoundSlack;

    double intermediate = 0.0;
    double final_form = 0.0;
    for (int t = 0; t < horizon; ++t) {
        const double step_rhs = env_delta[static_cast<std::size_t>(t)] +
                                sim_delta[static_cast<std::size_t>(t)];
        if (env_delta[static_cast<std::size_t>(t) + 1] > step_rhs + kBoundSlack) {
            report.recurrence_holds = false;
        }
        intermediate += step_rhs;
        final_form += static_cast<double>(horizon - t) * sim_delta[static_cast<std::size_t>(t)];
        report.per_term.push_back(BoundTerm{t, env_delta[static_cast<std::size_t>(t)],
                                            sim_delta[static_cast<std::size_t>(t)], horizon - t});
    }
    report.rhs = r_max * final_form;
    report.rhs_intermediate = r_max * intermediate;
    report.holds = report.lhs <= report.rhs + kBoundSlack;
    report.intermediate_holds = report.lhs <= report.rhs_intermediate + kBoundSlack;
    report.dominance_holds = report.rhs_intermediate <= report.rhs + kBoundSlack;
    report.slack = report.rhs - report.lhs;
    return report;
}

std::vector<SweepRow> quadratic_sweep(const std::function<BoundInstance(int)>& family,
                                      const std::vector<int>& horizons, double eps_step) {
    std::vector<SweepRow> rows;
    rows.reserve(horizons.size());
    for (int h : horizons) {
        const BoundInstance inst = family(h);
        if (inst.env.horizon() != h) {
            throw std::invalid_argument("quadratic_sweep: family horizon mismatch");
        }
        const std::vector<double> eps =
            policy_deviation_series(inst.pi, inst.pi_ref, inst.env, inst.kernel);
        for (double e : eps) {
            if (std::abs(e - eps_step) > kBoundSlack) {
                throw std::invalid_argument(
                    "quadratic_sweep: family does not deliver a constant per-step deviation");
            }
        }
        const double j_pi = expected_return_exact(inst.env, inst.pi, inst.kernel);
        const double j_ref = expected_return_exact(inst.env, inst.pi_ref, inst.kernel);

        SweepRow row;
        row.horizon = h;
        row.lhs = std::abs(j_pi - j_ref);
        // Closed form, not a summation: eps * R_max * H(H+1)/2 with the
        // triangular number formed exactly as an integer.
        row.rhs = eps_step * inst.env.r_max() * static_cast<double>(h * (h + 1) / 2);
        row.ratio = row.rhs == 0.0 ? 0.0 : row.lhs / row.rhs;
        rows.push_back(row);
    }
    return rows;
}

} // namespace cirl
