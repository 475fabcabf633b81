// Acceptance harness: runs every shipped guarantee end to end and prints one
// PASS/FAIL line per criterion. Exits nonzero if any criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cirl/bounds.hpp"
#include "cirl/calibrate.hpp"
#include "cirl/experiments.hpp"
#include "cirl/oracle.hpp"
#include "cirl/rollout.hpp"
#include "cirl/scenarios.hpp"
#include "cirl/serialize.hpp"
#include "cirl/train.hpp"

using namespace cirl;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& label, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", criterion, label.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double seconds_since(const std::chrono::steady_clock::time_point& start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

// 1. Policy-shift certificate: 1,000 random instances, exact DP both sides,
//    zero violations, under 60 s.
void criterion_1() {
    const auto start = std::chrono::steady_clock::now();
    const VerifyOutcome outcome = run_verify("thm1", 1000, 20250807);
    const double elapsed = seconds_since(start);
    int violations = 0;
    for (const VerifyRow& row : outcome.rows) {
        if (!row.report.all_hold()) ++violations;
    }
    std::ostringstream detail;
    detail << outcome.rows.size() << " certificates, " << violations << " violations, "
           << format_double9(elapsed) << " s";
    report(1, "policy-shift return bound on 1000 random instances",
           violations == 0 && elapsed < 60.0, detail.str());
}

// 2. Sim-gap certificate at the same scale, including the marginal-drift
//    recurrence at every step of every instance.
void criterion_2() {
    const VerifyOutcome outcome = run_verify("thm2", 1000, 20250808);
    int violations = 0;
    int recurrence_failures = 0;
    for (const VerifyRow& row : outcome.rows) {
        if (!row.report.holds || !row.report.intermediate_holds || !row.report.dominance_holds) {
            ++violations;
        }
        if (!row.report.recurrence_holds) ++recurrence_failures;
    }
    std::ostringstream detail;
    detail << outcome.rows.size() << " certificates, " << violations << " violations, "
           << recurrence_failures << " recurrence failures";
    report(2, "sim-gap return bound and drift recurrence on 1000 random instances",
           violations == 0 && recurrence_failures == 0, detail.str());
}

// 3. Decomposition and propagation lemmas, 1,000 instances each.
void criterion_3() {
    const VerifyOutcome lemma1 = run_verify("lemma1", 1000, 20250809);
    const VerifyOutcome lemma2 = run_verify("lemma2", 1000, 20250810);
    int violations = 0;
    for (const VerifyRow& row : lemma1.rows) {
        if (!row.report.all_hold()) ++violations;
    }
    for (const VerifyRow& row : lemma2.rows) {
        if (!row.report.all_hold()) ++violations;
    }
    std::ostringstream detail;
    detail << lemma1.rows.size() + lemma2.rows.size() << " certificates, " << violations
           << " violations";
    report(3, "joint-decomposition and error-propagation lemmas", violations == 0, detail.str());
}

// 4. Quadratic compounding sweep: bit-level closed form, ratio <= 1, and
//    superlinear growth of the exact gap.
void criterion_4() {
    const auto family = [](int h) { return worst_case_compounding(h, 0.1).bound_instance(); };
    const std::vector<int> horizons{2, 4, 8, 16};
    const std::vector<SweepRow> rows = quadratic_sweep(family, horizons, 2.0 * 0.1);

    bool closed_form = true;
    bool ratio_ok = true;
    for (const SweepRow& row : rows) {
        const double r_max = 1.0;
        const double expected =
            0.2 * r_max * static_cast<double>(row.horizon * (row.horizon + 1) / 2);
        if (row.rhs != expected) closed_form = false; // bit-level equality
        if (row.ratio > 1.0 + kBoundSlack) ratio_ok = false;
    }
    bool superlinear = true;
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        if (!(rows[i + 1].lhs > 2.0 * rows[i].lhs)) superlinear = false;
    }
    std::ostringstream detail;
    detail << "rhs(16)=" << format_double9(rows[3].rhs) << ", lhs growth "
           << format_double9(rows[1].lhs / rows[0].lhs) << "x/"
           << format_double9(rows[2].lhs / rows[1].lhs) << "x/"
           << format_double9(rows[3].lhs / rows[2].lhs) << "x";
    report(4, "quadratic compounding sweep H in {2,4,8,16}",
           closed_form && ratio_ok && superlinear, detail.str());
}

// 5. Chain numeric anchor from the exact-DP oracle.
void criterion_5() {
    const Scenario chain = tutoring_chain(4, 0.1);
    const double j_ref = expected_return_exact(chain.env, *chain.reference, chain.kernel_real);
    const double j_pi = expected_return_exact(chain.env, chain.behavior, chain.kernel_real);
    const BoundReport bound =
        check_theorem1(chain.env, chain.kernel_real, chain.behavior, *chain.reference);
    const bool pass = std::abs(j_ref - 4.0) <= 1e-9 && std::abs(j_pi - 3.439) <= 1e-9 &&
                      std::abs(bound.lhs - 0.561) <= 1e-9 && std::abs(bound.rhs - 2.0) <= 1e-9 &&
                      bound.all_hold();
    std::ostringstream detail;
    detail << "J(ref)=" << format_double9(j_ref) << ", J(pi)=" << format_double9(j_pi)
           << ", gap=" << format_double9(bound.lhs) << " <= rhs=" << format_double9(bound.rhs);
    report(5, "chain anchor H=4, deviation 0.1", pass, detail.str());
}

// 6. Analytic gradients against central finite differences.
void criterion_6() {
    // Log-prob gradient, 150 probes at relative tolerance 1e-5.
    Rng rng(424242);
    double worst_logp = 0.0;
    for (int probe = 0; probe < 150; ++probe) {
        const int num_actions = 2 + static_cast<int>(rng.next_below(4));
        const Policy policy =
            Policy::random_gaussian(ContextMode::markov, 1, num_actions, rng, 1.5);
        const int action =
            static_cast<int>(rng.next_below(static_cast<std::uint64_t>(num_actions)));
        const std::vector<double> analytic = log_prob_gradient(policy, 0, action);
        for (int j = 0; j < num_actions; ++j) {
            auto up = policy.logits();
            auto down = policy.logits();
            up[0][static_cast<std::size_t>(j)] += 1e-6;
            down[0][static_cast<std::size_t>(j)] -= 1e-6;
            const double fd = (Policy(ContextMode::markov, up).log_prob(0, action) -
                               Policy(ContextMode::markov, down).log_prob(0, action)) /
                              2e-6;
            worst_logp = std::max(worst_logp,
                                  std::abs(analytic[static_cast<std::size_t>(j)] - fd) /
                                      std::max(std::abs(fd), 1e-3));
        }
    }

    // Clipped-surrogate gradient, 120 random two-state instances at 1e-4.
    TrainConfig config;
    config.group_size = 4;
    double worst_surrogate = 0.0;
    int probes = 0;
    while (probes < 120) {
        const Policy sampler = Policy::random_gaussian(ContextMode::markov, 2, 3, rng, 0.5);
        std::vector<Trajectory> steps;
        std::vector<double> rewards;
        for (int k = 0; k < 4; ++k) {
            Trajectory step;
            step.goal_id = 0;
            const int state = static_cast<int>(rng.next_below(2));
            step.states = {state, state};
            step.actions = {static_cast<int>(rng.next_below(3))};
            steps.push_back(step);
            rewards.push_back(rng.next_double());
        }
        const GroupBatch batch = GroupBatch::create(0, 0, std::move(steps), rewards, sampler);
        auto displaced_logits = sampler.logits();
        for (auto& row : displaced_logits) {
            for (double& v : row) v += 0.05 * rng.next_gaussian();
        }
        const Policy displaced(ContextMode::markov, displaced_logits);
        bool near_boundary = false;
        for (std::size_t k = 0; k < batch.trajectories.size(); ++k) {
            const Trajectory& step = batch.trajectories[k];
            const double rho = std::exp(displaced.log_prob(step.states[0], step.actions[0]) -
                                        sampler.log_prob(step.states[0], step.actions[0]));
            if (std::abs(rho - (1.0 - config.clip_low)) < 1e-3 ||
                std::abs(rho - (1.0 + config.clip_high)) < 1e-3) {
                near_boundary = true;
            }
        }
        if (near_boundary) continue;
        const auto grad = grpo_gradient(displaced, {batch}, config);
        for (int s = 0; s < 2; ++s) {
            for (int a = 0; a < 3; ++a) {
                auto up = displaced.logits();
                auto down = displaced.logits();
                up[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)] += 1e-6;
                down[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)] -= 1e-6;
                const double fd =
                    (grpo_surrogate(Policy(ContextMode::markov, up), {batch}, config) -
                     grpo_surrogate(Policy(ContextMode::markov, down), {batch}, config)) /
                    2e-6;
                const double analytic =
                    grad[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
                worst_surrogate = std::max(
                    worst_surrogate,
                    std::abs(analytic - fd) / std::max({std::abs(fd), std::abs(analytic), 1e-2}));
            }
        }
        ++probes;
    }

    std::ostringstream detail;
    detail << "log-prob worst rel err " << format_double9(worst_logp)
           << " (tol 1e-5), surrogate " << format_double9(worst_surrogate) << " (tol 1e-4)";
    report(6, "gradient checks vs central finite differences",
           worst_logp < 1e-5 && worst_surrogate < 1e-4, detail.str());
}

// 7. Single-turn bandit sanity: optimal-action probability > 0.95 within 200
//    iterations at lr 0.5, G = 16, in under 10 s.
void criterion_7() {
    const auto start = std::chrono::steady_clock::now();
    const Scenario bandit = single_turn_bandit();
    TrainConfig config;
    config.group_size = 16;
    config.learning_rate = 0.5;
    config.iterations = 200;
    const auto [policy, curve] =
        train_interactive(bandit.env, bandit.kernel_real, nullptr,
                          Policy::uniform(ContextMode::markov, 3, 2), config, Rng(7));
    const double p_optimal = policy.action_probabilities(0)[0];
    const double elapsed = seconds_since(start);
    std::ostringstream detail;
    detail << "P(optimal)=" << format_double9(p_optimal) << " after " << curve.size()
           << " iterations, " << format_double9(elapsed) << " s";
    report(7, "bandit optimizer sanity", p_optimal > 0.95 && elapsed < 10.0, detail.str());
}

// 8. Calibration oracle equivalence: gradient fit within row-TV 1e-3 of the
//    closed form, exact recovery under proportional sampling, monotone NLL.
void criterion_8() {
    const Scenario scenario = random_mdp(5150, 3, 2, 4, 1);
    const LogDataset logs = generate_logs_by_transitions(scenario.env, scenario.behavior,
                                                         scenario.kernel_real, 5000, Rng(61));
    const std::vector<CalibrationSample> samples =
        extract_calibration_samples(scenario.env, logs);
    Rng init_rng(62);
    const CalibrationReport fit =
        calibrate_sgd(scenario.env, KernelParams::random_gaussian(scenario.env, init_rng),
                      samples, 2000, 1.0);
    bool monotone = true;
    for (std::size_t i = 0; i + 1 < fit.nll_curve.size(); ++i) {
        if (fit.nll_curve[i + 1] > fit.nll_curve[i]) monotone = false;
    }

    // Exact recovery: the QA kernel's rows are multiples of 1/20.
    const Scenario qa = qa_dialogue(4);
    const CountMleResult recovered =
        count_mle(qa.env, proportional_samples(qa.env, qa.kernel_real, 20), 0.0);
    double recovery_error = 0.0;
    for (int s = 0; s < qa.env.num_states(); ++s) {
        for (int a = 0; a < qa.env.num_actions(); ++a) {
            for (int next = 0; next < qa.env.num_states(); ++next) {
                recovery_error = std::max(
                    recovery_error,
                    std::abs(recovered.kernel.row(0, s, a)[static_cast<std::size_t>(next)] -
                             qa.kernel_real.row(0, s, a)[static_cast<std::size_t>(next)]));
            }
        }
    }

    std::ostringstream detail;
    detail << "row-TV to count-MLE " << format_double9(fit.max_row_tv_to_count_mle)
           << " (tol 1e-3), exact-recovery error " << format_double9(recovery_error)
           << ", NLL monotone=" << (monotone ? "yes" : "no");
    report(8, "calibration oracle equivalence",
           fit.max_row_tv_to_count_mle < 1e-3 && recovery_error == 0.0 && monotone,
           detail.str());
}

// 9. Sim-gap reduction: post-calibration weighted delta sum at or below 10%
//    of the naive simulator's, with 10,000 log transitions.
void criterion_9() {
    const Scenario qa = sycophantic_sim(qa_dialogue(4), 0.5);
    const LogDataset logs =
        generate_logs_by_transitions(qa.env, qa.behavior, qa.kernel_real, 10000, Rng(919));
    const TransitionKernel fitted =
        count_mle(qa.env, extract_calibration_samples(qa.env, logs), 0.0).kernel;
    const BoundReport before =
        check_theorem2(qa.env, qa.kernel_real, qa.kernel_sim, qa.behavior);
    const BoundReport after = check_theorem2(qa.env, qa.kernel_real, fitted, qa.behavior);
    std::ostringstream detail;
    detail << "weighted delta rhs " << format_double9(before.rhs) << " -> "
           << format_double9(after.rhs);
    report(9, "calibration cuts the weighted sim-gap bound to <= 10%",
           after.rhs <= 0.1 * before.rhs && before.rhs > 0.0, detail.str());
}

// 10. Paradigm ordering over 20 committed seeds on the sycophancy and chain
//     scenarios, with the reward-hacking witness, under 5 minutes.
void criterion_10() {
    const auto start = std::chrono::steady_clock::now();

    ExperimentConfig syco;
    syco.seed = 7;
    syco.scenario.kind = "sycophancy";
    syco.scenario.horizon = 4;
    syco.scenario.kappa = 0.5;
    syco.scenario.behavior_solve_prob = 0.45;
    syco.train.group_size = 16;
    syco.train.learning_rate = 0.3;
    syco.train.iterations = 400;
    syco.calibrate.min_transitions = 10000;

    ExperimentConfig chain;
    chain.seed = 7;
    chain.scenario.kind = "chain";
    chain.scenario.horizon = 10;
    chain.scenario.deviation = 0.4;
    chain.train.group_size = 16;
    chain.train.learning_rate = 0.25;
    chain.train.iterations = 400;
    chain.calibrate.min_transitions = 10000;

    const auto metric = [](const std::vector<ResultRow>& rows, const std::string& name) {
        for (const ResultRow& row : rows) {
            if (row.paradigm == "summary" && row.metric == name) return row.value;
        }
        return -1.0;
    };

    const std::vector<ResultRow> syco_rows = run_compare(syco, 20);
    const std::vector<ResultRow> chain_rows = run_compare(chain, 20);
    const double elapsed = seconds_since(start);

    const double syco_vs_static = metric(syco_rows, "win_calibrated_over_static");
    const double syco_vs_naive = metric(syco_rows, "win_calibrated_over_naive");
    const double witness = metric(syco_rows, "naive_hacking_witness_fraction");
    const double chain_vs_static = metric(chain_rows, "win_calibrated_over_static");

    // The calibrated-vs-naive comparison is meaningful only where the naive
    // simulator actually diverges from reality (the sycophancy scenario); on
    // the chain both interactive paradigms already train on real dynamics.
    const bool pass = syco_vs_static >= 0.8 && syco_vs_naive >= 0.8 &&
                      chain_vs_static >= 0.8 && witness == 1.0 && elapsed < 300.0;
    std::ostringstream detail;
    detail << "sycophancy: cal>static " << format_double9(syco_vs_static) << ", cal>naive "
           << format_double9(syco_vs_naive) << ", witness " << format_double9(witness)
           << "; chain: cal>static " << format_double9(chain_vs_static) << "; "
           << format_double9(elapsed) << " s";
    report(10, "paradigm ordering over 20 committed seeds", pass, detail.str());
}

// 11. Byte-identical CLI outputs for a fixed (config, seed) across runs.
void criterion_11() {
#ifndef CIRL_CLI_PATH
    report(11, "CLI reproducibility", false, "CLI path not configured");
#else
    const std::string cli = CIRL_CLI_PATH;
    const std::string dir = "acceptance_tmp";
    if (std::system(("rm -rf " + dir + " && mkdir -p " + dir).c_str()) != 0) {
        report(11, "CLI reproducibility", false, "cannot prepare scratch directory");
        return;
    }

    const std::string config_path = dir + "/config.json";
    {
        std::ofstream config(config_path);
        config << R"({
  "seed": 99,
  "out": ")" << dir
               << R"(/run.csv",
  "format": "csv",
  "scenario": {"kind": "sycophancy", "horizon": 4, "kappa": 0.5},
  "train": {"group_size": 8, "learning_rate": 0.3, "iterations": 60},
  "calibrate": {"smoothing": 1.0, "min_transitions": 2000}
})";
    }

    bool pass = true;
    std::ostringstream detail;

    const std::string v1 = dir + "/v1.csv";
    const std::string v2 = dir + "/v2.csv";
    int rc1 = std::system((cli + " --seed 5 --out " + v1 +
                           " verify --kind all --trials 50 >/dev/null")
                              .c_str());
    int rc2 = std::system((cli + " --seed 5 --out " + v2 +
                           " verify --kind all --trials 50 >/dev/null")
                              .c_str());
    if (rc1 != 0 || rc2 != 0 || read_file(v1) != read_file(v2) || read_file(v1).empty()) {
        pass = false;
        detail << "verify outputs differ; ";
    }

    const std::string c1 = dir + "/c1.csv";
    const std::string c2 = dir + "/c2.csv";
    rc1 = std::system((cli + " --config " + config_path + " --out " + c1 +
                       " compare --seeds 3 >/dev/null")
                          .c_str());
    rc2 = std::system((cli + " --config " + config_path + " --out " + c2 +
                       " compare --seeds 3 >/dev/null")
                          .c_str());
    if (rc1 != 0 || rc2 != 0 || read_file(c1) != read_file(c2) || read_file(c1).empty()) {
        pass = false;
        detail << "compare outputs differ; ";
    }

    const std::string k1 = dir + "/k1.json";
    const std::string k2 = dir + "/k2.json";
    rc1 = std::system((cli + " --config " + config_path + " --out " + k1 +
                       " calibrate >/dev/null")
                          .c_str());
    rc2 = std::system((cli + " --config " + config_path + " --out " + k2 +
                       " calibrate >/dev/null")
                          .c_str());
    if (rc1 != 0 || rc2 != 0 || read_file(k1) != read_file(k2) || read_file(k1).empty()) {
        pass = false;
        detail << "calibrate outputs differ; ";
    }

    const std::string w1 = dir + "/w1.csv";
    const std::string w2 = dir + "/w2.csv";
    rc1 = std::system((cli + " --out " + w1 + " sweep-horizon --family compounding "
                             "--horizons 2 4 8 16 --eps 0.1 >/dev/null")
                          .c_str());
    rc2 = std::system((cli + " --out " + w2 + " sweep-horizon --family compounding "
                             "--horizons 2 4 8 16 --eps 0.1 >/dev/null")
                          .c_str());
    if (rc1 != 0 || rc2 != 0 || read_file(w1) != read_file(w2) || read_file(w1).empty()) {
        pass = false;
        detail << "sweep outputs differ; ";
    }

    // Usage-error contract: zero trials exits with code 2.
    const int usage = std::system(
        (cli + " --out " + dir + "/x.csv verify --trials 0 >/dev/null 2>&1").c_str());
    if (WEXITSTATUS(usage) != 2) {
        pass = false;
        detail << "usage exit code " << WEXITSTATUS(usage) << " != 2; ";
    }

    if (pass) detail << "verify/compare/calibrate/sweep byte-identical, usage exit 2";
    report(11, "CLI reproducibility and exit-status contract", pass, detail.str());
#endif
}

} // namespace

int main() {
    std::printf("acceptance suite\n");
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    criterion_11();
    if (g_failures == 0) {
        std::printf("all criteria passed\n");
        return 0;
    }
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
}
