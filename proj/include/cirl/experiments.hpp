#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "cirl/oracle.hpp"
#include "cirl/scenarios.hpp"
#include "cirl/serialize.hpp"
#include "cirl/train.hpp"

namespace cirl {

/// Configuration/usage error surfaced to the CLI as exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct ScenarioConfig {
    std::string kind = "random"; // random | chain | sycophancy | compounding | bandit
    int num_states = 4;
    int num_actions = 3;
    int horizon = 4;
    int num_goals = 1;
    double deviation = 0.1;
    double solve_prob = 0.3;
    double behavior_solve_prob = 0.55;
    double kappa = 0.5;
    double eps = 0.1;
};

struct CalibrateConfig {
    double smoothing = 1.0;
    int max_steps = 2000;
    double init_lr = 1.0;
    int min_transitions = 10000;
};

struct EvalConfig {
    int mc_episodes = 100000;
};

struct ExperimentConfig {
    std::uint64_t seed = 0;
    std::string out;
    std::string format = "csv"; // csv | json
    ScenarioConfig scenario;
    TrainConfig train;
    CalibrateConfig calibrate;
    EvalConfig eval;
};

/// Strict parse: unknown keys anywhere are hard errors (reported with their
/// dotted path), as are values outside the documented ranges.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config_file(const std::string& path);

Scenario build_scenario(const ScenarioConfig& config, std::uint64_t seed);

/// Certificate runner: `trials` random instances per requested kind, one row
/// per evaluated certificate. Returns the rows and whether every one held.
struct VerifyOutcome {
    std::vector<VerifyRow> rows;
    bool all_hold = true;
};
VerifyOutcome run_verify(const std::string& kind, int trials, std::uint64_t seed);

/// Paradigm comparison: trains all three paradigms per seed, evaluates
/// J_real / J_sim / their gap exactly, and appends summary rows with win
/// fractions.
std::vector<ResultRow> run_compare(const ExperimentConfig& config, int seeds);

/// Phase-1 driver: generates logs, fits the simulator (closed form and
/// gradient descent), and reports the delta series before/after.
CalibrationReport run_calibrate(const ExperimentConfig& config);

/// Growth-order sweep rows for the compounding chain family. `eps` is the
/// family's deviation probability; the per-step deviation it induces is
/// 2 * eps.
std::vector<SweepRow> run_sweep(const std::string& family, const std::vector<int>& horizons,
                                double eps);

/// Single-paradigm training run per the config; returns the final policy,
/// its learning curve, and a Monte-Carlo cross-check of the final exact
/// real-kernel return (eval.mc_episodes episodes).
struct TrainOutcome {
    Policy policy;
    LearningCurve curve;
    Scenario scenario;
    double j_real_exact = 0.0;
    McEstimate j_real_mc;
};
TrainOutcome run_train(const ExperimentConfig& config);

/// Aggregates a results file: one row per (experiment, scenario, paradigm,
/// metric) with count/mean/min/max.
struct ReportRow {
    std::string experiment;
    std::string scenario;
    std::string paradigm;
    std::string metric;
    int count = 0;
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
};
std::vector<ReportRow> summarize_results(const std::vector<ResultRow>& rows);
void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows);

} // namespace cirl
