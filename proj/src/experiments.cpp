#include "cirl/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <tuple>

#include "cirl/calibrate.hpp"
#include "cirl/oracle.hpp"
#include "cirl/rollout.hpp"

namespace cirl {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& path) {
    if (!j.is_object()) throw ConfigError(path + ": expected an object");
    for (const auto& [key, value] : j.items()) {
        if (allowed.count(key) == 0) {
            throw ConfigError(path + ": unknown key '" + key + "'");
        }
    }
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(key + ": " + e.what());
    }
}

} // namespace

ExperimentConfig parse_config(const json& j) {
    reject_unknown_keys(j, {"schema_version", "seed", "out", "format", "scenario", "train",
                            "calibrate", "eval"},
                        "config");
    ExperimentConfig config;
    config.seed = get_or<std::uint64_t>(j, "seed", 0);
    config.out = get_or<std::string>(j, "out", "");
    config.format = get_or<std::string>(j, "format", "csv");
    if (config.format != "csv" && config.format != "json") {
        throw ConfigError("config.format: must be 'csv' or 'json'");
    }

    if (!j.contains("scenario")) throw ConfigError("config: missing 'scenario' block");
    const json& s = j.at("scenario");
    ScenarioConfig& sc = config.scenario;
    sc.kind = get_or<std::string>(s, "kind", "");
    if (sc.kind == "random") {
        reject_unknown_keys(s, {"kind", "num_states", "num_actions", "horizon", "num_goals"},
                            "config.scenario");
        sc.num_states = get_or<int>(s, "num_states", sc.num_states);
        sc.num_actions = get_or<int>(s, "num_actions", sc.num_actions);
        sc.horizon = get_or<int>(s, "horizon", sc.horizon);
        sc.num_goals = get_or<int>(s, "num_goals", sc.num_goals);
    } else if (sc.kind == "chain") {
        reject_unknown_keys(s, {"kind", "horizon", "deviation"}, "config.scenario");
        sc.horizon = get_or<int>(s, "horizon", sc.horizon);
        sc.deviation = get_or<double>(s, "deviation", sc.deviation);
    } else if (sc.kind == "sycophancy") {
        reject_unknown_keys(s, {"kind", "horizon", "solve_prob", "behavior_solve_prob", "kappa"},
                            "config.scenario");
        sc.horizon = get_or<int>(s, "horizon", sc.horizon);
        sc.solve_prob = get_or<double>(s, "solve_prob", sc.solve_prob);
        sc.behavior_solve_prob = get_or<double>(s, "behavior_solve_prob", sc.behavior_solve_prob);
        sc.kappa = get_or<double>(s, "kappa", sc.kappa);
    } else if (sc.kind == "compounding") {
        reject_unknown_keys(s, {"kind", "horizon", "eps"}, "config.scenario");
        sc.horizon = get_or<int>(s, "horizon", sc.horizon);
        sc.eps = get_or<double>(s, "eps", sc.eps);
    } else if (sc.kind == "bandit") {
        reject_unknown_keys(s, {"kind"}, "config.scenario");
    } else {
        throw ConfigError("config.scenario.kind: unknown kind '" + sc.kind + "'");
    }

    if (j.contains("train")) {
        const json& t = j.at("train");
        reject_unknown_keys(t, {"group_size", "learning_rate", "clip_low", "clip_high",
                                "iterations", "kl_coefficient", "paradigm"},
                            "config.train");
        config.train.group_size = get_or<int>(t, "group_size", config.train.group_size);
        config.train.learning_rate = get_or<double>(t, "learning_rate", config.train.learning_rate);
        config.train.clip_low = get_or<double>(t, "clip_low", config.train.clip_low);
        config.train.clip_high = get_or<double>(t, "clip_high", config.train.clip_high);
        config.train.iterations = get_or<int>(t, "iterations", config.train.iterations);
        config.train.kl_coefficient =
            get_or<double>(t, "kl_coefficient", config.train.kl_coefficient);
        if (t.contains("paradigm")) {
            try {
                config.train.paradigm = paradigm_from_string(t.at("paradigm").get<std::string>());
            } catch (const std::invalid_argument& e) {
                throw ConfigError(std::string("config.train.paradigm: ") + e.what());
            }
        }
        try {
            config.train.validate();
        } catch (const std::exception& e) {
            throw ConfigError(std::string("config.train: ") + e.what());
        }
    }

    if (j.contains("calibrate")) {
        const json& c = j.at("calibrate");
        reject_unknown_keys(c, {"smoothing", "max_steps", "init_lr", "min_transitions"},
                            "config.calibrate");
        config.calibrate.smoothing = get_or<double>(c, "smoothing", config.calibrate.smoothing);
        config.calibrate.max_steps = get_or<int>(c, "max_steps", config.calibrate.max_steps);
        config.calibrate.init_lr = get_or<double>(c, "init_lr", config.calibrate.init_lr);
        config.calibrate.min_transitions =
            get_or<int>(c, "min_transitions", config.calibrate.min_transitions);
        if (config.calibrate.min_transitions < 1 || config.calibrate.max_steps < 1 ||
            config.calibrate.smoothing < 0.0 || !(config.calibrate.init_lr > 0.0)) {
            throw ConfigError("config.calibrate: values out of range");
        }
    }

    if (j.contains("eval")) {
        const json& e = j.at("eval");
        reject_unknown_keys(e, {"mc_episodes"}, "config.eval");
        config.eval.mc_episodes = get_or<int>(e, "mc_episodes", config.eval.mc_episodes);
        if (config.eval.mc_episodes < 1) throw ConfigError("config.eval.mc_episodes: must be >= 1");
    }
    return config;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    return parse_config(j);
}

Scenario build_scenario(const ScenarioConfig& config, std::uint64_t seed) {
    if (config.kind == "random") {
        return random_mdp(seed, config.num_states, config.num_actions, config.horizon,
                          config.num_goals);
    }
    if (config.kind == "chain") return tutoring_chain(config.horizon, config.deviation);
    if (config.kind == "sycophancy") {
        return sycophantic_sim(
            qa_dialogue(config.horizon, config.solve_prob, config.behavior_solve_prob),
            config.kappa);
    }
    if (config.kind == "compounding") return worst_case_compounding(config.horizon, config.eps);
    if (config.kind == "bandit") return single_turn_bandit();
    throw ConfigError("unknown scenario kind: " + config.kind);
}

namespace {

/// Sizes for certificate instances: small enough that 1,000 exact-DP checks
/// stay well under the runtime budget.
Scenario random_instance(std::uint64_t seed) {
    Rng rng(seed);
    const int num_states = 2 + static_cast<int>(rng.next_below(5));  // 2..6
    const int num_actions = 2 + static_cast<int>(rng.next_below(3)); // 2..4
    const int horizon = 2 + static_cast<int>(rng.next_below(5));     // 2..6
    const int num_goals = 1 + static_cast<int>(rng.next_below(2));   // 1..2
    return random_mdp(rng.next_u64(), num_states, num_actions, horizon, num_goals);
}

std::pair<JointMatrix, JointMatrix> random_joint_pair(std::uint64_t seed) {
    Rng rng(seed);
    const std::size_t nx = 2 + rng.next_below(4); // 2..5
    const std::size_t ny = 2 + rng.next_below(4);
    const auto make = [&](bool maybe_zero_row) {
        JointMatrix m(nx, std::vector<double>(ny));
        double total = 0.0;
        for (auto& row : m) {
            for (double& v : row) {
                v = 0.05 + rng.next_double();
                total += v;
            }
        }
        if (maybe_zero_row && rng.next_double() < 0.25) {
            const std::size_t x = rng.next_below(nx);
            for (double& v : m[x]) total -= v, v = 0.0;
        }
        for (auto& row : m) {
            for (double& v : row) v /= total;
        }
        return m;
    };
    return {make(true), make(true)};
}

} // namespace

VerifyOutcome run_verify(const std::string& kind, int trials, std::uint64_t seed) {
    const std::set<std::string> known{"lemma1", "lemma2", "thm1", "thm2", "all"};
    if (known.count(kind) == 0) throw ConfigError("verify: unknown kind '" + kind + "'");
    if (trials < 1) throw ConfigError("verify: trials must be >= 1");

    const bool want_lemma1 = kind == "lemma1" || kind == "all";
    const bool want_lemma2 = kind == "lemma2" || kind == "all";
    const bool want_thm1 = kind == "thm1" || kind == "all";
    const bool want_thm2 = kind == "thm2" || kind == "all";

    VerifyOutcome outcome;
    for (int i = 0; i < trials; ++i) {
        const std::uint64_t instance_seed = Rng::child_seed(seed, static_cast<std::uint64_t>(i));
        const auto push = [&](const std::string& row_kind, const std::string& variant,
                              BoundReport report) {
            outcome.all_hold = outcome.all_hold && report.all_hold();
            outcome.rows.push_back(VerifyRow{row_kind, i, variant, instance_seed,
                                             std::move(report)});
        };

        if (want_lemma1) {
            const auto [p, q] = random_joint_pair(instance_seed);
            push("lemma1", "a", check_joint_decomposition(p, q));
        }
        if (want_lemma2 || want_thm1 || want_thm2) {
            const Scenario scenario = random_instance(instance_seed);
            // Both policy orderings are certified: the bounds hold for any
            // (pi, pi_ref) pair and regressions in either role should trip.
            if (want_lemma2) {
                push("lemma2", "a",
                     check_error_propagation(scenario.behavior, *scenario.reference, scenario.env,
                                             scenario.kernel_real));
                push("lemma2", "b",
                     check_error_propagation(*scenario.reference, scenario.behavior, scenario.env,
                                             scenario.kernel_real));
            }
            if (want_thm1) {
                push("thm1", "a",
                     check_theorem1(scenario.env, scenario.kernel_real, scenario.behavior,
                                    *scenario.reference));
                push("thm1", "b",
                     check_theorem1(scenario.env, scenario.kernel_real, *scenario.reference,
                                    scenario.behavior));
            }
            if (want_thm2) {
                push("thm2", "a",
                     check_theorem2(scenario.env, scenario.kernel_real, scenario.kernel_sim,
                                    scenario.behavior));
            }
        }
    }
    return outcome;
}

std::vector<ResultRow> run_compare(const ExperimentConfig& config, int seeds) {
    if (seeds < 1) throw ConfigError("compare: seeds must be >= 1");
    const Scenario scenario = build_scenario(config.scenario, config.seed);
    const std::string experiment = "compare";

    std::vector<ResultRow> rows;
    int calibrated_beats_static = 0;
    int calibrated_beats_naive = 0;
    int naive_witness = 0;
    double mean_real[3] = {0.0, 0.0, 0.0};

    for (int s = 0; s < seeds; ++s) {
        const std::uint64_t run_seed = Rng::child_seed(config.seed, static_cast<std::uint64_t>(s));
        const Rng root(run_seed);

        LogDataset logs = generate_logs_by_transitions(
            scenario.env, scenario.behavior, scenario.kernel_real,
            static_cast<std::size_t>(config.calibrate.min_transitions), root.child(0));
        logs.behavior_policy_id = scenario.name + "/behavior";
        const std::vector<CalibrationSample> samples =
            extract_calibration_samples(scenario.env, logs);
        const TransitionKernel kernel_cal =
            count_mle(scenario.env, samples, config.calibrate.smoothing).kernel;

        const Policy init = Policy::uniform(ContextMode::markov, scenario.env.num_states(),
                                            scenario.env.num_actions());
        TrainConfig train = config.train;

        train.paradigm = Paradigm::static_context;
        const Policy pi_static =
            train_static_context(logs, scenario.env, scenario.kernel_real, scenario.behavior,
                                 init, train, root.child(1))
                .first;
        train.paradigm = Paradigm::interactive_naive;
        const Policy pi_naive =
            train_interactive(scenario.env, scenario.kernel_sim, &scenario.kernel_real, init,
                              train, root.child(2))
                .first;
        train.paradigm = Paradigm::interactive_calibrated;
        const Policy pi_calibrated =
            train_interactive(scenario.env, kernel_cal, &scenario.kernel_real, init, train,
                              root.child(3))
                .first;

        const Policy* policies[3] = {&pi_static, &pi_naive, &pi_calibrated};
        const char* names[3] = {"static_context", "interactive_naive", "interactive_calibrated"};
        double j_real[3];
        for (int p = 0; p < 3; ++p) {
            j_real[p] = evaluate(*policies[p], scenario.env, scenario.kernel_real);
            const double j_sim = evaluate(*policies[p], scenario.env, scenario.kernel_sim);
            mean_real[p] += j_real[p];
            rows.push_back(ResultRow::make(experiment, scenario.name, names[p], run_seed,
                                           "j_real", j_real[p]));
            rows.push_back(ResultRow::make(experiment, scenario.name, names[p], run_seed, "j_sim",
                                           j_sim));
            rows.push_back(ResultRow::make(experiment, scenario.name, names[p], run_seed,
                                           "sim_real_gap", j_sim - j_real[p]));
            if (p == 1 && j_sim - j_real[p] > 0.1) ++naive_witness;
        }
        if (j_real[2] > j_real[0]) ++calibrated_beats_static;
        if (j_real[2] > j_real[1]) ++calibrated_beats_naive;
    }

    const double n = static_cast<double>(seeds);
    rows.push_back(ResultRow::make(experiment, scenario.name, "summary", config.seed,
                                   "win_calibrated_over_static", calibrated_beats_static / n));
    rows.push_back(ResultRow::make(experiment, scenario.name, "summary", config.seed,
                                   "win_calibrated_over_naive", calibrated_beats_naive / n));
    rows.push_back(ResultRow::make(experiment, scenario.name, "summary", config.seed,
                                   "naive_hacking_witness_fraction", naive_witness / n));
    rows.push_back(ResultRow::make(experiment, scenario.name, "summary", config.seed,
                                   "mean_j_real_static", mean_real[0] / n));
    rows.push_back(ResultRow::make(experiment, scenario.name, "summary", config.seed,
                                   "mean_j_real_naive", mean_real[1] / n));
    rows.push_back(ResultRow::make(experiment, scenario.name, "summary", config.seed,
                                   "mean_j_real_calibrated", mean_real[2] / n));
    return rows;
}

CalibrationReport run_calibrate(const ExperimentConfig& config) {
    const Scenario scenario = build_scenario(config.scenario, config.seed);
    const Rng root(config.seed);

    LogDataset logs = generate_logs_by_transitions(
        scenario.env, scenario.behavior, scenario.kernel_real,
        static_cast<std::size_t>(config.calibrate.min_transitions), root.child(0));
    logs.behavior_policy_id = scenario.name + "/behavior";
    const std::vector<CalibrationSample> samples = extract_calibration_samples(scenario.env, logs);

    CalibrationReport report =
        calibrate_sgd(scenario.env, KernelParams::zeros(scenario.env), samples,
                      config.calibrate.max_steps, config.calibrate.init_lr);

    const SimGapReport before =
        sim_gap_report(scenario.kernel_real, scenario.kernel_sim, scenario.behavior, scenario.env);
    const SimGapReport after =
        sim_gap_report(scenario.kernel_real, report.kernel, scenario.behavior, scenario.env);
    report.delta_before = before.delta;
    report.delta_after = after.delta;
    report.bound_before = before.bound;
    report.bound_after = after.bound;
    return report;
}

std::vector<SweepRow> run_sweep(const std::string& family, const std::vector<int>& horizons,
                                double eps) {
    if (family != "chain" && family != "compounding") {
        throw ConfigError("sweep-horizon: unknown family '" + family + "'");
    }
    if (horizons.empty()) throw ConfigError("sweep-horizon: no horizons given");
    for (int h : horizons) {
        if (h < 2) throw ConfigError("sweep-horizon: horizons must be >= 2");
    }
    if (!(eps > 0.0 && eps <= 0.5)) {
        throw ConfigError("sweep-horizon: eps must be in (0, 0.5]");
    }
    const auto make = [eps](int h) {
        const Scenario scenario = worst_case_compounding(h, eps);
        return scenario.bound_instance();
    };
    return quadratic_sweep(make, horizons, 2.0 * eps);
}

TrainOutcome run_train(const ExperimentConfig& config) {
    const Scenario scenario = build_scenario(config.scenario, config.seed);
    const Rng root(config.seed);
    const Policy init =
        Policy::uniform(ContextMode::markov, scenario.env.num_states(), scenario.env.num_actions());

    const auto make_logs = [&]() {
        LogDataset logs = generate_logs_by_transitions(
            scenario.env, scenario.behavior, scenario.kernel_real,
            static_cast<std::size_t>(config.calibrate.min_transitions), root.child(0));
        logs.behavior_policy_id = scenario.name + "/behavior";
        return logs;
    };

    TrainOutcome outcome{init, {}, scenario, 0.0, {}};
    switch (config.train.paradigm) {
        case Paradigm::static_context: {
            auto [policy, curve] =
                train_static_context(make_logs(), scenario.env, scenario.kernel_real,
                                     scenario.behavior, init, config.train, root.child(1));
            outcome.policy = std::move(policy);
            outcome.curve = std::move(curve);
            break;
        }
        case Paradigm::interactive_naive: {
            auto [policy, curve] =
                train_interactive(scenario.env, scenario.kernel_sim, &scenario.kernel_real, init,
                                  config.train, root.child(1));
            outcome.policy = std::move(policy);
            outcome.curve = std::move(curve);
            break;
        }
        case Paradigm::interactive_calibrated: {
            const TransitionKernel kernel_cal =
                count_mle(scenario.env, extract_calibration_samples(scenario.env, make_logs()),
                          config.calibrate.smoothing)
                    .kernel;
            auto [policy, curve] = train_interactive(scenario.env, kernel_cal,
                                                     &scenario.kernel_real, init, config.train,
                                                     root.child(1));
            outcome.policy = std::move(policy);
            outcome.curve = std::move(curve);
            break;
        }
    }
    outcome.j_real_exact = evaluate(outcome.policy, scenario.env, scenario.kernel_real);
    outcome.j_real_mc = expected_return_mc(scenario.env, outcome.policy, scenario.kernel_real,
                                           config.eval.mc_episodes, root.child(2));
    return outcome;
}

std::vector<ReportRow> summarize_results(const std::vector<ResultRow>& rows) {
    std::map<std::tuple<std::string, std::string, std::string, std::string>, ReportRow> groups;
    for (const ResultRow& row : rows) {
        const auto key = std::make_tuple(row.experiment, row.scenario, row.paradigm, row.metric);
        auto it = groups.find(key);
        if (it == groups.end()) {
            ReportRow summary;
            summary.experiment = row.experiment;
            summary.scenario = row.scenario;
            summary.paradigm = row.paradigm;
            summary.metric = row.metric;
            summary.count = 1;
            summary.mean = row.value;
            summary.min = row.value;
            summary.max = row.value;
            groups.emplace(key, summary);
        } else {
            ReportRow& summary = it->second;
            summary.count += 1;
            summary.mean += row.value;
            summary.min = std::min(summary.min, row.value);
            summary.max = std::max(summary.max, row.value);
        }
    }
    std::vector<ReportRow> result;
    result.reserve(groups.size());
    for (auto& [key, summary] : groups) {
        summary.mean /= static_cast<double>(summary.count);
        result.push_back(summary);
    }
    return result;
}

void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows) {
    out << "schema_version,experiment,scenario,paradigm,metric,count,mean,min,max\n";
    for (const ReportRow& row : rows) {
        out << kSchemaVersion << ',' << row.experiment << ',' << row.scenario << ','
            << row.paradigm << ',' << row.metric << ',' << row.count << ','
            << format_double9(row.mean) << ',' << format_double9(row.min) << ','
            << format_double9(row.max) << '\n';
    }
}

} // namespace cirl
