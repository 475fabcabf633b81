#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cirl/experiments.hpp"
#include "cirl/oracle.hpp"
#include "cirl/serialize.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitViolation = 1;
constexpr int kExitUsage = 2;

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw cirl::ConfigError("cannot open output file: " + path);
    return out;
}

struct GlobalOptions {
    std::string config_path;
    std::string out;
    std::string format = "csv";
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool out_set = false;
    bool format_set = false;
};

/// Config file first, then command-line overrides.
cirl::ExperimentConfig resolve_config(const GlobalOptions& options) {
    cirl::ExperimentConfig config;
    if (!options.config_path.empty()) {
        config = cirl::load_config_file(options.config_path);
    } else {
        throw cirl::ConfigError("this subcommand requires --config");
    }
    if (options.seed_set) config.seed = options.seed;
    if (options.out_set) config.out = options.out;
    if (options.format_set) config.format = options.format;
    if (config.out.empty()) throw cirl::ConfigError("no output path (--out or config.out)");
    return config;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"cirl: exact certificates and trainers for simulator-driven policy "
                 "optimization on finite dialogue MDPs"};
    app.require_subcommand(1);

    GlobalOptions global;
    app.add_option("--config", global.config_path, "experiment config file (JSON)");
    app.add_option("--seed", global.seed, "root seed (overrides config)")
        ->each([&global](const std::string&) { global.seed_set = true; });
    app.add_option("--out", global.out, "output file path (overrides config)")
        ->each([&global](const std::string&) { global.out_set = true; });
    app.add_option("--format", global.format, "output format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}))
        ->each([&global](const std::string&) { global.format_set = true; });

    // verify: certificate sweeps over random instances.
    auto* verify = app.add_subcommand("verify", "run inequality certificates on random instances");
    std::string verify_kind = "all";
    int verify_trials = 1000;
    verify->add_option("--kind", verify_kind, "lemma1|lemma2|thm1|thm2|all")
        ->check(CLI::IsMember({"lemma1", "lemma2", "thm1", "thm2", "all"}));
    verify->add_option("--trials", verify_trials, "number of random instances");

    // compare: the three training paradigms on one scenario.
    auto* compare = app.add_subcommand("compare", "train all paradigms and compare exact returns");
    int compare_seeds = 20;
    compare->add_option("--seeds", compare_seeds, "number of training seeds");

    // calibrate: Phase-1 simulator fitting report.
    auto* calibrate = app.add_subcommand("calibrate", "fit the simulator kernel to logs");

    // sweep-horizon: growth-order table.
    auto* sweep = app.add_subcommand("sweep-horizon", "bound growth across horizons");
    std::string sweep_family = "compounding";
    std::vector<int> sweep_horizons{2, 4, 8, 16};
    double sweep_eps = 0.1;
    sweep->add_option("--family", sweep_family, "chain|compounding");
    sweep->add_option("--horizons", sweep_horizons, "horizons to evaluate");
    sweep->add_option("--eps", sweep_eps, "per-step deviation probability of the family");

    // train: one paradigm, learning curve + final policy.
    auto* train = app.add_subcommand("train", "single-paradigm training run");

    // report: summarize a results file.
    auto* report = app.add_subcommand("report", "summarize a results file");
    std::string report_in;
    report->add_option("--in", report_in, "results file to summarize")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (verify->parsed()) {
            if (verify_trials < 1) throw cirl::ConfigError("verify: --trials must be >= 1");
            if (!global.out_set) throw cirl::ConfigError("verify: --out is required");
            const cirl::VerifyOutcome outcome =
                cirl::run_verify(verify_kind, verify_trials, global.seed);
            auto out = open_output(global.out);
            if (global.format == "csv") {
                cirl::write_verify_csv(out, outcome.rows);
            } else {
                cirl::write_verify_json(out, outcome.rows);
            }
            std::cout << "verify kind=" << verify_kind << " trials=" << verify_trials
                      << " rows=" << outcome.rows.size()
                      << (outcome.all_hold ? " all-hold" : " VIOLATIONS") << "\n";
            return outcome.all_hold ? kExitOk : kExitViolation;
        }

        if (compare->parsed()) {
            const cirl::ExperimentConfig config = resolve_config(global);
            if (compare_seeds < 1) throw cirl::ConfigError("compare: --seeds must be >= 1");
            const std::vector<cirl::ResultRow> rows = cirl::run_compare(config, compare_seeds);
            auto out = open_output(config.out);
            if (config.format == "csv") {
                cirl::write_results_csv(out, rows);
            } else {
                cirl::write_results_json(out, rows);
            }
            std::cout << "compare seeds=" << compare_seeds << " rows=" << rows.size() << "\n";
            return kExitOk;
        }

        if (calibrate->parsed()) {
            const cirl::ExperimentConfig config = resolve_config(global);
            const cirl::CalibrationReport result = cirl::run_calibrate(config);
            auto out = open_output(config.out);
            out << cirl::calibration_report_to_json(result).dump(2) << '\n';
            std::cout << "calibrate steps=" << result.steps_taken
                      << " nll=" << result.nll_curve.back()
                      << " max_row_tv=" << result.max_row_tv_to_count_mle << "\n";
            return kExitOk;
        }

        if (sweep->parsed()) {
            if (!global.out_set) throw cirl::ConfigError("sweep-horizon: --out is required");
            const std::vector<cirl::SweepRow> rows =
                cirl::run_sweep(sweep_family, sweep_horizons, sweep_eps);
            auto out = open_output(global.out);
            if (global.format == "csv") {
                cirl::write_sweep_csv(out, rows);
            } else {
                cirl::write_sweep_json(out, rows);
            }
            for (const cirl::SweepRow& row : rows) {
                if (row.ratio > 1.0 + cirl::kBoundSlack) {
                    std::cout << "sweep VIOLATION at H=" << row.horizon << "\n";
                    return kExitViolation;
                }
            }
            std::cout << "sweep-horizon rows=" << rows.size() << " all ratios <= 1\n";
            return kExitOk;
        }

        if (train->parsed()) {
            const cirl::ExperimentConfig config = resolve_config(global);
            const cirl::TrainOutcome outcome = cirl::run_train(config);
            auto out = open_output(config.out);
            if (config.format == "csv") {
                cirl::write_curve_csv(out, outcome.curve);
            } else {
                cirl::write_curve_json(out, outcome.curve);
            }
            auto policy_out = open_output(config.out + ".policy.json");
            policy_out << cirl::policy_to_json(outcome.policy).dump(2) << '\n';
            std::cout << "train paradigm=" << cirl::to_string(config.train.paradigm)
                      << " iterations=" << outcome.curve.size()
                      << " j_real=" << outcome.j_real_exact << " mc_check="
                      << outcome.j_real_mc.mean << "+-" << outcome.j_real_mc.std_error << "\n";
            return kExitOk;
        }

        if (report->parsed()) {
            std::ifstream in(report_in, std::ios::binary);
            if (!in) throw cirl::ConfigError("cannot open results file: " + report_in);
            std::vector<cirl::ResultRow> rows;
            if (global.format == "json" || report_in.ends_with(".json")) {
                rows = cirl::read_results_json(in);
            } else {
                rows = cirl::read_results_csv(in);
            }
            const std::vector<cirl::ReportRow> summary = cirl::summarize_results(rows);
            if (global.out_set) {
                auto out = open_output(global.out);
                cirl::write_report_csv(out, summary);
            } else {
                cirl::write_report_csv(std::cout, summary);
            }
            return kExitOk;
        }
    } catch (const cirl::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitViolation;
    }
    return kExitUsage;
}
