#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "cirl/bounds.hpp"
#include "cirl/calibrate.hpp"
#include "cirl/core.hpp"
#include "cirl/policy.hpp"
#include "cirl/rollout.hpp"
#include "cirl/scenarios.hpp"
#include "cirl/train.hpp"

namespace cirl {

inline constexpr int kSchemaVersion = 1;

/// Render with 9 significant digits, '.' separator ("%.9g").
std::string format_double9(double value);

/// The double nearest to the 9-significant-digit rendering of `value`;
/// result CSV/JSON values are quantized with this so both formats carry the
/// same number and parse back losslessly.
double quantize9(double value);

nlohmann::json policy_to_json(const Policy& policy);
Policy policy_from_json(const nlohmann::json& j);

nlohmann::json kernel_to_json(const TransitionKernel& kernel);
TransitionKernel kernel_from_json(const nlohmann::json& j, const Environment& env);

nlohmann::json environment_to_json(const Environment& env);
Environment environment_from_json(const nlohmann::json& j);

nlohmann::json scenario_to_json(const Scenario& scenario);
Scenario scenario_from_json(const nlohmann::json& j);

nlohmann::json trajectory_to_json(const Trajectory& traj);
Trajectory trajectory_from_json(const nlohmann::json& j);

nlohmann::json logs_to_json(const LogDataset& logs);
LogDataset logs_from_json(const nlohmann::json& j);

nlohmann::json bound_report_to_json(const BoundReport& report);

nlohmann::json calibration_report_to_json(const CalibrationReport& report);

bool operator==(const Policy& a, const Policy& b);
bool operator==(const TransitionKernel& a, const TransitionKernel& b);
bool operator==(const Goal& a, const Goal& b);
bool operator==(const Trajectory& a, const Trajectory& b);
bool environments_equal(const Environment& a, const Environment& b);
bool logs_equal(const LogDataset& a, const LogDataset& b);
bool scenarios_equal(const Scenario& a, const Scenario& b);

/// One row of an experiment results file. Values are quantized to the
/// 9-significant-digit file contract at construction.
struct ResultRow {
    std::string experiment;
    std::string scenario;
    std::string paradigm;
    std::uint64_t seed = 0;
    std::string metric;
    double value = 0.0;

    static ResultRow make(std::string experiment, std::string scenario, std::string paradigm,
                          std::uint64_t seed, std::string metric, double value);

    bool operator==(const ResultRow&) const = default;
};

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_results_csv(std::istream& in);
void write_results_json(std::ostream& out, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_results_json(std::istream& in);

/// One certificate evaluation row of a `verify` run.
struct VerifyRow {
    std::string kind;
    int instance = 0;
    std::string variant; // policy ordering: "a" as constructed, "b" swapped
    std::uint64_t seed = 0;
    BoundReport report;
};

void write_verify_csv(std::ostream& out, const std::vector<VerifyRow>& rows);
void write_verify_json(std::ostream& out, const std::vector<VerifyRow>& rows);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);
void write_sweep_json(std::ostream& out, const std::vector<SweepRow>& rows);

void write_curve_csv(std::ostream& out, const LearningCurve& curve);
void write_curve_json(std::ostream& out, const LearningCurve& curve);

} // namespace cirl
