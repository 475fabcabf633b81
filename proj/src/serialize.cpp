#include "cirl/serialize.hpp"

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

namespace cirl {

using nlohmann::json;

std::string format_double9(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.9g", value);
    return buffer;
}

double quantize9(double value) { return std::strtod(format_double9(value).c_str(), nullptr); }

namespace {

ContextMode mode_from_string(const std::string& s) {
    if (s == "markov") return ContextMode::markov;
    if (s == "history") return ContextMode::history;
    throw std::invalid_argument("unknown context mode: " + s);
}

KernelLabel label_from_string(const std::string& s) {
    if (s == "real") return KernelLabel::real;
    if (s == "simulated") return KernelLabel::simulated;
    if (s == "calibrated") return KernelLabel::calibrated;
    throw std::invalid_argument("unknown kernel label: " + s);
}

} // namespace

json policy_to_json(const Policy& policy) {
    return json{{"schema_version", kSchemaVersion},
                {"context_mode", to_string(policy.context_mode())},
                {"logits", policy.logits()}};
}

Policy policy_from_json(const json& j) {
    return Policy(mode_from_string(j.at("context_mode").get<std::string>()),
                  j.at("logits").get<std::vector<std::vector<double>>>());
}

json kernel_to_json(const TransitionKernel& kernel) {
    return json{{"schema_version", kSchemaVersion},
                {"label", to_string(kernel.label())},
                {"table", kernel.table()}};
}

TransitionKernel kernel_from_json(const json& j, const Environment& env) {
    return TransitionKernel::create(env, j.at("table").get<TransitionKernel::Table>(),
                                    label_from_string(j.at("label").get<std::string>()));
}

namespace {

json goal_to_json(const Goal& goal) {
    json j{{"goal_id", goal.goal_id},
           {"target_state", goal.target_state},
           {"initial_state", goal.initial_state}};
    if (goal.score_table.has_value()) {
        json table = json::object();
        for (const auto& [state, value] : *goal.score_table) {
            table[std::to_string(state)] = value;
        }
        j["score_table"] = table;
    }
    return j;
}

Goal goal_from_json(const json& j) {
    Goal goal;
    goal.goal_id = j.at("goal_id").get<int>();
    goal.target_state = j.at("target_state").get<int>();
    goal.initial_state = j.at("initial_state").get<int>();
    if (j.contains("score_table")) {
        std::map<int, double> table;
        for (const auto& [key, value] : j.at("score_table").items()) {
            table[std::stoi(key)] = value.get<double>();
        }
        goal.score_table = std::move(table);
    }
    return goal;
}

} // namespace

json environment_to_json(const Environment& env) {
    json goals = json::array();
    for (const Goal& g : env.goals()) goals.push_back(goal_to_json(g));
    json reward = json::array();
    for (int s = 0; s < env.num_states(); ++s) {
        json row = json::array();
        for (int a = 0; a < env.num_actions(); ++a) row.push_back(env.raw_step_reward(s, a));
        reward.push_back(row);
    }
    return json{{"schema_version", kSchemaVersion},
                {"num_states", env.num_states()},
                {"num_actions", env.num_actions()},
                {"horizon", env.horizon()},
                {"context_mode", to_string(env.context_mode())},
                {"terminal_scoring", env.terminal_scoring()},
                {"step_reward", reward},
                {"absorbing_states", env.absorbing_states()},
                {"goals", goals}};
}

Environment environment_from_json(const json& j) {
    EnvSpec spec;
    spec.num_states = j.at("num_states").get<int>();
    spec.num_actions = j.at("num_actions").get<int>();
    spec.horizon = j.at("horizon").get<int>();
    spec.context_mode = mode_from_string(j.at("context_mode").get<std::string>());
    spec.terminal_scoring = j.at("terminal_scoring").get<bool>();
    spec.step_reward = j.at("step_reward").get<std::vector<std::vector<double>>>();
    spec.absorbing_states = j.at("absorbing_states").get<std::vector<int>>();
    for (const auto& g : j.at("goals")) spec.goals.push_back(goal_from_json(g));
    return make_environment(spec).env;
}

json scenario_to_json(const Scenario& scenario) {
    json j{{"schema_version", kSchemaVersion},
           {"name", scenario.name},
           {"seed", scenario.seed},
           {"env", environment_to_json(scenario.env)},
           {"kernel_real", kernel_to_json(scenario.kernel_real)},
           {"kernel_sim", kernel_to_json(scenario.kernel_sim)},
           {"behavior", policy_to_json(scenario.behavior)},
           {"params", scenario.params}};
    if (scenario.reference.has_value()) j["reference"] = policy_to_json(*scenario.reference);
    if (scenario.answers.has_value()) {
        j["answers"] = json{{"correct_action", scenario.answers->correct_action},
                            {"incorrect_action", scenario.answers->incorrect_action},
                            {"reject_state", scenario.answers->reject_state}};
    }
    return j;
}

Scenario scenario_from_json(const json& j) {
    Scenario scenario;
    scenario.name = j.at("name").get<std::string>();
    scenario.seed = j.at("seed").get<std::uint64_t>();
    scenario.env = environment_from_json(j.at("env"));
    scenario.kernel_real = kernel_from_json(j.at("kernel_real"), scenario.env);
    scenario.kernel_sim = kernel_from_json(j.at("kernel_sim"), scenario.env);
    scenario.behavior = policy_from_json(j.at("behavior"));
    if (j.contains("reference")) scenario.reference = policy_from_json(j.at("reference"));
    if (j.contains("answers")) {
        AnswerStructure answers;
        answers.correct_action = j.at("answers").at("correct_action").get<std::vector<int>>();
        answers.incorrect_action = j.at("answers").at("incorrect_action").get<std::vector<int>>();
        answers.reject_state = j.at("answers").at("reject_state").get<std::vector<int>>();
        scenario.answers = std::move(answers);
    }
    scenario.params = j.at("params").get<std::map<std::string, double>>();
    return scenario;
}

json trajectory_to_json(const Trajectory& traj) {
    return json{{"goal", traj.goal_id},
                {"states", traj.states},
                {"actions", traj.actions},
                {"terminal_reward", traj.terminal_reward},
                {"step_return", traj.step_return}};
}

Trajectory trajectory_from_json(const json& j) {
    Trajectory traj;
    traj.goal_id = j.at("goal").get<int>();
    traj.states = j.at("states").get<std::vector<int>>();
    traj.actions = j.at("actions").get<std::vector<int>>();
    traj.terminal_reward = j.at("terminal_reward").get<double>();
    traj.step_return = j.at("step_return").get<double>();
    return traj;
}

json logs_to_json(const LogDataset& logs) {
    json trajectories = json::array();
    for (const Trajectory& traj : logs.trajectories) trajectories.push_back(trajectory_to_json(traj));
    return json{{"schema_version", kSchemaVersion},
                {"behavior_policy_id", logs.behavior_policy_id},
                {"kernel_label", to_string(logs.kernel_label)},
                {"seed", logs.seed},
                {"trajectories", trajectories}};
}

LogDataset logs_from_json(const json& j) {
    LogDataset logs;
    logs.behavior_policy_id = j.at("behavior_policy_id").get<std::string>();
    logs.kernel_label = label_from_string(j.at("kernel_label").get<std::string>());
    logs.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& t : j.at("trajectories")) logs.trajectories.push_back(trajectory_from_json(t));
    return logs;
}

json bound_report_to_json(const BoundReport& report) {
    json terms = json::array();
    for (const BoundTerm& term : report.per_term) {
        terms.push_back(json{{"t", term.t},
                             {"drift", term.drift},
                             {"local", term.local},
                             {"weight", term.weight}});
    }
    return json{{"name", report.name},
                {"lhs", report.lhs},
                {"rhs", report.rhs},
                {"holds", report.holds},
                {"slack", report.slack},
                {"rhs_intermediate", report.rhs_intermediate},
                {"intermediate_holds", report.intermediate_holds},
                {"dominance_holds", report.dominance_holds},
                {"recurrence_holds", report.recurrence_holds},
                {"tightest_t", report.tightest_t},
                {"per_term", terms}};
}

json calibration_report_to_json(const CalibrationReport& report) {
    json uncovered = json::array();
    for (const RowId& row : report.uncovered_rows) {
        uncovered.push_back(json{{"goal", row.goal}, {"state", row.state}, {"action", row.action}});
    }
    json j{{"schema_version", kSchemaVersion},
           {"nll_curve", report.nll_curve},
           {"steps_taken", report.steps_taken},
           {"final_grad_norm", report.final_grad_norm},
           {"max_row_tv_to_count_mle", report.max_row_tv_to_count_mle},
           {"uncovered_rows", uncovered},
           {"kernel", kernel_to_json(report.kernel)},
           {"delta_before", report.delta_before},
           {"delta_after", report.delta_after}};
    if (report.bound_before.has_value()) j["bound_before"] = bound_report_to_json(*report.bound_before);
    if (report.bound_after.has_value()) j["bound_after"] = bound_report_to_json(*report.bound_after);
    return j;
}

bool operator==(const Policy& a, const Policy& b) {
    return a.context_mode() == b.context_mode() && a.logits() == b.logits();
}

bool operator==(const TransitionKernel& a, const TransitionKernel& b) {
    return a.label() == b.label() && a.table() == b.table();
}

bool operator==(const Goal& a, const Goal& b) {
    return a.goal_id == b.goal_id && a.target_state == b.target_state &&
           a.initial_state == b.initial_state && a.score_table == b.score_table;
}

bool operator==(const Trajectory& a, const Trajectory& b) {
    return a.goal_id == b.goal_id && a.states == b.states && a.actions == b.actions &&
           a.terminal_reward == b.terminal_reward && a.step_return == b.step_return;
}

bool environments_equal(const Environment& a, const Environment& b) {
    if (a.num_states() != b.num_states() || a.num_actions() != b.num_actions() ||
        a.horizon() != b.horizon() || a.context_mode() != b.context_mode() ||
        a.terminal_scoring() != b.terminal_scoring() ||
        a.absorbing_states() != b.absorbing_states() || a.goals().size() != b.goals().size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.goals().size(); ++i) {
        if (!(a.goals()[i] == b.goals()[i])) return false;
    }
    for (int s = 0; s < a.num_states(); ++s) {
        for (int act = 0; act < a.num_actions(); ++act) {
            if (a.raw_step_reward(s, act) != b.raw_step_reward(s, act)) return false;
        }
    }
    return true;
}

bool logs_equal(const LogDataset& a, const LogDataset& b) {
    return a.behavior_policy_id == b.behavior_policy_id && a.kernel_label == b.kernel_label &&
           a.seed == b.seed && a.trajectories == b.trajectories;
}

bool scenarios_equal(const Scenario& a, const Scenario& b) {
    const bool answers_equal =
        a.answers.has_value() == b.answers.has_value() &&
        (!a.answers.has_value() ||
         (a.answers->correct_action == b.answers->correct_action &&
          a.answers->incorrect_action == b.answers->incorrect_action &&
          a.answers->reject_state == b.answers->reject_state));
    return a.name == b.name && a.seed == b.seed && environments_equal(a.env, b.env) &&
           a.kernel_real == b.kernel_real && a.kernel_sim == b.kernel_sim &&
           a.behavior == b.behavior && a.reference == b.reference && answers_equal &&
           a.params == b.params;
}

ResultRow ResultRow::make(std::string experiment, std::string scenario, std::string paradigm,
                          std::uint64_t seed, std::string metric, double value) {
    ResultRow row;
    row.experiment = std::move(experiment);
    row.scenario = std::move(scenario);
    row.paradigm = std::move(paradigm);
    row.seed = seed;
    row.metric = std::move(metric);
    row.value = quantize9(value);
    return row;
}

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
    out << "schema_version,experiment,scenario,paradigm,seed,metric,value\n";
    for (const ResultRow& row : rows) {
        out << kSchemaVersion << ',' << row.experiment << ',' << row.scenario << ','
            << row.paradigm << ',' << row.seed << ',' << row.metric << ','
            << format_double9(row.value) << '\n';
    }
}

std::vector<ResultRow> read_results_csv(std::istream& in) {
    std::vector<ResultRow> rows;
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("results csv: missing header");
    if (line != "schema_version,experiment,scenario,paradigm,seed,metric,value") {
        throw std::invalid_argument("results csv: unexpected header: " + line);
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 7) throw std::invalid_argument("results csv: malformed row: " + line);
        ResultRow row;
        row.experiment = fields[1];
        row.scenario = fields[2];
        row.paradigm = fields[3];
        row.seed = std::stoull(fields[4]);
        row.metric = fields[5];
        row.value = std::strtod(fields[6].c_str(), nullptr);
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_results_json(std::ostream& out, const std::vector<ResultRow>& rows) {
    json array = json::array();
    for (const ResultRow& row : rows) {
        array.push_back(json{{"schema_version", kSchemaVersion},
                             {"experiment", row.experiment},
                             {"scenario", row.scenario},
                             {"paradigm", row.paradigm},
                             {"seed", row.seed},
                             {"metric", row.metric},
                             {"value", row.value}});
    }
    out << array.dump(2) << '\n';
}

std::vector<ResultRow> read_results_json(std::istream& in) {
    json array = json::parse(in);
    std::vector<ResultRow> rows;
    for (const auto& j : array) {
        ResultRow row;
        row.experiment = j.at("experiment").get<std::string>();
        row.scenario = j.at("scenario").get<std::string>();
        row.paradigm = j.at("paradigm").get<std::string>();
        row.seed = j.at("seed").get<std::uint64_t>();
        row.metric = j.at("metric").get<std::string>();
        row.value = j.at("value").get<double>();
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

json verify_row_to_json(const VerifyRow& row) {
    return json{{"schema_version", kSchemaVersion},
                {"kind", row.kind},
                {"instance", row.instance},
                {"variant", row.variant},
                {"seed", row.seed},
                {"name", row.report.name},
                {"lhs", row.report.lhs},
                {"rhs", row.report.rhs},
                {"slack", row.report.slack},
                {"holds", row.report.holds},
                {"intermediate_holds", row.report.intermediate_holds},
                {"dominance_holds", row.report.dominance_holds},
                {"recurrence_holds", row.report.recurrence_holds}};
}

} // namespace

void write_verify_csv(std::ostream& out, const std::vector<VerifyRow>& rows) {
    out << "schema_version,kind,instance,variant,seed,name,lhs,rhs,slack,holds,"
           "intermediate_holds,dominance_holds,recurrence_holds\n";
    for (const VerifyRow& row : rows) {
        out << kSchemaVersion << ',' << row.kind << ',' << row.instance << ',' << row.variant
            << ',' << row.seed << ',' << row.report.name << ',' << format_double9(row.report.lhs)
            << ',' << format_double9(row.report.rhs) << ',' << format_double9(row.report.slack)
            << ',' << (row.report.holds ? 1 : 0) << ',' << (row.report.intermediate_holds ? 1 : 0)
            << ',' << (row.report.dominance_holds ? 1 : 0) << ','
            << (row.report.recurrence_holds ? 1 : 0) << '\n';
    }
}

void write_verify_json(std::ostream& out, const std::vector<VerifyRow>& rows) {
    json array = json::array();
    for (const VerifyRow& row : rows) array.push_back(verify_row_to_json(row));
    out << array.dump(2) << '\n';
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "schema_version,horizon,lhs,rhs,ratio\n";
    for (const SweepRow& row : rows) {
        out << kSchemaVersion << ',' << row.horizon << ',' << format_double9(row.lhs) << ','
            << format_double9(row.rhs) << ',' << format_double9(row.ratio) << '\n';
    }
}

void write_sweep_json(std::ostream& out, const std::vector<SweepRow>& rows) {
    json array = json::array();
    for (const SweepRow& row : rows) {
        array.push_back(json{{"schema_version", kSchemaVersion},
                             {"horizon", row.horizon},
                             {"lhs", row.lhs},
                             {"rhs", row.rhs},
                             {"ratio", row.ratio}});
    }
    out << array.dump(2) << '\n';
}

void write_curve_csv(std::ostream& out, const LearningCurve& curve) {
    out << "schema_version,iteration,mean_reward,j_train,j_real,surrogate,clip_fraction\n";
    for (const CurvePoint& point : curve) {
        out << kSchemaVersion << ',' << point.iteration << ',' << format_double9(point.mean_reward)
            << ',' << format_double9(point.j_train) << ',' << format_double9(point.j_real) << ','
            << format_double9(point.surrogate) << ',' << format_double9(point.clip_fraction)
            << '\n';
    }
}

void write_curve_json(std::ostream& out, const LearningCurve& curve) {
    json array = json::array();
    for (const CurvePoint& point : curve) {
        array.push_back(json{{"schema_version", kSchemaVersion},
                             {"iteration", point.iteration},
                             {"mean_reward", point.mean_reward},
                             {"j_train", point.j_train},
                             {"j_real", point.j_real},
                             {"surrogate", point.surrogate},
                             {"clip_fraction", point.clip_fraction}});
    }
    out << array.dump(2) << '\n';
}

} // namespace cirl
