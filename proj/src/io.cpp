#include "rrl/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rrl/errors.hpp"

namespace rrl {

namespace {

constexpr const char* kTrajectoryHeader =
    "t_s,m_W,m_M,m_P,T_R,T_S,T_J,T_EHE,T_CW_EHE,m_acc,T_ad,"
    "m_dot_feed,T_J_in,T_CW_EHE_in,n_violations";

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    return out;
}

void write_state_row(std::ofstream& out, double t_s, const PhysicalState& x,
                     const ControlInput& u, int n_violations) {
    out << format_double(t_s);
    for (double v : x.as_array()) out << ',' << format_double(v);
    out << ',' << format_double(u.m_dot_feed) << ',' << format_double(u.T_J_in) << ','
        << format_double(u.T_CW_EHE_in) << ',' << n_violations;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    return fields;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_trajectory_csv(const std::string& path, const PhysicalState& x0,
                          const std::vector<IntervalLog>& logs, bool recipe_columns) {
    std::ofstream out = open_out(path);
    out << kTrajectoryHeader;
    if (recipe_columns) out << ",phase,step_c,exit_reason";
    out << '\n';

    // initial row: state at t = 0 with the input of the first interval
    const ControlInput u0 = logs.empty() ? ControlInput{} : logs.front().u;
    write_state_row(out, 0.0, x0, u0, 0);
    if (recipe_columns) {
        out << ',' << (logs.empty() ? 0 : logs.front().phase) << ','
            << (logs.empty() ? 0 : logs.front().step_c) << ',';
    }
    out << '\n';

    for (const IntervalLog& l : logs) {
        write_state_row(out, l.t_s, l.x, l.u, l.n_violations);
        if (recipe_columns) out << ',' << l.phase << ',' << l.step_c << ',' << l.exit_reason;
        out << '\n';
    }
}

void write_transitions_csv(const std::string& path,
                           const std::vector<TransitionRecord>& transitions) {
    std::ofstream out = open_out(path);
    if (transitions.empty()) {
        out << "r,terminated,truncated\n";
        return;
    }
    const std::size_t ns = transitions.front().s.size();
    const std::size_t na = transitions.front().a.size();
    for (std::size_t i = 0; i < ns; ++i) out << "s" << i << ',';
    for (std::size_t i = 0; i < na; ++i) out << "a" << i << ',';
    out << "r,";
    for (std::size_t i = 0; i < ns; ++i) out << "s_next" << i << ',';
    out << "terminated,truncated\n";
    for (const TransitionRecord& t : transitions) {
        for (double v : t.s) out << format_double(v) << ',';
        for (double v : t.a) out << format_double(v) << ',';
        out << format_double(t.r) << ',';
        for (double v : t.s_next) out << format_double(v) << ',';
        out << (t.terminated ? 1 : 0) << ',' << (t.truncated ? 1 : 0) << '\n';
    }
}

void write_episode_summary_json(const std::string& path, const EpisodeSummary& s) {
    nlohmann::ordered_json j;
    j["seed"] = s.seed;
    j["scenario"] = s.scenario;
    j["return"] = s.episode_return;
    j["batch_time_s"] = s.batch_time_s;
    j["n_cv"] = s.n_cv;
    j["n_cv_rel"] = s.n_cv_rel;
    j["terminated"] = s.terminated;
    j["truncated"] = s.truncated;
    std::ofstream out = open_out(path);
    out << j.dump(2) << '\n';
}

std::vector<ControlInput> read_input_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open input CSV: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("input CSV is empty: " + path);

    const std::vector<std::string> header = split_csv_line(line);
    int col_feed = -1, col_tj = -1, col_tcw = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == "m_dot_feed") col_feed = static_cast<int>(i);
        if (header[i] == "T_J_in") col_tj = static_cast<int>(i);
        if (header[i] == "T_CW_EHE_in") col_tcw = static_cast<int>(i);
    }
    if (col_feed < 0 || col_tj < 0 || col_tcw < 0)
        throw ConfigError("input CSV must have columns m_dot_feed,T_J_in,T_CW_EHE_in: " + path);

    std::vector<ControlInput> inputs;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_csv_line(line);
        const auto need = static_cast<std::size_t>(std::max({col_feed, col_tj, col_tcw})) + 1;
        if (fields.size() < need)
            throw ConfigError("input CSV line " + std::to_string(line_no) + " is short: " + path);
        try {
            inputs.push_back({std::stod(fields[col_feed]), std::stod(fields[col_tj]),
                              std::stod(fields[col_tcw])});
        } catch (const std::exception&) {
            throw ConfigError("input CSV line " + std::to_string(line_no) +
                              " is not numeric: " + path);
        }
    }
    return inputs;
}

void write_learning_curve_csv(const std::string& path, const LearningCurve& curve) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out << "steps,mean_return,std_return\n";
    for (const LearningCurvePoint& p : curve.points)
        out << p.env_steps << ',' << format_double(p.mean_return) << ','
            << format_double(p.std_return) << '\n';
}

}  // namespace rrl
