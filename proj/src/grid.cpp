#include "rrl/grid.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "rrl/errors.hpp"
#include "rrl/io.hpp"
#include "rrl/mlp.hpp"

namespace fs = std::filesystem;

namespace rrl {

namespace {

constexpr const char* kResultsHeader =
    "cell_id,algorithm,arch,batch,lr,noise,buffer,scenario,seed,"
    "mean_t_batch_h,std_t_batch_h,mean_ncv,mean_ncv_rel,completion_rate";

std::string short_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, sep)) out.push_back(field);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

std::string csv_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        out += c;
    }
    out += '"';
    return out;
}

std::string row_line(const GridRow& r) {
    std::ostringstream out;
    out << r.cell.cell_id << ',' << r.cell.algorithm << ',' << arch_label(r.cell.arch) << ','
        << r.cell.batch << ',' << short_double(r.cell.lr) << ',' << short_double(r.cell.noise)
        << ',' << r.cell.buffer << ',' << r.cell.scenario << ',' << r.seed << ','
        << format_double(r.metrics.mean_t_batch_h) << ','
        << format_double(r.metrics.std_t_batch_h) << ',' << format_double(r.metrics.mean_ncv)
        << ',' << format_double(r.metrics.mean_ncv_rel) << ','
        << format_double(r.metrics.completion_rate);
    return out.str();
}

std::vector<GridRow> read_results_csv(const std::string& path) {
    std::ifstream in(path);
    std::vector<GridRow> rows;
    if (!in) return rows;
    std::string line;
    if (!std::getline(in, line)) return rows;
    if (line != kResultsHeader)
        throw ConfigError("unexpected results header in " + path + ": " + line);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::vector<std::string> f = split(line, ',');
        if (f.size() != 14)
            throw ConfigError("results line " + std::to_string(line_no) + " has " +
                              std::to_string(f.size()) + " fields, expected 14: " + path);
        try {
            GridRow r;
            r.cell.cell_id = std::stoul(f[0]);
            r.cell.algorithm = f[1];
            r.cell.arch = parse_arch_label(f[2]);
            r.cell.batch = std::stoul(f[3]);
            r.cell.lr = std::stod(f[4]);
            r.cell.noise = std::stod(f[5]);
            r.cell.buffer = std::stoul(f[6]);
            r.cell.scenario = std::stoi(f[7]);
            r.seed = std::stoull(f[8]);
            r.metrics.mean_t_batch_h = std::stod(f[9]);
            r.metrics.std_t_batch_h = std::stod(f[10]);
            r.metrics.mean_ncv = std::stod(f[11]);
            r.metrics.mean_ncv_rel = std::stod(f[12]);
            r.metrics.completion_rate = std::stod(f[13]);
            rows.push_back(std::move(r));
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception&) {
            throw ConfigError("results line " + std::to_string(line_no) +
                              " is malformed: " + path);
        }
    }
    return rows;
}

bool rank_before(const GridRow& a, const GridRow& b) {
    if (a.metrics.completion_rate != b.metrics.completion_rate)
        return a.metrics.completion_rate > b.metrics.completion_rate;
    if (a.metrics.mean_ncv_rel != b.metrics.mean_ncv_rel)
        return a.metrics.mean_ncv_rel < b.metrics.mean_ncv_rel;
    if (a.metrics.mean_t_batch_h != b.metrics.mean_t_batch_h)
        return a.metrics.mean_t_batch_h < b.metrics.mean_t_batch_h;
    return a.cell.cell_id < b.cell.cell_id;
}

GridRow train_cell(const GridCell& cell, const GridBudget& budget,
                   const ScenarioEnvFactory& env_for_scenario, const std::string& out_dir) {
    GridRow row;
    row.cell = cell;
    row.seed = budget.seed_base + cell.cell_id;

    const EnvFactory factory = env_for_scenario(cell.scenario);
    Mlp net;
    LearningCurve curve;
    if (cell.algorithm == "td3") {
        Td3Config cfg = budget.td3;
        cfg.actor_hidden = cell.arch;
        cfg.critic_hidden = cell.arch;
        cfg.lr = cell.lr;
        cfg.batch_size = cell.batch;
        cfg.buffer_capacity = cell.buffer;
        cfg.sigma_expl = cell.noise;
        Td3Result res = td3_train(factory, cfg, budget.td3_total_steps, row.seed);
        net = std::move(res.actor);
        curve = std::move(res.curve);
    } else if (cell.algorithm == "cem") {
        CemConfig cfg = budget.cem;
        cfg.hidden = cell.arch;
        cfg.workers = budget.workers;
        CemResult res = cem_train(factory, cfg, row.seed);
        net = std::move(res.policy);
        curve = std::move(res.curve);
    } else {
        throw ConfigError("unknown grid algorithm: " + cell.algorithm);
    }

    const std::string cell_dir = out_dir + "/cell_" + std::to_string(cell.cell_id);
    fs::create_directories(cell_dir);
    save_weights(net, cell_dir + "/weights.json", row.seed, budget.created_at);
    write_learning_curve_csv(cell_dir + "/curve.csv", curve);

    NetworkPolicy policy(std::move(net));
    row.metrics =
        evaluate(policy, factory, budget.eval_episodes, budget.eval_base_seed, budget.workers);
    return row;
}

}  // namespace

void GridSpec::validate() const {
    if (algorithms.empty() || archs.empty() || batch_sizes.empty() || learning_rates.empty() ||
        noises.empty() || buffer_sizes.empty() || scenarios.empty())
        throw ConfigError("grid: every axis needs at least one value");
    for (const std::string& a : algorithms)
        if (a != "td3" && a != "cem") throw ConfigError("grid: unknown algorithm: " + a);
    for (const auto& arch : archs)
        if (arch.empty()) throw ConfigError("grid: empty architecture");
    for (int s : scenarios)
        if (s < 1 || s > 3) throw ConfigError("grid: scenario must be 1, 2 or 3");
}

std::vector<GridCell> enumerate_cells(const GridSpec& spec) {
    spec.validate();
    std::vector<GridCell> cells;
    std::size_t id = 0;
    for (const std::string& algo : spec.algorithms)
        for (const auto& arch : spec.archs)
            for (std::size_t batch : spec.batch_sizes)
                for (double lr : spec.learning_rates)
                    for (double noise : spec.noises)
                        for (std::size_t buffer : spec.buffer_sizes)
                            for (int scenario : spec.scenarios)
                                cells.push_back(
                                    {id++, algo, arch, batch, lr, noise, buffer, scenario});
    return cells;
}

std::string arch_label(const std::vector<std::size_t>& arch) {
    std::string s;
    for (std::size_t i = 0; i < arch.size(); ++i) {
        if (i) s += '-';
        s += std::to_string(arch[i]);
    }
    return s;
}

std::vector<std::size_t> parse_arch_label(const std::string& s) {
    std::vector<std::size_t> arch;
    for (const std::string& part : split(s, '-')) {
        try {
            arch.push_back(std::stoul(part));
        } catch (const std::exception&) {
            throw ConfigError("bad architecture label: " + s);
        }
        if (arch.back() == 0) throw ConfigError("bad architecture label: " + s);
    }
    if (arch.empty()) throw ConfigError("bad architecture label: " + s);
    return arch;
}

GridOutcome run_grid(const GridSpec& spec, const GridBudget& budget,
                     const ScenarioEnvFactory& env_for_scenario, const std::string& out_dir) {
    const std::vector<GridCell> cells = enumerate_cells(spec);
    fs::create_directories(out_dir);

    GridOutcome outcome;
    const std::string results_path = out_dir + "/results.csv";
    std::set<std::size_t> done;
    for (GridRow& r : read_results_csv(results_path)) {
        done.insert(r.cell.cell_id);
        outcome.rows.push_back(std::move(r));
    }
    outcome.resumed = done.size();

    for (const GridCell& cell : cells) {
        if (done.count(cell.cell_id)) continue;
        if (budget.max_cells > 0 && outcome.ran >= budget.max_cells) break;
        try {
            outcome.rows.push_back(train_cell(cell, budget, env_for_scenario, out_dir));
        } catch (const std::exception& e) {
            outcome.failures.emplace_back(cell.cell_id, e.what());
        }
        ++outcome.ran;
    }

    std::sort(outcome.rows.begin(), outcome.rows.end(), rank_before);

    std::ofstream out(results_path);
    if (!out) throw ConfigError("cannot open for writing: " + results_path);
    out << kResultsHeader << '\n';
    for (const GridRow& r : outcome.rows) out << row_line(r) << '\n';
    out.close();

    if (!outcome.failures.empty()) {
        std::ofstream fail(out_dir + "/failures.csv");
        if (!fail) throw ConfigError("cannot open for writing: " + out_dir + "/failures.csv");
        fail << "cell_id,error\n";
        for (const auto& [id, msg] : outcome.failures)
            fail << id << ',' << csv_quote(msg) << '\n';
    }
    return outcome;
}

}  // namespace rrl
