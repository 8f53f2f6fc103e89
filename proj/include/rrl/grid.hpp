#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "rrl/cem.hpp"
#include "rrl/evaluate.hpp"
#include "rrl/td3.hpp"

namespace rrl {

// Hyperparameter axes; the cross product is enumerated in declaration order
// (algorithm, arch, batch, lr, noise, buffer, scenario innermost-last).
struct GridSpec {
    std::vector<std::string> algorithms{"td3"};
    std::vector<std::vector<std::size_t>> archs{{50, 50}, {50, 25, 10}};
    std::vector<std::size_t> batch_sizes{512, 4096};
    std::vector<double> learning_rates{3e-4, 1e-5};
    std::vector<double> noises{0.0, 0.1};
    std::vector<std::size_t> buffer_sizes{1000000, 100000, 10000};
    std::vector<int> scenarios{1, 2, 3};

    void validate() const;
};

struct GridCell {
    std::size_t cell_id = 0;
    std::string algorithm;
    std::vector<std::size_t> arch;
    std::size_t batch = 0;
    double lr = 0.0;
    double noise = 0.0;
    std::size_t buffer = 0;
    int scenario = 1;
};

std::vector<GridCell> enumerate_cells(const GridSpec& spec);

std::string arch_label(const std::vector<std::size_t>& arch);      // {50,50} -> "50-50"
std::vector<std::size_t> parse_arch_label(const std::string& s);

struct GridBudget {
    Td3Config td3;                  // per-cell axes override arch/lr/batch/noise/buffer
    std::size_t td3_total_steps = 2800;
    CemConfig cem;                  // per-cell arch overrides hidden; scenario via env
    std::size_t eval_episodes = 10;
    std::uint64_t eval_base_seed = 1000000;
    std::uint64_t seed_base = 0;    // cell training seed = seed_base + cell_id
    std::size_t workers = 1;
    std::size_t max_cells = 0;      // cap on cells trained per invocation; 0 = no cap
    std::string created_at;         // stamped into per-cell weights files
};

struct GridRow {
    GridCell cell;
    std::uint64_t seed = 0;
    EvalMetrics metrics;
};

struct GridOutcome {
    std::vector<GridRow> rows;      // ranked: completion desc, ncv_rel asc, t_batch asc
    std::vector<std::pair<std::size_t, std::string>> failures;
    std::size_t ran = 0;
    std::size_t resumed = 0;        // cells skipped because results.csv already has them
};

using ScenarioEnvFactory = std::function<EnvFactory(int scenario)>;

// Trains + evaluates every cell not already present in <out_dir>/results.csv,
// then rewrites the ranked results table. Per-cell failures are recorded in
// <out_dir>/failures.csv and never abort the sweep.
GridOutcome run_grid(const GridSpec& spec, const GridBudget& budget,
                     const ScenarioEnvFactory& env_for_scenario, const std::string& out_dir);

}  // namespace rrl
