#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rrl/env.hpp"
#include "rrl/policy.hpp"

namespace rrl {

struct EvalEpisode {
    EpisodeSummary summary;
    std::vector<TransitionRecord> transitions;
    std::vector<IntervalLog> logs;
    PhysicalState x0{};
};

struct EvalMetrics {
    std::size_t episodes = 0;
    double mean_t_batch_h = 0.0;
    double std_t_batch_h = 0.0;
    double mean_ncv = 0.0;
    double std_ncv = 0.0;
    double mean_ncv_rel = 0.0;
    double std_ncv_rel = 0.0;
    double completion_rate = 0.0;   // fraction terminated (not truncated)
};

// Rolls out the policy on seeds base_seed+1 .. base_seed+n. Workers > 1 fans
// episodes out over policy clones; results are ordered by seed either way.
std::vector<EvalEpisode> run_episodes(const Policy& policy, const EnvFactory& make_env,
                                      std::size_t n_episodes, std::uint64_t base_seed,
                                      std::size_t workers = 1);

EvalMetrics aggregate(const std::vector<EvalEpisode>& episodes);

EvalMetrics evaluate(const Policy& policy, const EnvFactory& make_env, std::size_t n_episodes,
                     std::uint64_t base_seed, std::size_t workers = 1);

// Monte-Carlo estimate of the discounted objective over seeded starts.
double soft_return_estimate(const Policy& policy, const EnvFactory& make_env, double gamma,
                            const std::vector<std::uint64_t>& seeds);

void write_eval_metrics_json(const std::string& path, const EvalMetrics& m);

}  // namespace rrl
