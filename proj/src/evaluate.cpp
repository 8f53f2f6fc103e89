#include "rrl/evaluate.hpp"

#include <fstream>
#include <tuple>

#include <json.hpp>

#include "rrl/errors.hpp"
#include "rrl/stats.hpp"

namespace rrl {

namespace {

EvalEpisode roll_one(Policy& policy, Env& env, std::uint64_t seed) {
    policy.begin_episode();
    EvalEpisode ep;
    std::vector<double> s = env.reset(seed);
    ep.x0 = env.initial_state();
    while (!env.episode_finished()) {
        TransitionRecord t = env.step(policy.act(s));
        s = t.s_next;
        ep.transitions.push_back(std::move(t));
    }
    ep.summary = env.summary();
    ep.logs = env.interval_logs();
    return ep;
}

}  // namespace

std::vector<EvalEpisode> run_episodes(const Policy& policy, const EnvFactory& make_env,
                                      std::size_t n_episodes, std::uint64_t base_seed,
                                      std::size_t workers) {
    if (n_episodes == 0) throw ConfigError("evaluation needs at least one episode");
    if (workers == 0) throw ConfigError("workers must be >= 1");

    std::vector<EvalEpisode> out(n_episodes);
    std::vector<std::string> faults(n_episodes);
#pragma omp parallel num_threads(static_cast<int>(workers)) if (workers > 1)
    {
        std::unique_ptr<Policy> local = policy.clone();
        std::unique_ptr<Env> env = make_env();
#pragma omp for schedule(dynamic)
        for (long i = 0; i < static_cast<long>(n_episodes); ++i) {
            const auto k = static_cast<std::size_t>(i);
            try {
                out[k] = roll_one(*local, *env, base_seed + 1 + k);
            } catch (const std::exception& e) {
                faults[k] = e.what();
            }
        }
    }
    for (std::size_t k = 0; k < n_episodes; ++k)
        if (!faults[k].empty())
            throw SimulationFault("episode with seed " + std::to_string(base_seed + 1 + k) +
                                  " failed: " + faults[k]);
    return out;
}

EvalMetrics aggregate(const std::vector<EvalEpisode>& episodes) {
    EvalMetrics m;
    m.episodes = episodes.size();
    if (episodes.empty()) return m;
    std::vector<double> t_h, ncv, rel;
    std::size_t completed = 0;
    for (const EvalEpisode& ep : episodes) {
        t_h.push_back(ep.summary.batch_time_s / 3600.0);
        ncv.push_back(static_cast<double>(ep.summary.n_cv));
        rel.push_back(ep.summary.n_cv_rel);
        if (ep.summary.terminated) ++completed;
    }
    std::tie(m.mean_t_batch_h, m.std_t_batch_h) = mean_std(t_h);
    std::tie(m.mean_ncv, m.std_ncv) = mean_std(ncv);
    std::tie(m.mean_ncv_rel, m.std_ncv_rel) = mean_std(rel);
    m.completion_rate = static_cast<double>(completed) / static_cast<double>(episodes.size());
    return m;
}

EvalMetrics evaluate(const Policy& policy, const EnvFactory& make_env, std::size_t n_episodes,
                     std::uint64_t base_seed, std::size_t workers) {
    return aggregate(run_episodes(policy, make_env, n_episodes, base_seed, workers));
}

double soft_return_estimate(const Policy& policy, const EnvFactory& make_env, double gamma,
                            const std::vector<std::uint64_t>& seeds) {
    if (seeds.empty()) throw ConfigError("soft return estimate needs at least one seed");
    std::unique_ptr<Policy> local = policy.clone();
    std::unique_ptr<Env> env = make_env();
    double total = 0.0;
    for (const std::uint64_t seed : seeds) {
        local->begin_episode();
        std::vector<double> s = env->reset(seed);
        double g = 0.0;
        double discount = 1.0;
        while (!env->episode_finished()) {
            const TransitionRecord t = env->step(local->act(s));
            s = t.s_next;
            g += discount * t.r;
            discount *= gamma;
        }
        total += g;
    }
    return total / static_cast<double>(seeds.size());
}

void write_eval_metrics_json(const std::string& path, const EvalMetrics& m) {
    nlohmann::ordered_json j;
    j["episodes"] = m.episodes;
    j["mean_t_batch_h"] = m.mean_t_batch_h;
    j["std_t_batch_h"] = m.std_t_batch_h;
    j["mean_ncv"] = m.mean_ncv;
    j["std_ncv"] = m.std_ncv;
    j["mean_ncv_rel"] = m.mean_ncv_rel;
    j["std_ncv_rel"] = m.std_ncv_rel;
    j["completion_rate"] = m.completion_rate;
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out << j.dump(2) << '\n';
}

}  // namespace rrl
