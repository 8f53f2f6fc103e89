#include "rrl/cem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "rrl/errors.hpp"
#include "rrl/stats.hpp"

namespace rrl {

namespace {

double candidate_score(const EnvFactory& make_env, const Mlp& net,
                       const std::vector<std::uint64_t>& episode_seeds,
                       std::size_t& env_steps) {
    double total = 0.0;
    std::unique_ptr<Env> env = make_env();
    for (const std::uint64_t seed : episode_seeds) {
        std::vector<double> s = env->reset(seed);
        while (!env->episode_finished()) {
            const TransitionRecord t = env->step(forward(net, s));
            s = t.s_next;
            ++env_steps;
        }
        total += env->summary().episode_return;
    }
    return total / static_cast<double>(episode_seeds.size());
}

}  // namespace

void CemConfig::validate() const {
    if (population < 2) throw ConfigError("cem: population must be >= 2");
    if (!(elite_fraction > 0.0 && elite_fraction <= 1.0))
        throw ConfigError("cem: elite fraction must lie in (0, 1]");
    if (init_noise < 0.0) throw ConfigError("cem: init noise must be >= 0");
    if (!(noise_decay > 0.0 && noise_decay <= 1.0))
        throw ConfigError("cem: noise decay must lie in (0, 1]");
    if (episodes_per_candidate == 0) throw ConfigError("cem: need >= 1 episode per candidate");
    if (generations == 0) throw ConfigError("cem: need >= 1 generation");
    if (workers == 0) throw ConfigError("cem: workers must be >= 1");
}

std::vector<double> flatten_parameters(const Mlp& net) {
    std::vector<double> flat;
    for (std::size_t l = 0; l < net.W.size(); ++l) {
        flat.insert(flat.end(), net.W[l].begin(), net.W[l].end());
        flat.insert(flat.end(), net.b[l].begin(), net.b[l].end());
    }
    return flat;
}

void unflatten_parameters(Mlp& net, const std::vector<double>& flat) {
    if (flat.size() != net.parameter_count())
        throw ContractViolation("cem: flat parameter size mismatch");
    std::size_t pos = 0;
    for (std::size_t l = 0; l < net.W.size(); ++l) {
        std::copy_n(flat.begin() + static_cast<long>(pos), net.W[l].size(), net.W[l].begin());
        pos += net.W[l].size();
        std::copy_n(flat.begin() + static_cast<long>(pos), net.b[l].size(), net.b[l].begin());
        pos += net.b[l].size();
    }
}

CemResult cem_train(const EnvFactory& make_env, const CemConfig& cfg, std::uint64_t seed) {
    cfg.validate();

    std::unique_ptr<Env> probe = make_env();
    const std::size_t os = probe->observation_size();
    const std::size_t as = probe->action_size();

    std::mt19937_64 master(seed);
    const std::uint64_t net_seed = master();
    std::mt19937_64 sample_rng(master());
    std::mt19937_64 ep_rng(master());

    std::vector<std::size_t> widths;
    widths.push_back(os);
    widths.insert(widths.end(), cfg.hidden.begin(), cfg.hidden.end());
    widths.push_back(as);

    CemResult res;
    res.policy = Mlp::make(widths, OutputHead::kTanh, net_seed);
    std::vector<double> mean = flatten_parameters(res.policy);
    const std::size_t dim = mean.size();
    std::vector<double> sigma(dim, cfg.init_noise);

    const std::size_t pop = cfg.population;
    const std::size_t n_elite = static_cast<std::size_t>(
        std::ceil(cfg.elite_fraction * static_cast<double>(pop)));
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<std::vector<double>> thetas(pop, std::vector<double>(dim));
    std::vector<double> scores(pop);
    std::vector<std::size_t> steps(pop);
    std::vector<std::string> faults(pop);

    for (std::size_t g = 0; g < cfg.generations; ++g) {
        // common random numbers: all candidates of a generation share episode seeds
        std::vector<std::uint64_t> episode_seeds(cfg.episodes_per_candidate);
        for (std::uint64_t& s : episode_seeds) s = ep_rng() % 1000000;
        res.episode_seeds.insert(res.episode_seeds.end(), episode_seeds.begin(),
                                 episode_seeds.end());

        for (std::size_t k = 0; k < pop; ++k)
            for (std::size_t j = 0; j < dim; ++j)
                thetas[k][j] = mean[j] + sigma[j] * gauss(sample_rng);

        std::fill(steps.begin(), steps.end(), 0);
        std::fill(faults.begin(), faults.end(), std::string());
#pragma omp parallel for schedule(dynamic) num_threads(static_cast<int>(cfg.workers)) \
    if (cfg.workers > 1)
        for (long k = 0; k < static_cast<long>(pop); ++k) {
            try {
                Mlp net = res.policy;
                unflatten_parameters(net, thetas[static_cast<std::size_t>(k)]);
                scores[static_cast<std::size_t>(k)] = candidate_score(
                    make_env, net, episode_seeds, steps[static_cast<std::size_t>(k)]);
            } catch (const std::exception& e) {
                faults[static_cast<std::size_t>(k)] = e.what();
            }
        }
        for (const std::string& f : faults)
            if (!f.empty()) throw SimulationFault("cem candidate rollout failed: " + f);

        for (std::size_t k = 0; k < pop; ++k) res.env_steps += steps[k];
        res.episodes += pop * cfg.episodes_per_candidate;

        std::vector<std::size_t> order(pop);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

        const double floor_noise = cfg.init_noise * std::pow(cfg.noise_decay, double(g + 1));
        for (std::size_t j = 0; j < dim; ++j) {
            double m = 0.0;
            for (std::size_t e = 0; e < n_elite; ++e) m += thetas[order[e]][j];
            m /= static_cast<double>(n_elite);
            double var = 0.0;
            for (std::size_t e = 0; e < n_elite; ++e) {
                const double d = thetas[order[e]][j] - m;
                var += d * d;
            }
            var /= static_cast<double>(n_elite);
            mean[j] = m;
            sigma[j] = std::sqrt(var + floor_noise * floor_noise);
        }

        const auto [ms, sd] = mean_std(scores);
        res.curve.append(res.env_steps, ms, sd);
    }

    unflatten_parameters(res.policy, mean);
    return res;
}

}  // namespace rrl
