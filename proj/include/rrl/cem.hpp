#pragma once

#include <cstdint>
#include <vector>

#include "rrl/curve.hpp"
#include "rrl/env.hpp"
#include "rrl/mlp.hpp"

namespace rrl {

// Cross-entropy method over the flattened weights of a tanh-head policy network.
struct CemConfig {
    std::vector<std::size_t> hidden{16};
    std::size_t population = 24;
    double elite_fraction = 0.25;
    // small initial noise keeps early candidates near the mid-box prior, which
    // is feasible for the reactor; large noise saturates the tanh head and
    // stalls the search in constraint-violating corners
    double init_noise = 0.1;
    double noise_decay = 0.8;
    std::size_t episodes_per_candidate = 1;
    std::size_t generations = 12;
    std::size_t workers = 1;

    void validate() const;
};

struct CemResult {
    Mlp policy;
    LearningCurve curve;        // population mean/std return per generation
    std::size_t env_steps = 0;
    std::size_t episodes = 0;
    std::vector<std::uint64_t> episode_seeds;   // rollout seeds, one entry per generation draw
};

CemResult cem_train(const EnvFactory& make_env, const CemConfig& cfg, std::uint64_t seed);

// Flattened parameter order: per layer, W row-major then b.
std::vector<double> flatten_parameters(const Mlp& net);
void unflatten_parameters(Mlp& net, const std::vector<double>& flat);

}  // namespace rrl
