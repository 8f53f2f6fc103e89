#pragma once

#include <cstdint>
#include <random>

#include "rrl/batched.hpp"
#include "rrl/curve.hpp"
#include "rrl/env.hpp"
#include "rrl/mlp.hpp"

namespace rrl {

struct Td3Config {
    std::vector<std::size_t> actor_hidden{50, 50};
    std::vector<std::size_t> critic_hidden{50, 50};
    double lr = 3e-4;
    std::size_t batch_size = 256;
    std::size_t buffer_capacity = 10000;    // desk-scale default; grid cells override
    double sigma_expl = 0.1;                // exploration noise on [-1,1] actions
    double sigma_target = 0.2;              // target policy smoothing
    double target_clip = 0.5;
    std::size_t policy_delay = 2;
    double tau = 0.005;
    double gamma = 0.99;
    std::size_t warmup_steps = 1000;        // uniform-random action steps
    std::size_t eval_every_steps = 700;     // 50 recipe episodes
    std::size_t eval_episodes = 3;
    bool parallel_kernels = true;

    void validate() const;
};

struct Td3Result {
    Mlp actor;
    Mlp initial_actor;    // actor as initialized, for delayed-update checks
    Mlp critic1;
    Mlp critic2;
    LearningCurve curve;
    std::size_t env_steps = 0;
    std::size_t episodes = 0;
    std::size_t updates = 0;
    std::vector<std::uint64_t> episode_seeds;   // seeds of all training episodes
};

// Target values y = r + gamma * bootstrap * min(Q1', Q2') at smoothed target
// actions; bootstrap_mask is 0 on terminal (converged) transitions and 1
// otherwise, including truncation. Exposed for direct testing of the twin rule.
std::vector<double> td3_targets(const Mlp& actor_target, const Mlp& critic1_target,
                                const Mlp& critic2_target, const std::vector<double>& S2,
                                std::size_t batch, const std::vector<double>& R,
                                const std::vector<std::uint8_t>& bootstrap_mask,
                                const Td3Config& cfg, std::mt19937_64& noise_rng);

Td3Result td3_train(const EnvFactory& make_env, const Td3Config& cfg,
                    std::size_t total_steps, std::uint64_t seed);

}  // namespace rrl
