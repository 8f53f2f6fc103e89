#include "rrl/td3.hpp"

#include <algorithm>
#include <cmath>

#include "rrl/errors.hpp"
#include "rrl/replay.hpp"
#include "rrl/stats.hpp"

namespace rrl {

namespace {

constexpr std::uint64_t kCurveSeedBase = 900000;   // in-training eval block, < 1e6

std::vector<std::size_t> net_widths(std::size_t in, const std::vector<std::size_t>& hidden,
                                    std::size_t out) {
    std::vector<std::size_t> w;
    w.push_back(in);
    w.insert(w.end(), hidden.begin(), hidden.end());
    w.push_back(out);
    return w;
}

double rollout_return(Env& env, const Mlp& actor, std::uint64_t seed) {
    std::vector<double> s = env.reset(seed);
    while (!env.episode_finished()) {
        const TransitionRecord t = env.step(forward(actor, s));
        s = t.s_next;
    }
    return env.summary().episode_return;
}

}  // namespace

void Td3Config::validate() const {
    if (batch_size == 0 || batch_size > buffer_capacity)
        throw ConfigError("td3: batch size must be in [1, buffer capacity]");
    if (policy_delay < 1) throw ConfigError("td3: policy delay must be >= 1");
    if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("td3: tau must lie in (0, 1]");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("td3: gamma must lie in (0, 1]");
    if (sigma_expl < 0.0 || sigma_target < 0.0 || target_clip < 0.0)
        throw ConfigError("td3: noise scales must be >= 0");
    if (eval_every_steps == 0) throw ConfigError("td3: eval cadence must be positive");
    if (eval_episodes == 0) throw ConfigError("td3: need at least one eval episode");
}

std::vector<double> td3_targets(const Mlp& actor_target, const Mlp& critic1_target,
                                const Mlp& critic2_target, const std::vector<double>& S2,
                                std::size_t batch, const std::vector<double>& R,
                                const std::vector<std::uint8_t>& bootstrap_mask,
                                const Td3Config& cfg, std::mt19937_64& noise_rng) {
    const std::size_t as = actor_target.output_size();
    BatchedCache cache;
    std::vector<double> A2;
    batched_forward(actor_target, S2, batch, cache, A2, cfg.parallel_kernels);

    std::normal_distribution<double> noise(0.0, 1.0);
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t j = 0; j < as; ++j) {
            double eps = 0.0;
            if (cfg.sigma_target > 0.0)
                eps = std::clamp(noise(noise_rng) * cfg.sigma_target, -cfg.target_clip,
                                 cfg.target_clip);
            A2[b * as + j] = std::clamp(A2[b * as + j] + eps, -1.0, 1.0);
        }
    }

    const std::size_t os = S2.size() / batch;
    std::vector<double> X(batch * (os + as));
    for (std::size_t b = 0; b < batch; ++b) {
        std::copy_n(&S2[b * os], os, &X[b * (os + as)]);
        std::copy_n(&A2[b * as], as, &X[b * (os + as) + os]);
    }

    std::vector<double> q1, q2;
    batched_forward(critic1_target, X, batch, cache, q1, cfg.parallel_kernels);
    batched_forward(critic2_target, X, batch, cache, q2, cfg.parallel_kernels);

    std::vector<double> y(batch);
    for (std::size_t b = 0; b < batch; ++b) {
        const double qmin = std::min(q1[b], q2[b]);
        y[b] = R[b] + cfg.gamma * (bootstrap_mask[b] ? qmin : 0.0);
    }
    return y;
}

Td3Result td3_train(const EnvFactory& make_env, const Td3Config& cfg,
                    std::size_t total_steps, std::uint64_t seed) {
    cfg.validate();

    std::unique_ptr<Env> env = make_env();
    const std::size_t os = env->observation_size();
    const std::size_t as = env->action_size();

    std::mt19937_64 master(seed);
    const std::uint64_t actor_seed = master();
    const std::uint64_t c1_seed = master();
    const std::uint64_t c2_seed = master();
    const std::uint64_t buffer_seed = master();
    const std::uint64_t noise_seed = master();
    const std::uint64_t episode_seed = master();

    Td3Result res;
    res.actor = Mlp::make(net_widths(os, cfg.actor_hidden, as), OutputHead::kTanh, actor_seed);
    res.initial_actor = res.actor;
    res.critic1 =
        Mlp::make(net_widths(os + as, cfg.critic_hidden, 1), OutputHead::kIdentity, c1_seed);
    res.critic2 =
        Mlp::make(net_widths(os + as, cfg.critic_hidden, 1), OutputHead::kIdentity, c2_seed);
    Mlp actor_t = res.actor;
    Mlp critic1_t = res.critic1;
    Mlp critic2_t = res.critic2;

    AdamState actor_opt = AdamState::zeros_like(res.actor);
    AdamState c1_opt = AdamState::zeros_like(res.critic1);
    AdamState c2_opt = AdamState::zeros_like(res.critic2);

    ReplayBuffer buffer(cfg.buffer_capacity, buffer_seed);
    std::mt19937_64 noise_rng(noise_seed);
    std::mt19937_64 ep_rng(episode_seed);
    std::normal_distribution<double> expl_noise(0.0, 1.0);
    std::uniform_real_distribution<double> warmup_action(-1.0, 1.0);

    std::unique_ptr<Env> eval_env = make_env();

    const std::size_t B = cfg.batch_size;
    std::vector<double> S(B * os), A(B * as), R(B), S2(B * os);
    std::vector<std::uint8_t> mask(B);
    BatchedCache cacheC, cacheA;
    BatchedGradients grads;
    std::vector<double> q, dY, X(B * (os + as)), A_pi;

    std::vector<double> state;
    std::size_t last_logged = 0;

    const auto log_eval = [&]() {
        std::vector<double> returns;
        returns.reserve(cfg.eval_episodes);
        for (std::size_t i = 0; i < cfg.eval_episodes; ++i)
            returns.push_back(rollout_return(*eval_env, res.actor, kCurveSeedBase + i));
        const auto [m, sd] = mean_std(returns);
        res.curve.append(res.env_steps, m, sd);
        last_logged = res.env_steps;
    };

    while (res.env_steps < total_steps) {
        const std::uint64_t ep_seed = ep_rng() % 1000000;
        state = env->reset(ep_seed);
        res.episode_seeds.push_back(ep_seed);
        ++res.episodes;
        while (!env->episode_finished() && res.env_steps < total_steps) {
            std::vector<double> action(as);
            if (res.env_steps < cfg.warmup_steps) {
                for (double& a : action) a = warmup_action(noise_rng);
            } else {
                action = forward(res.actor, state);
                for (double& a : action)
                    a = std::clamp(a + cfg.sigma_expl * expl_noise(noise_rng), -1.0, 1.0);
            }
            TransitionRecord rec = env->step(action);
            state = rec.s_next;
            buffer.add(std::move(rec));
            ++res.env_steps;

            if (res.env_steps > cfg.warmup_steps && buffer.size() >= cfg.batch_size) {
                const std::vector<std::size_t> idx = buffer.sample_indices(B);
                for (std::size_t b = 0; b < B; ++b) {
                    const TransitionRecord& t = buffer.at(idx[b]);
                    std::copy(t.s.begin(), t.s.end(), S.begin() + static_cast<long>(b * os));
                    std::copy(t.a.begin(), t.a.end(), A.begin() + static_cast<long>(b * as));
                    R[b] = t.r;
                    std::copy(t.s_next.begin(), t.s_next.end(),
                              S2.begin() + static_cast<long>(b * os));
                    mask[b] = t.terminated ? 0 : 1;
                }
                const std::vector<double> y =
                    td3_targets(actor_t, critic1_t, critic2_t, S2, B, R, mask, cfg, noise_rng);

                for (std::size_t b = 0; b < B; ++b) {
                    std::copy_n(&S[b * os], os, &X[b * (os + as)]);
                    std::copy_n(&A[b * as], as, &X[b * (os + as) + os]);
                }
                const auto critic_step = [&](Mlp& critic, AdamState& opt) {
                    batched_forward(critic, X, B, cacheC, q, cfg.parallel_kernels);
                    double loss = 0.0;
                    dY.resize(B);
                    for (std::size_t b = 0; b < B; ++b) {
                        const double e = q[b] - y[b];
                        loss += e * e;
                        dY[b] = 2.0 * e / static_cast<double>(B);
                    }
                    loss /= static_cast<double>(B);
                    if (!std::isfinite(loss))
                        throw SimulationFault("critic loss diverged (non-finite) at update " +
                                              std::to_string(res.updates));
                    batched_backward(critic, cacheC, dY, grads, cfg.parallel_kernels);
                    GradientBundle g;
                    g.dW = std::move(grads.dW);
                    g.db = std::move(grads.db);
                    adam_update(critic, g, opt, cfg.lr);
                };
                critic_step(res.critic1, c1_opt);
                critic_step(res.critic2, c2_opt);
                ++res.updates;

                if (res.updates % cfg.policy_delay == 0) {
                    batched_forward(res.actor, S, B, cacheA, A_pi, cfg.parallel_kernels);
                    for (std::size_t b = 0; b < B; ++b) {
                        std::copy_n(&S[b * os], os, &X[b * (os + as)]);
                        std::copy_n(&A_pi[b * as], as, &X[b * (os + as) + os]);
                    }
                    batched_forward(res.critic1, X, B, cacheC, q, cfg.parallel_kernels);
                    dY.assign(B, -1.0 / static_cast<double>(B));   // ascend on Q
                    batched_backward(res.critic1, cacheC, dY, grads, cfg.parallel_kernels);
                    // upstream for the actor: action slice of the critic input gradient
                    std::vector<double> dA(B * as);
                    for (std::size_t b = 0; b < B; ++b)
                        std::copy_n(&grads.dX[b * (os + as) + os], as, &dA[b * as]);
                    batched_backward(res.actor, cacheA, dA, grads, cfg.parallel_kernels);
                    GradientBundle g;
                    g.dW = std::move(grads.dW);
                    g.db = std::move(grads.db);
                    adam_update(res.actor, g, actor_opt, cfg.lr);

                    soft_update(actor_t, res.actor, cfg.tau);
                    soft_update(critic1_t, res.critic1, cfg.tau);
                    soft_update(critic2_t, res.critic2, cfg.tau);
                }
            }

            if (res.env_steps % cfg.eval_every_steps == 0) log_eval();
        }
    }
    if (res.env_steps != last_logged) log_eval();
    return res;
}

}  // namespace rrl
