// Shipped acceptance gate: prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. Each check is self-contained and uses only
// independent recomputation as its oracle.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "rrl/cem.hpp"
#include "rrl/env.hpp"
#include "rrl/evaluate.hpp"
#include "rrl/mlp.hpp"
#include "rrl/pid.hpp"
#include "rrl/policy.hpp"
#include "rrl/rk4.hpp"
#include "rrl/td3.hpp"
#include "support/bandit_env.hpp"
#include "support/paths.hpp"
#include "support/resim.hpp"

using namespace rrl;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

Outcome pass(std::string detail) { return {true, std::move(detail)}; }
Outcome fail(std::string detail) { return {false, std::move(detail)}; }

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

// ------------------------------------------------------------- criterion 1

Outcome criterion_structural() {
    const auto t0 = Clock::now();
    const LabConfig& lab = rrl_test::lab_config();
    const ExpertBoxes& boxes = lab.boxes;

    for (int ep = 0; ep < 100; ++ep) {
        RecipeEnv env(lab, rrl_test::reward_config(3));
        env.reset(static_cast<std::uint64_t>(ep + 1));
        std::mt19937_64 rng(1000 + static_cast<std::uint64_t>(ep));
        std::uniform_real_distribution<double> unit(-1.0, 1.0);

        PhysicalState x_prev = env.observation().x;
        auto theta_prev = env.observation().theta;
        auto flags_prev = env.observation().set_flags;
        int actions = 0;
        while (!env.episode_finished()) {
            const int c = env.observation().c;
            const double a = unit(rng);
            const TransitionRecord tr = env.step({a});
            ++actions;

            const auto& obs = env.observation();
            if (c != 5 && c != 11 && c != 14) {
                if (tr.r != 0.0)
                    return fail(fmt("episode %d: set step c=%d carried reward %g", ep, c, tr.r));
                if (!(obs.x == x_prev))
                    return fail(fmt("episode %d: set step c=%d moved the physical state", ep, c));
            } else {
                x_prev = obs.x;
            }
            int flag_flips = 0;
            for (int i = 0; i < kNumTheta; ++i) {
                if (obs.set_flags[i] != flags_prev[i]) ++flag_flips;
                if (i != c - 1 && obs.theta[i] != theta_prev[i])
                    return fail(fmt("episode %d: step c=%d changed component %d", ep, c, i + 1));
            }
            if (flag_flips != 1 || !obs.set_flags[c - 1])
                return fail(fmt("episode %d: step c=%d flipped %d set flags", ep, c, flag_flips));
            if (obs.theta[c - 1] != boxes.map_action(c, a))
                return fail(fmt("episode %d: step c=%d did not store the mapped action", ep, c));
            theta_prev = obs.theta;
            flags_prev = obs.set_flags;
        }
        if (actions != kNumTheta)
            return fail(fmt("episode %d took %d agent actions instead of %d", ep, actions,
                            kNumTheta));
    }
    const double dt = seconds_since(t0);
    if (dt >= 60.0) return fail(fmt("structural suite took %.1f s (budget 60 s)", dt));
    return pass(fmt("100 episodes, zero-reward/bit-identical set steps, 14 actions each, "
                    "%.1f s",
                    dt));
}

// ------------------------------------------------------------- criterion 2

Outcome criterion_return_decomposition() {
    const LabConfig& lab = rrl_test::lab_config();
    const RewardConfig rc = rrl_test::reward_config(3);
    double worst = 0.0;
    for (int ep = 0; ep < 20; ++ep) {
        RecipeEnv env(lab, rc);
        env.reset(static_cast<std::uint64_t>(200 + ep));
        std::mt19937_64 rng(9000 + static_cast<std::uint64_t>(ep));
        std::uniform_real_distribution<double> unit(-1.0, 1.0);
        while (!env.episode_finished()) env.step({unit(rng)});

        RecipeParameters theta;
        for (int c = 1; c <= kNumTheta; ++c)
            theta = apply_set_step(lab.boxes, theta, c, env.observation().theta[c - 1]);

        const auto indep = rrl_test::resimulate(lab, rc, theta, env.initial_state());
        double indep_return = 0.0;
        for (double r : indep.rewards) indep_return += r;
        const double env_return = env.summary().episode_return;
        const double rel = std::abs(env_return - indep_return) /
                           std::max({1.0, std::abs(env_return), std::abs(indep_return)});
        worst = std::max(worst, rel);
        if (rel > 1e-9)
            return fail(fmt("episode %d: return %.12g vs re-simulated %.12g (rel %.3g)", ep,
                            env_return, indep_return, rel));
    }
    return pass(fmt("20 episodes, worst relative return mismatch %.3g (tolerance 1e-9)", worst));
}

// ------------------------------------------------------------- criterion 3

Outcome criterion_pid() {
    PidConfig cfg;
    cfg.K_P = -2.0;
    cfg.K_I = -0.01;
    cfg.setpoint = 360.0;
    cfg.u_ss = 350.0;
    cfg.output_min = -1e6;   // wide box: saturation must stay inactive
    cfg.output_max = 1e6;

    const double dt = 1.0, a = 0.05, b = 0.01, T_env = 300.0;
    double T = 390.0;
    double integral = 0.0;
    PidState st;
    double worst = 0.0;
    for (int k = 0; k < 500; ++k) {
        // independent closed-form discrete recursion
        const double e = T - cfg.setpoint;
        integral += e * dt;
        const double u_ref = cfg.u_ss + cfg.K_P * e + cfg.K_I * integral;

        const auto [u, st2] = pid_step(cfg, st, T, dt);
        st = st2;
        worst = std::max(worst, std::abs(u - u_ref));
        if (worst > 1e-8)
            return fail(fmt("step %d: controller %.12g vs recursion %.12g", k, u, u_ref));
        T += dt * (-a * (T - T_env) + b * u);
    }

    PidConfig zero = cfg;
    zero.K_P = zero.K_I = zero.K_D = 0.0;
    PidState zst;
    for (double meas : {400.0, 200.0, 360.0}) {
        const auto [u, z2] = pid_step(zero, zst, meas, dt);
        zst = z2;
        if (u != zero.u_ss) return fail(fmt("zero-gain output %.17g != u_ss %.17g", u, zero.u_ss));
    }
    return pass(fmt("500 steps, max |controller - recursion| = %.3g; zero-gain exact", worst));
}

// ------------------------------------------------------------- criterion 4

Outcome criterion_integrator() {
    const auto decay = [](const std::array<double, 1>& y) {
        return std::array<double, 1>{-y[0]};
    };
    std::array<double, 1> y{1.0};
    for (int i = 0; i < 100; ++i) y = rk4_step(decay, y, 0.01);
    const double err_fine = std::abs(y[0] - std::exp(-1.0));
    if (err_fine > 1e-6) return fail(fmt("e^-t error %.3g at dt=0.01 exceeds 1e-6", err_fine));

    const auto run = [&](double dt, int n) {
        std::array<double, 1> v{1.0};
        for (int i = 0; i < n; ++i) v = rk4_step(decay, v, dt);
        return std::abs(v[0] - std::exp(-1.0));
    };
    const double order = std::log2(run(0.1, 10) / run(0.05, 20));
    if (order < 3.8) return fail(fmt("observed convergence order %.2f < 3.8", order));

    // mass balance over a full nominal baseline batch
    const LabConfig& lab = rrl_test::lab_config();
    const KvConfig kv = KvConfig::load(rrl_test::lab_config_path());
    const RecipeParameters theta = baseline_recipe(kv, lab.boxes);
    std::mt19937_64 rng(1000001);
    const PhysicalState x0 = sample_initial_state(rng, lab.ic, lab.params);
    const auto sim = rrl_test::resimulate(lab, rrl_test::reward_config(3), theta, x0);
    const double total0 = x0.m_W + x0.m_M + x0.m_P;
    const double total1 = sim.x_end.m_W + sim.x_end.m_M + sim.x_end.m_P;
    const double fed = sim.x_end.m_acc - x0.m_acc;
    const double residual = std::abs((total1 - total0) - fed) / total1;
    if (residual > 1e-6)
        return fail(fmt("mass-balance residual %.3g over the nominal batch", residual));
    return pass(fmt("e^-t error %.2g, order %.2f, mass residual %.2g", err_fine, order,
                    residual));
}

// ------------------------------------------------------------- criterion 5

double fd_worst_rel(const std::vector<std::size_t>& widths, OutputHead head,
                    std::uint64_t seed, std::size_t n_probes) {
    Mlp net = Mlp::make(widths, head, seed);
    std::mt19937_64 rng(seed + 1);
    std::normal_distribution<double> gauss(0.0, 0.5);
    std::vector<double> x(widths.front());
    for (double& v : x) v = gauss(rng);

    const auto loss = [&](const Mlp& m) {
        double s = 0.0;
        for (double v : forward(m, x)) s += 0.5 * v * v;
        return s;
    };
    ForwardCache cache;
    const auto out = forward_cached(net, x, cache);
    const GradientBundle g = backward(net, cache, out);

    // flat views over (W, b) per layer
    std::vector<double*> params;
    std::vector<double> grads;
    for (std::size_t l = 0; l < net.n_layers(); ++l) {
        for (std::size_t k = 0; k < net.W[l].size(); ++k) {
            params.push_back(&net.W[l][k]);
            grads.push_back(g.dW[l][k]);
        }
        for (std::size_t k = 0; k < net.b[l].size(); ++k) {
            params.push_back(&net.b[l][k]);
            grads.push_back(g.db[l][k]);
        }
    }
    std::uniform_int_distribution<std::size_t> pick(0, params.size() - 1);
    const double h = 1e-6;
    double worst = 0.0;
    for (std::size_t probe = 0; probe < n_probes; ++probe) {
        const std::size_t k = pick(rng);
        const double saved = *params[k];
        *params[k] = saved + h;
        const double up = loss(net);
        *params[k] = saved - h;
        const double dn = loss(net);
        *params[k] = saved;
        const double fd = (up - dn) / (2.0 * h);
        const double rel =
            std::abs(fd - grads[k]) / std::max({1.0, std::abs(fd), std::abs(grads[k])});
        worst = std::max(worst, rel);
    }
    return worst;
}

Outcome criterion_gradients() {
    const double w1 = fd_worst_rel({41, 50, 50, 1}, OutputHead::kIdentity, 301, 80);
    const double w2 = fd_worst_rel({40, 50, 25, 10, 1}, OutputHead::kTanh, 302, 80);
    const double worst = std::max(w1, w2);
    if (worst > 1e-4)
        return fail(fmt("worst relative gradient error %.3g exceeds 1e-4", worst));
    return pass(fmt("50-50 worst %.2g, 50-25-10 worst %.2g (tolerance 1e-4)", w1, w2));
}

// ------------------------------------------------------------- criterion 6

struct TrainerArtifacts {
    std::vector<std::uint64_t> training_seeds;
};

Outcome criterion_trainers(TrainerArtifacts& art) {
    Td3Config td3;
    td3.actor_hidden = {16};
    td3.critic_hidden = {16};
    td3.lr = 1e-3;
    td3.batch_size = 64;
    td3.buffer_capacity = 5000;
    td3.sigma_expl = 0.3;
    td3.warmup_steps = 300;
    td3.eval_every_steps = 1000;
    td3.eval_episodes = 2;
    const std::size_t td3_steps = 4000;   // budget: <= 5000 env steps

    const Td3Result t1 = td3_train(rrl_test::bandit_factory(1.0), td3, td3_steps, 7);
    const Td3Result t2 = td3_train(rrl_test::bandit_factory(1.0), td3, td3_steps, 7);
    const double a_td3 = forward(t1.actor, {0.0})[0];
    if (std::abs(a_td3 - 0.5) > 0.05)
        return fail(fmt("td3 bandit action %.4f not within 0.5 +/- 0.05", a_td3));
    if (!(t1.actor == t2.actor && t1.critic1 == t2.critic1 && t1.critic2 == t2.critic2))
        return fail("td3 rerun with the same seed is not bit-identical");

    CemConfig cem;
    cem.hidden = {8};
    cem.population = 32;
    cem.init_noise = 0.5;
    cem.noise_decay = 0.8;
    cem.generations = 20;   // budget: <= 20 generations
    const CemResult c1 = cem_train(rrl_test::bandit_factory(1.0), cem, 11);
    const CemResult c2 = cem_train(rrl_test::bandit_factory(1.0), cem, 11);
    const double a_cem = forward(c1.policy, {0.0})[0];
    if (std::abs(a_cem - 0.5) > 0.05)
        return fail(fmt("cem bandit action %.4f not within 0.5 +/- 0.05", a_cem));
    if (!(c1.policy == c2.policy)) return fail("cem rerun with the same seed is not bit-identical");

    art.training_seeds.insert(art.training_seeds.end(), t1.episode_seeds.begin(),
                              t1.episode_seeds.end());
    art.training_seeds.insert(art.training_seeds.end(), c1.episode_seeds.begin(),
                              c1.episode_seeds.end());
    return pass(fmt("td3 action %.3f in %zu steps, cem action %.3f in %zu generations; "
                    "reruns bit-identical",
                    a_td3, td3_steps, a_cem, cem.generations));
}

// ------------------------------------------------------------- criterion 7

Outcome criterion_baseline(EvalMetrics& baseline_out) {
    const LabConfig& lab = rrl_test::lab_config();
    const KvConfig kv = KvConfig::load(rrl_test::lab_config_path());
    const FixedRecipePolicy policy(lab.boxes, baseline_recipe(kv, lab.boxes));
    const EvalMetrics m = evaluate(policy, rrl_test::recipe_env_factory(3), 10, 1000000);
    baseline_out = m;
    if (m.completion_rate != 1.0)
        return fail(fmt("baseline completed only %.0f%% of the 10 evaluation seeds",
                        100.0 * m.completion_rate));
    if (m.mean_ncv_rel > 0.5)
        return fail(fmt("baseline n_CV_rel %.3f%% exceeds 0.5%%", m.mean_ncv_rel));
    return pass(fmt("terminates on 10/10 seeds, %.2f +/- %.2f h, n_CV_rel %.3f%%",
                    m.mean_t_batch_h, m.std_t_batch_h, m.mean_ncv_rel));
}

// ------------------------------------------------------------- criterion 8

Outcome criterion_headline(const EvalMetrics& baseline, TrainerArtifacts& art) {
    if (baseline.episodes == 0) return fail("baseline metrics unavailable (criterion 7 failed)");
    const auto t0 = Clock::now();
    CemConfig cfg;   // shipped defaults: 24 x 12 generations = 288 episodes
    const CemResult res = cem_train(rrl_test::recipe_env_factory(2), cfg, 7);
    if (res.episodes > 300)
        return fail(fmt("training consumed %zu episodes (budget 300)", res.episodes));
    art.training_seeds.insert(art.training_seeds.end(), res.episode_seeds.begin(),
                              res.episode_seeds.end());

    const NetworkPolicy policy(res.policy);
    const EvalMetrics m = evaluate(policy, rrl_test::recipe_env_factory(2), 10, 1000000);
    const double minutes = seconds_since(t0) / 60.0;

    if (m.completion_rate != 1.0)
        return fail(fmt("policy completed only %.0f%% of the evaluation seeds",
                        100.0 * m.completion_rate));
    if (m.mean_ncv != 0.0)
        return fail(fmt("policy violates constraints (mean n_CV %.2f)", m.mean_ncv));
    const double improvement = 1.0 - m.mean_t_batch_h / baseline.mean_t_batch_h;
    if (improvement < 0.10)
        return fail(fmt("policy %.3f h vs baseline %.3f h: %.1f%% better (need >= 10%%)",
                        m.mean_t_batch_h, baseline.mean_t_batch_h, 100.0 * improvement));
    if (minutes > 30.0) return fail(fmt("run took %.1f min (budget 30 min)", minutes));
    return pass(fmt("%zu episodes: %.2f h vs baseline %.2f h (%.0f%% faster), zero "
                    "violations, %.1f min",
                    res.episodes, m.mean_t_batch_h, baseline.mean_t_batch_h,
                    100.0 * improvement, minutes));
}

// ------------------------------------------------------------- criterion 9

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) return "<missing:" + path + ">";
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Outcome criterion_reproducibility(const TrainerArtifacts& art) {
    const std::string cli = RRL_CLI_PATH;
    const std::string dir = rrl_test::scratch_dir("acceptance");
    const auto run = [&](const std::string& args) {
        const std::string cmd = cli + " " + args + " > " + dir + "/cli.log 2>&1";
        const int rc = std::system(cmd.c_str());
        return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    };

    const std::string train =
        "train --algo cem --env recipe --scenario 3 --seed 4242 --population 4 "
        "--generations 2 --hidden 4 --out ";
    if (run(train + dir + "/a") != 0) return fail("training command failed: " + slurp(dir + "/cli.log"));
    if (run("train --frozen-config " + dir + "/a/config.json --out " + dir + "/b") != 0)
        return fail("frozen-config rerun failed: " + slurp(dir + "/cli.log"));
    for (const char* name : {"config.json", "weights.json", "curve.csv", "train_metrics.json"}) {
        if (slurp(dir + "/a/" + name) != slurp(dir + "/b/" + name))
            return fail(fmt("frozen-config rerun changed %s", name));
    }

    if (art.training_seeds.empty()) return fail("no training seeds were recorded");
    std::uint64_t max_train = 0;
    for (std::uint64_t s : art.training_seeds) max_train = std::max(max_train, s);
    const std::uint64_t min_eval = 1000000 + 1;   // evaluation windows start here
    if (max_train >= min_eval)
        return fail(fmt("training seed %llu collides with the evaluation window",
                        static_cast<unsigned long long>(max_train)));
    return pass(fmt("frozen rerun bit-identical (4 artifacts); %zu training seeds < %llu <= "
                    "evaluation seeds",
                    art.training_seeds.size(), static_cast<unsigned long long>(min_eval)));
}

}  // namespace

int main() {
    struct Entry {
        int number;
        const char* title;
        Outcome outcome;
    };
    std::vector<Entry> entries;
    TrainerArtifacts art;
    EvalMetrics baseline;

    const auto guard = [](auto&& fn) -> Outcome {
        try {
            return fn();
        } catch (const std::exception& e) {
            return fail(std::string("unexpected exception: ") + e.what());
        }
    };

    entries.push_back({1, "recipe MDP structure",
                       guard([&] { return criterion_structural(); })});
    entries.push_back({2, "return decomposition",
                       guard([&] { return criterion_return_decomposition(); })});
    entries.push_back({3, "pid analytic check", guard([&] { return criterion_pid(); })});
    entries.push_back({4, "integrator checks", guard([&] { return criterion_integrator(); })});
    entries.push_back({5, "gradient check", guard([&] { return criterion_gradients(); })});
    entries.push_back({6, "trainer sanity", guard([&] { return criterion_trainers(art); })});
    entries.push_back({7, "baseline viability", guard([&] { return criterion_baseline(baseline); })});
    entries.push_back({8, "desk-scale headline",
                       guard([&] { return criterion_headline(baseline, art); })});
    entries.push_back({9, "seed hygiene and reproducibility",
                       guard([&] { return criterion_reproducibility(art); })});

    int failures = 0;
    for (const Entry& e : entries) {
        std::printf("%s criterion %d (%s): %s\n", e.outcome.pass ? "PASS" : "FAIL", e.number,
                    e.title, e.outcome.detail.c_str());
        if (!e.outcome.pass) ++failures;
    }
    if (failures > 0) std::printf("%d of %zu criteria failed\n", failures, entries.size());
    return failures == 0 ? 0 : 1;
}
