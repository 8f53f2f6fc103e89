#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rrl/cem.hpp"
#include "rrl/env.hpp"
#include "rrl/errors.hpp"
#include "rrl/evaluate.hpp"
#include "rrl/grid.hpp"
#include "rrl/io.hpp"
#include "rrl/policy.hpp"
#include "rrl/td3.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string default_config(const char* name) {
    return std::string(RRL_DEFAULT_CONFIG_DIR) + "/" + name;
}

std::string now_iso8601_utc() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::optional<std::uint64_t> env_seed_override() {
    const char* v = std::getenv("RECIPE_RL_SEED");
    if (v == nullptr) return std::nullopt;
    char* end = nullptr;
    errno = 0;
    const unsigned long long parsed = std::strtoull(v, &end, 10);
    if (errno != 0 || end == v || *end != '\0')
        throw rrl::ConfigError(std::string("RECIPE_RL_SEED is not an unsigned integer: ") + v);
    return parsed;
}

// Frozen run config: restores any option the user did not pass explicitly.
struct Frozen {
    ordered_json j;
    bool loaded = false;

    void load(const std::string& path, const std::string& command) {
        std::ifstream in(path);
        if (!in) throw rrl::ConfigError("cannot read frozen config: " + path);
        try {
            j = ordered_json::parse(in);
        } catch (const std::exception& e) {
            throw rrl::ConfigError("malformed frozen config " + path + ": " + e.what());
        }
        if (!j.contains("command") || j["command"] != command)
            throw rrl::ConfigError("frozen config " + path + " is not a '" + command +
                                   "' config");
        loaded = true;
    }

    template <typename T>
    void restore(const CLI::App* cmd, const char* flag, const char* key, T& var) const {
        if (!loaded || cmd->count(flag) > 0) return;
        if (!j.contains(key)) return;
        try {
            var = j.at(key).get<T>();
        } catch (const std::exception& e) {
            throw rrl::ConfigError(std::string("frozen config key '") + key + "': " + e.what());
        }
    }
};

// Precedence for the command's primary seed: flag > RECIPE_RL_SEED > frozen file.
void resolve_seed(const CLI::App* cmd, const char* flag, const Frozen& frozen, const char* key,
                  std::uint64_t& var) {
    if (cmd->count(flag) > 0) return;
    if (const auto env = env_seed_override()) {
        var = *env;
        return;
    }
    frozen.restore(cmd, flag, key, var);
}

std::string resolve_created_at(const Frozen& frozen) {
    if (frozen.loaded && frozen.j.contains("created_at"))
        return frozen.j.at("created_at").get<std::string>();
    return now_iso8601_utc();
}

void write_config_json(const std::string& out_dir, const ordered_json& j) {
    std::ofstream out(out_dir + "/config.json");
    if (!out) throw rrl::ConfigError("cannot open for writing: " + out_dir + "/config.json");
    out << j.dump(2) << '\n';
}

rrl::RewardConfig reward_from_lab(const rrl::KvConfig& lab_kv, const rrl::ModelParameters& p,
                                  int scenario) {
    rrl::RewardConfig rc;
    rc.scenario = static_cast<rrl::RewardScenario>(scenario);
    rc.w_mP = lab_kv.get_or("reward_w_mP", 1.0 / p.m_acc_max);
    rc.w_t = lab_kv.get_or("reward_w_t", 1.0 / 3600.0);
    rc.lambda_cv = lab_kv.get_or("reward_lambda_cv", 10.0);
    rc.lambda_du = lab_kv.get_or("reward_lambda_du", 0.1);
    rc.lambda_track = lab_kv.get_or("reward_lambda_track", 1e-4);
    rc.gamma = lab_kv.get_or("reward_gamma", 0.99);
    rc.magnitude_cv = lab_kv.get_or("reward_magnitude_cv", 0.0) != 0.0;
    rc.track_in_direct = lab_kv.get_or("reward_track_in_direct", 0.0) != 0.0;
    return rc;
}

ordered_json reward_json(const rrl::RewardConfig& rc) {
    ordered_json j;
    j["scenario"] = static_cast<int>(rc.scenario);
    j["w_mP"] = rc.w_mP;
    j["w_t"] = rc.w_t;
    j["lambda_cv"] = rc.lambda_cv;
    j["lambda_du"] = rc.lambda_du;
    j["lambda_track"] = rc.lambda_track;
    j["gamma"] = rc.gamma;
    j["magnitude_cv"] = rc.magnitude_cv;
    j["track_in_direct"] = rc.track_in_direct;
    return j;
}

struct Lab {
    rrl::KvConfig lab_kv;
    rrl::LabConfig cfg;
};

Lab load_lab(const std::string& reactor_file, const std::string& lab_file) {
    return {rrl::KvConfig::load(lab_file), rrl::LabConfig::load(reactor_file, lab_file)};
}

rrl::EnvFactory recipe_factory(const rrl::LabConfig& lab, const rrl::RewardConfig& rc) {
    const auto shared = std::make_shared<const rrl::LabConfig>(lab);
    return [shared, rc] { return std::make_unique<rrl::RecipeEnv>(*shared, rc); };
}

rrl::EnvFactory direct_factory(const rrl::LabConfig& lab, const rrl::RewardConfig& rc) {
    const auto shared = std::make_shared<const rrl::LabConfig>(lab);
    return [shared, rc] { return std::make_unique<rrl::DirectEnv>(*shared, rc); };
}

rrl::EnvFactory make_factory(const std::string& kind, const rrl::LabConfig& lab,
                             const rrl::RewardConfig& rc) {
    if (kind == "recipe") return recipe_factory(lab, rc);
    if (kind == "direct") return direct_factory(lab, rc);
    throw rrl::ConfigError("unknown environment kind: " + kind);
}

void write_episode_artifacts(const std::string& out_dir,
                             const std::vector<rrl::EvalEpisode>& episodes,
                             bool recipe_columns) {
    for (std::size_t i = 0; i < episodes.size(); ++i) {
        char tag[16];
        std::snprintf(tag, sizeof(tag), "%03zu", i + 1);
        const std::string base = out_dir + "/episode_" + tag;
        rrl::write_episode_summary_json(base + ".json", episodes[i].summary);
        rrl::write_trajectory_csv(base + "_trajectory.csv", episodes[i].x0, episodes[i].logs,
                                  recipe_columns);
        rrl::write_transitions_csv(base + "_transitions.csv", episodes[i].transitions);
    }
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string part;
    std::stringstream ss(s);
    while (std::getline(ss, part, sep))
        if (!part.empty()) out.push_back(part);
    return out;
}

template <typename T, typename Fn>
std::vector<T> parse_list(const std::string& s, char sep, Fn convert, const char* what) {
    std::vector<T> out;
    for (const std::string& part : split(s, sep)) {
        try {
            out.push_back(convert(part));
        } catch (const rrl::ConfigError&) {
            throw;
        } catch (const std::exception&) {
            throw rrl::ConfigError(std::string("bad ") + what + " value: " + part);
        }
    }
    if (out.empty()) throw rrl::ConfigError(std::string("empty ") + what + " list: " + s);
    return out;
}

// ---------------------------------------------------------------- baseline

struct BaselineOpts {
    std::string reactor_file = default_config("reactor_params.txt");
    std::string lab_file = default_config("recipe_lab.txt");
    std::string out;
    std::string frozen_path;
    std::uint64_t eval_seed_base = 1000000;
    std::size_t episodes = 10;
    int scenario = 3;
    std::size_t workers = 1;
};

int run_baseline(const BaselineOpts& o, const Frozen& frozen) {
    const Lab lab = load_lab(o.reactor_file, o.lab_file);
    const rrl::RewardConfig rc = reward_from_lab(lab.lab_kv, lab.cfg.params, o.scenario);
    const rrl::RecipeParameters theta = rrl::baseline_recipe(lab.lab_kv, lab.cfg.boxes);
    const rrl::FixedRecipePolicy policy(lab.cfg.boxes, theta);

    fs::create_directories(o.out);
    const std::vector<rrl::EvalEpisode> episodes = rrl::run_episodes(
        policy, recipe_factory(lab.cfg, rc), o.episodes, o.eval_seed_base, o.workers);
    const rrl::EvalMetrics metrics = rrl::aggregate(episodes);

    ordered_json j;
    j["command"] = "baseline";
    j["created_at"] = resolve_created_at(frozen);
    j["reactor_config"] = o.reactor_file;
    j["lab_config"] = o.lab_file;
    j["eval_seed_base"] = o.eval_seed_base;
    j["episodes"] = o.episodes;
    j["scenario"] = o.scenario;
    j["reward"] = reward_json(rc);
    ordered_json jt = ordered_json::array();
    for (int c = 1; c <= rrl::kNumTheta; ++c) jt.push_back(theta.value(c));
    j["baseline_theta"] = jt;
    write_config_json(o.out, j);

    write_episode_artifacts(o.out, episodes, true);
    rrl::write_eval_metrics_json(o.out + "/metrics.json", metrics);

    std::printf("baseline: %zu episodes  t_batch %.3f +/- %.3f h  n_cv_rel %.4f %%  "
                "completion %.0f %%\n",
                metrics.episodes, metrics.mean_t_batch_h, metrics.std_t_batch_h,
                metrics.mean_ncv_rel, 100.0 * metrics.completion_rate);
    return 0;
}

// ------------------------------------------------------------------- train

struct TrainOpts {
    std::string reactor_file = default_config("reactor_params.txt");
    std::string lab_file = default_config("recipe_lab.txt");
    std::string out;
    std::string frozen_path;
    std::string env_kind = "recipe";
    std::string algo = "td3";
    int scenario = 3;
    std::uint64_t seed = 42;
    std::size_t steps = 4200;
    std::string actor_arch = "50-50";
    std::string critic_arch = "50-50";
    double lr = 3e-4;
    std::size_t batch = 256;
    std::size_t buffer = 10000;
    double sigma_expl = 0.1;
    std::size_t warmup = 1000;
    std::size_t eval_every = 700;
    std::size_t curve_episodes = 3;
    std::size_t population = 24;
    double elite_frac = 0.25;
    double init_noise = 0.5;
    double noise_decay = 0.9;
    std::size_t episodes_per_candidate = 1;
    std::size_t generations = 12;
    std::string hidden = "16";
    std::size_t workers = 1;
};

int run_train(const TrainOpts& o, const Frozen& frozen) {
    const Lab lab = load_lab(o.reactor_file, o.lab_file);
    const rrl::RewardConfig rc = reward_from_lab(lab.lab_kv, lab.cfg.params, o.scenario);
    const rrl::EnvFactory factory = make_factory(o.env_kind, lab.cfg, rc);
    const std::string created_at = resolve_created_at(frozen);

    fs::create_directories(o.out);
    ordered_json j;
    j["command"] = "train";
    j["created_at"] = created_at;
    j["reactor_config"] = o.reactor_file;
    j["lab_config"] = o.lab_file;
    j["env"] = o.env_kind;
    j["algo"] = o.algo;
    j["scenario"] = o.scenario;
    j["seed"] = o.seed;
    j["reward"] = reward_json(rc);

    ordered_json metrics;
    if (o.algo == "td3") {
        rrl::Td3Config cfg;
        cfg.actor_hidden = rrl::parse_arch_label(o.actor_arch);
        cfg.critic_hidden = rrl::parse_arch_label(o.critic_arch);
        cfg.lr = o.lr;
        cfg.batch_size = o.batch;
        cfg.buffer_capacity = o.buffer;
        cfg.sigma_expl = o.sigma_expl;
        cfg.warmup_steps = o.warmup;
        cfg.eval_every_steps = o.eval_every;
        cfg.eval_episodes = o.curve_episodes;

        j["steps"] = o.steps;
        j["actor_arch"] = o.actor_arch;
        j["critic_arch"] = o.critic_arch;
        j["lr"] = cfg.lr;
        j["batch"] = cfg.batch_size;
        j["buffer"] = cfg.buffer_capacity;
        j["sigma_expl"] = cfg.sigma_expl;
        j["sigma_target"] = cfg.sigma_target;
        j["target_clip"] = cfg.target_clip;
        j["policy_delay"] = cfg.policy_delay;
        j["tau"] = cfg.tau;
        j["warmup"] = cfg.warmup_steps;
        j["eval_every"] = cfg.eval_every_steps;
        j["curve_episodes"] = cfg.eval_episodes;
        write_config_json(o.out, j);

        rrl::Td3Result res = rrl::td3_train(factory, cfg, o.steps, o.seed);
        rrl::save_weights(res.actor, o.out + "/weights.json", o.seed, created_at);
        rrl::save_weights(res.critic1, o.out + "/critic1.json", o.seed, created_at);
        rrl::save_weights(res.critic2, o.out + "/critic2.json", o.seed, created_at);
        rrl::write_learning_curve_csv(o.out + "/curve.csv", res.curve);

        metrics["algorithm"] = "td3";
        metrics["env_steps"] = res.env_steps;
        metrics["episodes"] = res.episodes;
        metrics["updates"] = res.updates;
        metrics["final_mean_return"] = res.curve.points.back().mean_return;
    } else if (o.algo == "cem") {
        rrl::CemConfig cfg;
        cfg.hidden = rrl::parse_arch_label(o.hidden);
        cfg.population = o.population;
        cfg.elite_fraction = o.elite_frac;
        cfg.init_noise = o.init_noise;
        cfg.noise_decay = o.noise_decay;
        cfg.episodes_per_candidate = o.episodes_per_candidate;
        cfg.generations = o.generations;
        cfg.workers = o.workers;

        j["hidden"] = o.hidden;
        j["population"] = cfg.population;
        j["elite_frac"] = cfg.elite_fraction;
        j["init_noise"] = cfg.init_noise;
        j["noise_decay"] = cfg.noise_decay;
        j["episodes_per_candidate"] = cfg.episodes_per_candidate;
        j["generations"] = cfg.generations;
        write_config_json(o.out, j);

        rrl::CemResult res = rrl::cem_train(factory, cfg, o.seed);
        rrl::save_weights(res.policy, o.out + "/weights.json", o.seed, created_at);
        rrl::write_learning_curve_csv(o.out + "/curve.csv", res.curve);

        metrics["algorithm"] = "cem";
        metrics["env_steps"] = res.env_steps;
        metrics["episodes"] = res.episodes;
        metrics["final_mean_return"] = res.curve.points.back().mean_return;
    } else {
        throw rrl::ConfigError("unknown algorithm: " + o.algo);
    }

    std::ofstream mj(o.out + "/train_metrics.json");
    if (!mj) throw rrl::ConfigError("cannot open for writing: " + o.out + "/train_metrics.json");
    mj << metrics.dump(2) << '\n';

    std::printf("train: %s on %s env, scenario %d, seed %llu -> %s/weights.json\n",
                o.algo.c_str(), o.env_kind.c_str(), o.scenario,
                static_cast<unsigned long long>(o.seed), o.out.c_str());
    return 0;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateOpts {
    std::string reactor_file = default_config("reactor_params.txt");
    std::string lab_file = default_config("recipe_lab.txt");
    std::string out;
    std::string frozen_path;
    std::string weights;
    std::string env_kind = "recipe";
    int scenario = 3;
    std::uint64_t eval_seed_base = 1000000;
    std::size_t episodes = 10;
    std::size_t workers = 1;
};

int run_evaluate(const EvaluateOpts& o, const Frozen& frozen) {
    const Lab lab = load_lab(o.reactor_file, o.lab_file);
    const rrl::RewardConfig rc = reward_from_lab(lab.lab_kv, lab.cfg.params, o.scenario);
    const rrl::EnvFactory factory = make_factory(o.env_kind, lab.cfg, rc);

    const rrl::WeightsFile wf = rrl::load_weights(o.weights, rrl::OutputHead::kTanh);
    const std::unique_ptr<rrl::Env> probe = factory();
    if (wf.net.input_size() != probe->observation_size() ||
        wf.net.output_size() != probe->action_size()) {
        std::string arch = "[";
        for (std::size_t i = 0; i < wf.net.widths.size(); ++i)
            arch += (i ? "," : "") + std::to_string(wf.net.widths[i]);
        arch += "]";
        throw rrl::ConfigError(
            "weights " + o.weights + " have architecture " + arch + " but the " + o.env_kind +
            " environment needs input " + std::to_string(probe->observation_size()) +
            " / output " + std::to_string(probe->action_size()));
    }
    const rrl::NetworkPolicy policy(wf.net);

    fs::create_directories(o.out);
    ordered_json j;
    j["command"] = "evaluate";
    j["created_at"] = resolve_created_at(frozen);
    j["reactor_config"] = o.reactor_file;
    j["lab_config"] = o.lab_file;
    j["weights"] = o.weights;
    j["env"] = o.env_kind;
    j["scenario"] = o.scenario;
    j["eval_seed_base"] = o.eval_seed_base;
    j["episodes"] = o.episodes;
    j["reward"] = reward_json(rc);
    write_config_json(o.out, j);

    const std::vector<rrl::EvalEpisode> episodes =
        rrl::run_episodes(policy, factory, o.episodes, o.eval_seed_base, o.workers);
    const rrl::EvalMetrics metrics = rrl::aggregate(episodes);
    write_episode_artifacts(o.out, episodes, o.env_kind == "recipe");
    rrl::write_eval_metrics_json(o.out + "/metrics.json", metrics);

    std::printf("evaluate: %zu episodes  t_batch %.3f +/- %.3f h  n_cv_rel %.4f %%  "
                "completion %.0f %%\n",
                metrics.episodes, metrics.mean_t_batch_h, metrics.std_t_batch_h,
                metrics.mean_ncv_rel, 100.0 * metrics.completion_rate);
    return 0;
}

// -------------------------------------------------------------------- grid

struct GridOpts {
    std::string reactor_file = default_config("reactor_params.txt");
    std::string lab_file = default_config("recipe_lab.txt");
    std::string out;
    std::string frozen_path;
    std::string algos = "td3";
    std::string archs = "50-50;50-25-10";
    std::string batches = "512,4096";
    std::string lrs = "0.0003,0.00001";
    std::string noises = "0,0.1";
    std::string buffers = "1000000,100000,10000";
    std::string scenarios = "1,2,3";
    std::uint64_t seed_base = 0;
    std::uint64_t eval_seed_base = 1000000;
    std::size_t eval_episodes = 10;
    std::size_t td3_steps = 2800;
    std::size_t td3_warmup = 1000;
    std::size_t td3_eval_every = 700;
    std::size_t cem_population = 24;
    std::size_t cem_generations = 12;
    std::size_t cem_episodes_per_candidate = 1;
    std::size_t max_cells = 0;
    std::size_t workers = 1;
};

int run_grid_cmd(const GridOpts& o, const Frozen& frozen) {
    const Lab lab = load_lab(o.reactor_file, o.lab_file);

    rrl::GridSpec spec;
    spec.algorithms = split(o.algos, ',');
    spec.archs = parse_list<std::vector<std::size_t>>(
        o.archs, ';', [](const std::string& s) { return rrl::parse_arch_label(s); }, "arch");
    spec.batch_sizes = parse_list<std::size_t>(
        o.batches, ',', [](const std::string& s) { return std::stoul(s); }, "batch");
    spec.learning_rates = parse_list<double>(
        o.lrs, ',', [](const std::string& s) { return std::stod(s); }, "lr");
    spec.noises = parse_list<double>(
        o.noises, ',', [](const std::string& s) { return std::stod(s); }, "noise");
    spec.buffer_sizes = parse_list<std::size_t>(
        o.buffers, ',', [](const std::string& s) { return std::stoul(s); }, "buffer");
    spec.scenarios = parse_list<int>(
        o.scenarios, ',', [](const std::string& s) { return std::stoi(s); }, "scenario");

    rrl::GridBudget budget;
    budget.td3.warmup_steps = o.td3_warmup;
    budget.td3.eval_every_steps = o.td3_eval_every;
    budget.td3_total_steps = o.td3_steps;
    budget.cem.population = o.cem_population;
    budget.cem.generations = o.cem_generations;
    budget.cem.episodes_per_candidate = o.cem_episodes_per_candidate;
    budget.eval_episodes = o.eval_episodes;
    budget.eval_base_seed = o.eval_seed_base;
    budget.seed_base = o.seed_base;
    budget.workers = o.workers;
    budget.max_cells = o.max_cells;
    budget.created_at = resolve_created_at(frozen);

    fs::create_directories(o.out);
    ordered_json j;
    j["command"] = "grid";
    j["created_at"] = budget.created_at;
    j["reactor_config"] = o.reactor_file;
    j["lab_config"] = o.lab_file;
    j["algos"] = o.algos;
    j["archs"] = o.archs;
    j["batches"] = o.batches;
    j["lrs"] = o.lrs;
    j["noises"] = o.noises;
    j["buffers"] = o.buffers;
    j["scenarios"] = o.scenarios;
    j["seed_base"] = o.seed_base;
    j["eval_seed_base"] = o.eval_seed_base;
    j["eval_episodes"] = o.eval_episodes;
    j["td3_steps"] = o.td3_steps;
    j["td3_warmup"] = o.td3_warmup;
    j["td3_eval_every"] = o.td3_eval_every;
    j["cem_population"] = o.cem_population;
    j["cem_generations"] = o.cem_generations;
    j["cem_episodes_per_candidate"] = o.cem_episodes_per_candidate;
    j["max_cells"] = o.max_cells;
    write_config_json(o.out, j);

    const auto env_for_scenario = [&](int scenario) {
        return recipe_factory(lab.cfg, reward_from_lab(lab.lab_kv, lab.cfg.params, scenario));
    };
    const rrl::GridOutcome outcome = rrl::run_grid(spec, budget, env_for_scenario, o.out);

    std::printf("grid: %zu ranked rows (%zu trained now, %zu resumed, %zu failed) -> %s\n",
                outcome.rows.size(), outcome.ran - outcome.failures.size(), outcome.resumed,
                outcome.failures.size(), (o.out + "/results.csv").c_str());
    for (const auto& [id, msg] : outcome.failures)
        std::fprintf(stderr, "grid: cell %zu failed: %s\n", id, msg.c_str());
    return outcome.rows.empty() ? 1 : 0;
}

// ---------------------------------------------------------------- simulate

struct SimulateOpts {
    std::string reactor_file = default_config("reactor_params.txt");
    std::string lab_file = default_config("recipe_lab.txt");
    std::string out;
    std::string frozen_path;
    std::string input;
    std::uint64_t seed = 123;
};

int run_simulate(const SimulateOpts& o, const Frozen& frozen) {
    const Lab lab = load_lab(o.reactor_file, o.lab_file);
    const rrl::ModelParameters& p = lab.cfg.params;
    const std::vector<rrl::ControlInput> raw = rrl::read_input_csv(o.input);

    std::vector<rrl::ControlInput> inputs;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        try {
            inputs.push_back(rrl::make_control_input(raw[i].m_dot_feed, raw[i].T_J_in,
                                                     raw[i].T_CW_EHE_in, p));
        } catch (const rrl::ContractViolation& e) {
            throw rrl::ConfigError("input row " + std::to_string(i + 1) + " of " + o.input +
                                   ": " + e.what());
        }
    }

    std::mt19937_64 rng(o.seed);
    const rrl::PhysicalState x0 = rrl::sample_initial_state(rng, lab.cfg.ic, p);

    std::vector<rrl::IntervalLog> logs;
    rrl::PhysicalState x = x0;
    int n_cv = 0;
    double t_s = 0.0;
    for (const rrl::ControlInput& u : inputs) {
        x = rrl::step_control_interval(x, u, p);
        t_s += p.control_interval_s;
        const int nv = rrl::check_constraints(x, u, p).n_violated;
        n_cv += nv;
        logs.push_back({t_s, x, u, nv, 0, 0, ""});
    }

    fs::create_directories(o.out);
    ordered_json j;
    j["command"] = "simulate";
    j["created_at"] = resolve_created_at(frozen);
    j["reactor_config"] = o.reactor_file;
    j["lab_config"] = o.lab_file;
    j["input"] = o.input;
    j["seed"] = o.seed;
    write_config_json(o.out, j);

    rrl::write_trajectory_csv(o.out + "/trajectory.csv", x0, logs, false);

    ordered_json s;
    s["intervals"] = logs.size();
    s["time_s"] = t_s;
    s["n_cv"] = n_cv;
    s["final_conversion"] = (x.m_P + x.m_M) > 0.0 ? rrl::conversion(x) : 0.0;
    std::ofstream sj(o.out + "/summary.json");
    if (!sj) throw rrl::ConfigError("cannot open for writing: " + o.out + "/summary.json");
    sj << s.dump(2) << '\n';

    std::printf("simulate: %zu intervals, %d violations -> %s/trajectory.csv\n", logs.size(),
                n_cv, o.out.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Recipe-based reinforcement learning lab for a semi-batch "
                 "polymerization reactor"};
    app.require_subcommand(1);

    BaselineOpts bo;
    CLI::App* cb = app.add_subcommand("baseline", "Evaluate the fixed expert recipe");
    cb->add_option("--reactor-config", bo.reactor_file, "Reactor parameter file");
    cb->add_option("--lab-config", bo.lab_file, "Lab (recipe/cascade/boxes) file");
    cb->add_option("--out", bo.out, "Output directory")->required();
    cb->add_option("--frozen-config", bo.frozen_path, "Restore options from a run's config.json");
    cb->add_option("--seed", bo.eval_seed_base, "Evaluation seed base");
    cb->add_option("--episodes", bo.episodes, "Number of evaluation episodes");
    cb->add_option("--scenario", bo.scenario, "Reward scenario")->check(CLI::Range(1, 3));
    cb->add_option("--workers", bo.workers, "Parallel episode workers");

    TrainOpts to;
    CLI::App* ct = app.add_subcommand("train", "Train a policy with TD3 or CEM");
    ct->add_option("--reactor-config", to.reactor_file, "Reactor parameter file");
    ct->add_option("--lab-config", to.lab_file, "Lab (recipe/cascade/boxes) file");
    ct->add_option("--out", to.out, "Output directory")->required();
    ct->add_option("--frozen-config", to.frozen_path, "Restore options from a run's config.json");
    ct->add_option("--env", to.env_kind, "Environment: recipe | direct")
        ->check(CLI::IsMember({"recipe", "direct"}));
    ct->add_option("--algo", to.algo, "Algorithm: td3 | cem")
        ->check(CLI::IsMember({"td3", "cem"}));
    ct->add_option("--scenario", to.scenario, "Reward scenario")->check(CLI::Range(1, 3));
    ct->add_option("--seed", to.seed, "Training seed");
    ct->add_option("--steps", to.steps, "TD3 environment-step budget");
    ct->add_option("--actor-arch", to.actor_arch, "TD3 actor hidden widths, e.g. 50-50");
    ct->add_option("--critic-arch", to.critic_arch, "TD3 critic hidden widths");
    ct->add_option("--lr", to.lr, "TD3 learning rate");
    ct->add_option("--batch", to.batch, "TD3 batch size");
    ct->add_option("--buffer", to.buffer, "TD3 replay capacity");
    ct->add_option("--noise", to.sigma_expl, "TD3 exploration noise sigma");
    ct->add_option("--warmup", to.warmup, "TD3 warmup steps (uniform random actions)");
    ct->add_option("--eval-every", to.eval_every, "TD3 curve cadence in env steps");
    ct->add_option("--curve-episodes", to.curve_episodes, "Episodes per curve point");
    ct->add_option("--population", to.population, "CEM population size");
    ct->add_option("--elite-frac", to.elite_frac, "CEM elite fraction");
    ct->add_option("--init-noise", to.init_noise, "CEM initial parameter noise");
    ct->add_option("--noise-decay", to.noise_decay, "CEM noise decay per generation");
    ct->add_option("--episodes-per-candidate", to.episodes_per_candidate,
                   "CEM episodes per candidate");
    ct->add_option("--generations", to.generations, "CEM generations");
    ct->add_option("--hidden", to.hidden, "CEM policy hidden widths, e.g. 16");
    ct->add_option("--workers", to.workers, "CEM candidate-evaluation workers");

    EvaluateOpts eo;
    CLI::App* ce = app.add_subcommand("evaluate", "Evaluate stored policy weights");
    ce->add_option("--reactor-config", eo.reactor_file, "Reactor parameter file");
    ce->add_option("--lab-config", eo.lab_file, "Lab (recipe/cascade/boxes) file");
    ce->add_option("--out", eo.out, "Output directory")->required();
    ce->add_option("--frozen-config", eo.frozen_path, "Restore options from a run's config.json");
    ce->add_option("--weights", eo.weights, "Policy weights JSON")->required();
    ce->add_option("--env", eo.env_kind, "Environment: recipe | direct")
        ->check(CLI::IsMember({"recipe", "direct"}));
    ce->add_option("--scenario", eo.scenario, "Reward scenario")->check(CLI::Range(1, 3));
    ce->add_option("--seed", eo.eval_seed_base, "Evaluation seed base");
    ce->add_option("--episodes", eo.episodes, "Number of evaluation episodes");
    ce->add_option("--workers", eo.workers, "Parallel episode workers");

    GridOpts go;
    CLI::App* cg = app.add_subcommand("grid", "Hyperparameter sweep on the recipe environment");
    cg->add_option("--reactor-config", go.reactor_file, "Reactor parameter file");
    cg->add_option("--lab-config", go.lab_file, "Lab (recipe/cascade/boxes) file");
    cg->add_option("--out", go.out, "Output directory")->required();
    cg->add_option("--frozen-config", go.frozen_path, "Restore options from a run's config.json");
    cg->add_option("--algos", go.algos, "Comma list: td3,cem");
    cg->add_option("--archs", go.archs, "Semicolon list of hidden widths, e.g. 50-50;50-25-10");
    cg->add_option("--batches", go.batches, "Comma list of batch sizes");
    cg->add_option("--lrs", go.lrs, "Comma list of learning rates");
    cg->add_option("--noises", go.noises, "Comma list of exploration noises");
    cg->add_option("--buffers", go.buffers, "Comma list of replay capacities");
    cg->add_option("--scenarios", go.scenarios, "Comma list of reward scenarios");
    cg->add_option("--seed", go.seed_base, "Cell seed base (cell seed = base + cell id)");
    cg->add_option("--eval-seed", go.eval_seed_base, "Evaluation seed base");
    cg->add_option("--eval-episodes", go.eval_episodes, "Evaluation episodes per cell");
    cg->add_option("--td3-steps", go.td3_steps, "TD3 env-step budget per cell");
    cg->add_option("--td3-warmup", go.td3_warmup, "TD3 warmup steps");
    cg->add_option("--td3-eval-every", go.td3_eval_every, "TD3 curve cadence");
    cg->add_option("--cem-population", go.cem_population, "CEM population per cell");
    cg->add_option("--cem-generations", go.cem_generations, "CEM generations per cell");
    cg->add_option("--cem-episodes-per-candidate", go.cem_episodes_per_candidate,
                   "CEM episodes per candidate");
    cg->add_option("--max-cells", go.max_cells, "Cap on cells trained this invocation");
    cg->add_option("--workers", go.workers, "Parallel workers inside each cell");

    SimulateOpts so;
    CLI::App* cs = app.add_subcommand("simulate", "Replay a scripted input CSV through the plant");
    cs->add_option("--reactor-config", so.reactor_file, "Reactor parameter file");
    cs->add_option("--lab-config", so.lab_file, "Lab (recipe/cascade/boxes) file");
    cs->add_option("--out", so.out, "Output directory")->required();
    cs->add_option("--frozen-config", so.frozen_path, "Restore options from a run's config.json");
    cs->add_option("--input", so.input, "Input CSV: m_dot_feed,T_J_in,T_CW_EHE_in")->required();
    cs->add_option("--seed", so.seed, "Initial-condition seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        Frozen frozen;
        if (app.got_subcommand(cb)) {
            if (cb->count("--frozen-config")) frozen.load(bo.frozen_path, "baseline");
            frozen.restore(cb, "--reactor-config", "reactor_config", bo.reactor_file);
            frozen.restore(cb, "--lab-config", "lab_config", bo.lab_file);
            resolve_seed(cb, "--seed", frozen, "eval_seed_base", bo.eval_seed_base);
            frozen.restore(cb, "--episodes", "episodes", bo.episodes);
            frozen.restore(cb, "--scenario", "scenario", bo.scenario);
            return run_baseline(bo, frozen);
        }
        if (app.got_subcommand(ct)) {
            if (ct->count("--frozen-config")) frozen.load(to.frozen_path, "train");
            frozen.restore(ct, "--reactor-config", "reactor_config", to.reactor_file);
            frozen.restore(ct, "--lab-config", "lab_config", to.lab_file);
            frozen.restore(ct, "--env", "env", to.env_kind);
            frozen.restore(ct, "--algo", "algo", to.algo);
            frozen.restore(ct, "--scenario", "scenario", to.scenario);
            resolve_seed(ct, "--seed", frozen, "seed", to.seed);
            frozen.restore(ct, "--steps", "steps", to.steps);
            frozen.restore(ct, "--actor-arch", "actor_arch", to.actor_arch);
            frozen.restore(ct, "--critic-arch", "critic_arch", to.critic_arch);
            frozen.restore(ct, "--lr", "lr", to.lr);
            frozen.restore(ct, "--batch", "batch", to.batch);
            frozen.restore(ct, "--buffer", "buffer", to.buffer);
            frozen.restore(ct, "--noise", "sigma_expl", to.sigma_expl);
            frozen.restore(ct, "--warmup", "warmup", to.warmup);
            frozen.restore(ct, "--eval-every", "eval_every", to.eval_every);
            frozen.restore(ct, "--curve-episodes", "curve_episodes", to.curve_episodes);
            frozen.restore(ct, "--population", "population", to.population);
            frozen.restore(ct, "--elite-frac", "elite_frac", to.elite_frac);
            frozen.restore(ct, "--init-noise", "init_noise", to.init_noise);
            frozen.restore(ct, "--noise-decay", "noise_decay", to.noise_decay);
            frozen.restore(ct, "--episodes-per-candidate", "episodes_per_candidate",
                           to.episodes_per_candidate);
            frozen.restore(ct, "--generations", "generations", to.generations);
            frozen.restore(ct, "--hidden", "hidden", to.hidden);
            return run_train(to, frozen);
        }
        if (app.got_subcommand(ce)) {
            if (ce->count("--frozen-config")) frozen.load(eo.frozen_path, "evaluate");
            frozen.restore(ce, "--reactor-config", "reactor_config", eo.reactor_file);
            frozen.restore(ce, "--lab-config", "lab_config", eo.lab_file);
            frozen.restore(ce, "--weights", "weights", eo.weights);
            frozen.restore(ce, "--env", "env", eo.env_kind);
            frozen.restore(ce, "--scenario", "scenario", eo.scenario);
            resolve_seed(ce, "--seed", frozen, "eval_seed_base", eo.eval_seed_base);
            frozen.restore(ce, "--episodes", "episodes", eo.episodes);
            return run_evaluate(eo, frozen);
        }
        if (app.got_subcommand(cg)) {
            if (cg->count("--frozen-config")) frozen.load(go.frozen_path, "grid");
            frozen.restore(cg, "--reactor-config", "reactor_config", go.reactor_file);
            frozen.restore(cg, "--lab-config", "lab_config", go.lab_file);
            frozen.restore(cg, "--algos", "algos", go.algos);
            frozen.restore(cg, "--archs", "archs", go.archs);
            frozen.restore(cg, "--batches", "batches", go.batches);
            frozen.restore(cg, "--lrs", "lrs", go.lrs);
            frozen.restore(cg, "--noises", "noises", go.noises);
            frozen.restore(cg, "--buffers", "buffers", go.buffers);
            frozen.restore(cg, "--scenarios", "scenarios", go.scenarios);
            resolve_seed(cg, "--seed", frozen, "seed_base", go.seed_base);
            frozen.restore(cg, "--eval-seed", "eval_seed_base", go.eval_seed_base);
            frozen.restore(cg, "--eval-episodes", "eval_episodes", go.eval_episodes);
            frozen.restore(cg, "--td3-steps", "td3_steps", go.td3_steps);
            frozen.restore(cg, "--td3-warmup", "td3_warmup", go.td3_warmup);
            frozen.restore(cg, "--td3-eval-every", "td3_eval_every", go.td3_eval_every);
            frozen.restore(cg, "--cem-population", "cem_population", go.cem_population);
            frozen.restore(cg, "--cem-generations", "cem_generations", go.cem_generations);
            frozen.restore(cg, "--cem-episodes-per-candidate", "cem_episodes_per_candidate",
                           go.cem_episodes_per_candidate);
            frozen.restore(cg, "--max-cells", "max_cells", go.max_cells);
            return run_grid_cmd(go, frozen);
        }
        if (app.got_subcommand(cs)) {
            if (cs->count("--frozen-config")) frozen.load(so.frozen_path, "simulate");
            frozen.restore(cs, "--reactor-config", "reactor_config", so.reactor_file);
            frozen.restore(cs, "--lab-config", "lab_config", so.lab_file);
            frozen.restore(cs, "--input", "input", so.input);
            resolve_seed(cs, "--seed", frozen, "seed", so.seed);
            return run_simulate(so, frozen);
        }
        return 2;
    } catch (const rrl::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
