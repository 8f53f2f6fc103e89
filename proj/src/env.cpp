#include "rrl/env.hpp"

#include <algorithm>
#include <cmath>

#include "rrl/errors.hpp"

namespace rrl {

namespace {

double lin_norm(double v, double lo, double hi) { return 2.0 * (v - lo) / (hi - lo) - 1.0; }
double lin_denorm(double n, double lo, double hi) { return lo + 0.5 * (n + 1.0) * (hi - lo); }

}  // namespace

ObsNormalization ObsNormalization::from_config(const KvConfig& cfg) {
    ObsNormalization n;
    for (std::size_t i = 0; i < PhysicalState::kSize; ++i) {
        const std::string stem = std::string("obs_") + PhysicalState::field_name(i);
        n.lo[i] = cfg.get(stem + "_min");
        n.hi[i] = cfg.get(stem + "_max");
        if (!(n.lo[i] < n.hi[i]))
            throw ConfigError("observation range for " + std::string(PhysicalState::field_name(i)) +
                              " is empty");
    }
    n.t_lo = cfg.get("obs_t_min");
    n.t_hi = cfg.get("obs_t_max");
    if (!(n.t_lo < n.t_hi)) throw ConfigError("observation range for t is empty");
    return n;
}

double ObsNormalization::normalize_state(std::size_t i, double v) const {
    return lin_norm(v, lo[i], hi[i]);
}
double ObsNormalization::denormalize_state(std::size_t i, double n) const {
    return lin_denorm(n, lo[i], hi[i]);
}
double ObsNormalization::normalize_time(double t_s) const { return lin_norm(t_s, t_lo, t_hi); }
double ObsNormalization::denormalize_time(double n) const { return lin_denorm(n, t_lo, t_hi); }

LabConfig LabConfig::load(const std::string& reactor_file, const std::string& lab_file) {
    const KvConfig rc = KvConfig::load(reactor_file);
    const KvConfig lc = KvConfig::load(lab_file);
    LabConfig out;
    out.params = ModelParameters::from_config(rc);
    out.ic = InitialConditionRanges::from_config(rc);
    out.cascade = CascadeConfig::from_config(lc);
    out.boxes = ExpertBoxes::from_config(lc);
    out.obs_norm = ObsNormalization::from_config(lc);
    out.conversion_target = lc.get("conversion_target");
    out.batch_time_limit_s = lc.get("batch_time_limit_s");
    if (!(out.conversion_target > 0.0 && out.conversion_target <= 1.0))
        throw ConfigError("conversion_target must lie in (0, 1]");
    if (!(out.batch_time_limit_s > 0.0))
        throw ConfigError("batch_time_limit_s must be > 0");
    return out;
}

// ---------------------------------------------------------------- RecipeEnv

RecipeEnv::RecipeEnv(const LabConfig& lab, const RewardConfig& reward)
    : engine_(lab.params, lab.cascade, lab.boxes, reward, lab.conversion_target,
              lab.batch_time_limit_s),
      ic_(lab.ic),
      norm_(lab.obs_norm),
      reward_(reward) {}

std::size_t RecipeEnv::observation_size() const {
    return PhysicalState::kSize + 2 * kNumTheta + 2;
}

RecipeObservation RecipeEnv::make_observation() const {
    RecipeObservation o;
    o.x = x_;
    for (int c = 1; c <= kNumTheta; ++c) {
        o.set_flags[c - 1] = theta_.is_set(c);
        o.theta[c - 1] = o.set_flags[c - 1] ? theta_.value(c) : engine_.boxes().midpoint(c);
    }
    o.c = theta_.n_set + 1;
    o.t_s = clock_s_;

    o.normalized.reserve(observation_size());
    const auto xa = x_.as_array();
    for (std::size_t i = 0; i < PhysicalState::kSize; ++i)
        o.normalized.push_back(norm_.normalize_state(i, xa[i]));
    for (int c = 1; c <= kNumTheta; ++c)
        o.normalized.push_back(engine_.boxes().inverse_map(c, o.theta[c - 1]));
    for (int c = 1; c <= kNumTheta; ++c)
        o.normalized.push_back(o.set_flags[c - 1] ? 1.0 : -1.0);
    o.normalized.push_back(std::min(lin_norm(o.c, 1.0, kNumTheta), 1.0));
    o.normalized.push_back(norm_.normalize_time(clock_s_));
    return o;
}

std::vector<double> RecipeEnv::reset(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    x_ = sample_initial_state(rng, ic_, engine_.params());
    x0_ = x_;
    theta_ = RecipeParameters{};
    clock_s_ = 0.0;
    feed_ = 0.0;
    u_prev_.reset();
    started_ = true;
    finished_ = false;
    terminated_ = false;
    truncated_ = false;
    seed_ = seed;
    return_ = 0.0;
    n_cv_ = 0;
    logs_.clear();
    obs_ = make_observation();
    return obs_.normalized;
}

TransitionRecord RecipeEnv::step(const std::vector<double>& action) {
    if (!started_) throw ContractViolation("step before reset");
    if (finished_) throw ContractViolation("step after episode end");
    if (action.size() != 1) throw ContractViolation("recipe action must be a scalar");

    TransitionRecord rec;
    rec.s = obs_.normalized;
    rec.a = action;

    const int c = theta_.n_set + 1;
    const double value = engine_.boxes().map_action(c, action[0]);
    theta_ = apply_set_step(engine_.boxes(), theta_, c, value);

    const RecipeStep& prog = recipe_program()[c - 1];
    if (c == phase_final_step(prog.phase)) {
        const int z = prog.phase;
        const double dt_s = engine_.params().control_interval_s;
        RecipeEngine::PhaseResult pr = engine_.run_phase(x_, theta_, z, clock_s_, feed_, u_prev_);
        double r = 0.0;
        for (std::size_t i = 0; i < pr.trace.rewards.size(); ++i) {
            r += pr.trace.rewards[i] * dt_s;
            n_cv_ += pr.trace.violations[i];
            IntervalLog log;
            log.t_s = clock_s_ + static_cast<double>(i + 1) * dt_s;
            log.x = pr.trace.states[i];
            log.u = pr.trace.inputs[i];
            log.n_violations = pr.trace.violations[i];
            log.phase = z;
            log.step_c = c;
            log.exit_reason = pr.trace.exit_reason;
            logs_.push_back(std::move(log));
        }
        x_ = pr.x;
        clock_s_ += pr.trace.elapsed_s;
        feed_ = pr.feed;
        u_prev_ = pr.u_prev;
        rec.r = r;
        if (z == kNumPhases) {
            finished_ = true;
            terminated_ = pr.trace.converged;
            truncated_ = pr.trace.truncated;
        }
    } else {
        rec.r = 0.0;
    }

    return_ += rec.r;
    obs_ = make_observation();
    rec.s_next = obs_.normalized;
    rec.terminated = terminated_;
    rec.truncated = truncated_;
    return rec;
}

EpisodeSummary RecipeEnv::summary() const {
    if (!finished_) throw ContractViolation("summary of an unfinished episode");
    EpisodeSummary s;
    s.seed = seed_;
    s.scenario = static_cast<int>(reward_.scenario);
    s.episode_return = return_;
    s.batch_time_s = clock_s_;
    s.n_cv = n_cv_;
    const auto n = static_cast<double>(logs_.size());
    s.n_cv_rel = logs_.empty() ? 0.0 : 100.0 * static_cast<double>(n_cv_) / n;
    s.terminated = terminated_;
    s.truncated = truncated_;
    return s;
}

// ---------------------------------------------------------------- DirectEnv

DirectEnv::DirectEnv(const LabConfig& lab, const RewardConfig& reward)
    : params_(lab.params),
      ic_(lab.ic),
      norm_(lab.obs_norm),
      reward_(reward),
      conversion_target_(lab.conversion_target),
      batch_time_limit_s_(lab.batch_time_limit_s) {}

std::vector<double> DirectEnv::make_observation() const {
    std::vector<double> o;
    o.reserve(PhysicalState::kSize);
    const auto xa = x_.as_array();
    for (std::size_t i = 0; i < PhysicalState::kSize; ++i)
        o.push_back(norm_.normalize_state(i, xa[i]));
    return o;
}

std::vector<double> DirectEnv::reset(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    x_ = sample_initial_state(rng, ic_, params_);
    x0_ = x_;
    clock_s_ = 0.0;
    u_prev_.reset();
    started_ = true;
    finished_ = false;
    terminated_ = false;
    truncated_ = false;
    seed_ = seed;
    return_ = 0.0;
    n_cv_ = 0;
    logs_.clear();
    return make_observation();
}

ControlInput DirectEnv::input_from_action(const std::vector<double>& a) const {
    if (a.size() != 3) throw ContractViolation("direct action must have three components");
    const auto& b = params_.actuators;
    const auto map = [](double v, double lo, double hi) {
        return lo + 0.5 * (std::clamp(v, -1.0, 1.0) + 1.0) * (hi - lo);
    };
    return {map(a[0], b.feed_min, b.feed_max),
            map(a[1], b.T_J_in_min, b.T_J_in_max),
            map(a[2], b.T_CW_EHE_in_min, b.T_CW_EHE_in_max)};
}

std::vector<double> DirectEnv::action_from_input(const ControlInput& u) const {
    const auto& b = params_.actuators;
    return {lin_norm(u.m_dot_feed, b.feed_min, b.feed_max),
            lin_norm(u.T_J_in, b.T_J_in_min, b.T_J_in_max),
            lin_norm(u.T_CW_EHE_in, b.T_CW_EHE_in_min, b.T_CW_EHE_in_max)};
}

TransitionRecord DirectEnv::step(const std::vector<double>& action) {
    if (!started_) throw ContractViolation("step before reset");
    if (finished_) throw ContractViolation("step after episode end");

    TransitionRecord rec;
    rec.s = make_observation();
    rec.a = action;

    const double dt_s = params_.control_interval_s;
    const ControlInput u = input_from_action(action);
    const PhysicalState x_next = step_control_interval(x_, u, params_);

    const double setpoint = reward_.track_in_direct
                                ? 0.5 * (params_.T_R_lower + params_.T_R_upper)
                                : std::nan("");
    const double r_cl = classical_reward(x_, u, u_prev_, x_next, dt_s, setpoint, reward_, params_);
    rec.r = r_cl * dt_s;

    const int viol = check_constraints(x_next, u, params_).n_violated;
    n_cv_ += viol;
    clock_s_ += dt_s;
    x_ = x_next;
    u_prev_ = u;

    IntervalLog log;
    log.t_s = clock_s_;
    log.x = x_next;
    log.u = u;
    log.n_violations = viol;
    logs_.push_back(std::move(log));

    if (conversion(x_) >= conversion_target_) {
        finished_ = true;
        terminated_ = true;
    } else if (clock_s_ >= batch_time_limit_s_) {
        finished_ = true;
        truncated_ = true;
    }

    return_ += rec.r;
    rec.s_next = make_observation();
    rec.terminated = terminated_;
    rec.truncated = truncated_;
    return rec;
}

EpisodeSummary DirectEnv::summary() const {
    if (!finished_) throw ContractViolation("summary of an unfinished episode");
    EpisodeSummary s;
    s.seed = seed_;
    s.scenario = static_cast<int>(reward_.scenario);
    s.episode_return = return_;
    s.batch_time_s = clock_s_;
    s.n_cv = n_cv_;
    s.n_cv_rel = logs_.empty() ? 0.0 : 100.0 * static_cast<double>(n_cv_) /
                                           static_cast<double>(logs_.size());
    s.terminated = terminated_;
    s.truncated = truncated_;
    return s;
}

}  // namespace rrl
