#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rrl/recipe.hpp"

namespace rrl {

// Per-dimension linear map onto ~[-1, 1]. Values outside [lo, hi] map outside
// the unit interval; de-normalization is the exact inverse.
struct ObsNormalization {
    std::array<double, PhysicalState::kSize> lo{};
    std::array<double, PhysicalState::kSize> hi{};
    double t_lo = 0.0;
    double t_hi = 1.0;

    static ObsNormalization from_config(const KvConfig& cfg);

    double normalize_state(std::size_t i, double v) const;
    double denormalize_state(std::size_t i, double n) const;
    double normalize_time(double t_s) const;
    double denormalize_time(double n) const;
};

// Everything the lab loads from the two key-value files; the single
// integration point used by environments, tools and tests.
struct LabConfig {
    ModelParameters params;
    InitialConditionRanges ic;
    CascadeConfig cascade;
    ExpertBoxes boxes;
    ObsNormalization obs_norm;
    double conversion_target = 0.0;
    double batch_time_limit_s = 0.0;

    static LabConfig load(const std::string& reactor_file, const std::string& lab_file);
};

// Structured view of the recipe observation; `normalized` is the flat policy
// input [x(10), theta(14), set flags(14), c, t].
struct RecipeObservation {
    PhysicalState x;
    std::array<double, kNumTheta> theta{};     // unset entries hold the box midpoint
    std::array<bool, kNumTheta> set_flags{};
    int c = 1;                                  // next step index; 15 once finished
    double t_s = 0.0;
    std::vector<double> normalized;
};

struct TransitionRecord {
    std::vector<double> s;
    std::vector<double> a;
    double r = 0.0;
    std::vector<double> s_next;
    bool terminated = false;
    bool truncated = false;
};

struct EpisodeSummary {
    std::uint64_t seed = 0;
    int scenario = 0;
    double episode_return = 0.0;   // undiscounted
    double batch_time_s = 0.0;
    int n_cv = 0;                  // (interval, constraint) violation pairs
    double n_cv_rel = 0.0;         // percent of visited 30 s intervals
    bool terminated = false;
    bool truncated = false;
};

// One executed 30 s control interval, for trajectory export. phase/step_c are
// zero in the direct environment.
struct IntervalLog {
    double t_s = 0.0;              // batch clock at the end of the interval
    PhysicalState x;               // state after the interval
    ControlInput u;                // input held over the interval
    int n_violations = 0;
    int phase = 0;
    int step_c = 0;
    std::string exit_reason;       // exit reason of the phase this interval belongs to
};

// Uniform episodic interface consumed by trainers and the harness.
class Env {
public:
    virtual ~Env() = default;
    virtual std::size_t observation_size() const = 0;
    virtual std::size_t action_size() const = 0;
    virtual std::vector<double> reset(std::uint64_t seed) = 0;
    virtual TransitionRecord step(const std::vector<double>& action) = 0;
    virtual bool episode_finished() const = 0;
    virtual EpisodeSummary summary() const = 0;                  // finished episodes only
    virtual const std::vector<IntervalLog>& interval_logs() const = 0;
    virtual PhysicalState initial_state() const = 0;
};

using EnvFactory = std::function<std::unique_ptr<Env>()>;

// Recipe environment: one scalar action per recipe step, fourteen agent
// actions per episode; physics advances only at the phase-closing steps.
class RecipeEnv final : public Env {
public:
    RecipeEnv(const LabConfig& lab, const RewardConfig& reward);

    std::size_t observation_size() const override;
    std::size_t action_size() const override { return 1; }
    std::vector<double> reset(std::uint64_t seed) override;
    TransitionRecord step(const std::vector<double>& action) override;
    bool episode_finished() const override { return finished_; }
    EpisodeSummary summary() const override;
    const std::vector<IntervalLog>& interval_logs() const override { return logs_; }
    PhysicalState initial_state() const override { return x0_; }

    const RecipeObservation& observation() const { return obs_; }
    const RecipeEngine& engine() const { return engine_; }

private:
    RecipeObservation make_observation() const;

    RecipeEngine engine_;
    InitialConditionRanges ic_;
    ObsNormalization norm_;
    RewardConfig reward_;

    PhysicalState x_;
    PhysicalState x0_;
    RecipeParameters theta_;
    double clock_s_ = 0.0;
    double feed_ = 0.0;
    std::optional<ControlInput> u_prev_;
    RecipeObservation obs_;
    bool started_ = false;
    bool finished_ = false;
    bool terminated_ = false;
    bool truncated_ = false;
    std::uint64_t seed_ = 0;
    double return_ = 0.0;
    int n_cv_ = 0;
    std::vector<IntervalLog> logs_;
};

// Direct-control reference environment: one 30 s interval per agent action,
// the three physical inputs as the action vector.
class DirectEnv final : public Env {
public:
    DirectEnv(const LabConfig& lab, const RewardConfig& reward);

    std::size_t observation_size() const override { return PhysicalState::kSize; }
    std::size_t action_size() const override { return 3; }
    std::vector<double> reset(std::uint64_t seed) override;
    TransitionRecord step(const std::vector<double>& action) override;
    bool episode_finished() const override { return finished_; }
    EpisodeSummary summary() const override;
    const std::vector<IntervalLog>& interval_logs() const override { return logs_; }
    PhysicalState initial_state() const override { return x0_; }

    // [-1,1]^3 <-> actuator box, exposed so scripted sequences can be replayed
    ControlInput input_from_action(const std::vector<double>& a) const;
    std::vector<double> action_from_input(const ControlInput& u) const;

    const PhysicalState& state() const { return x_; }

private:
    std::vector<double> make_observation() const;

    ModelParameters params_;
    InitialConditionRanges ic_;
    ObsNormalization norm_;
    RewardConfig reward_;
    double conversion_target_ = 0.0;
    double batch_time_limit_s_ = 0.0;

    PhysicalState x_;
    PhysicalState x0_;
    double clock_s_ = 0.0;
    std::optional<ControlInput> u_prev_;
    bool started_ = false;
    bool finished_ = false;
    bool terminated_ = false;
    bool truncated_ = false;
    std::uint64_t seed_ = 0;
    double return_ = 0.0;
    int n_cv_ = 0;
    std::vector<IntervalLog> logs_;
};

}  // namespace rrl
