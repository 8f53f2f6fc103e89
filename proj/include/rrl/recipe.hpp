#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "rrl/kv_config.hpp"
#include "rrl/pid.hpp"
#include "rrl/reactor.hpp"
#include "rrl/reward.hpp"

namespace rrl {

inline constexpr int kNumTheta = 14;
inline constexpr int kNumPhases = 3;

// 1-based recipe step indices of the parameters, matching the 14-step
// three-phase recipe: feed ramp / setpoint / outer gains / phase condition.
enum ThetaIndex : int {
    kThetaSlope1 = 1,
    kThetaTRset1 = 2,
    kThetaKP1 = 3,
    kThetaKI1 = 4,
    kThetaMassThreshold = 5,
    kThetaSlope2 = 6,
    kThetaTRset2 = 7,
    kThetaKP2 = 8,
    kThetaKI2 = 9,
    kThetaFeedCap = 10,
    kThetaTimeLimit2 = 11,
    kThetaTRset3 = 12,
    kThetaKP3 = 13,
    kThetaKI3 = 14,
};

enum class StepKind { kSet, kCondition };

struct RecipeStep {
    int c;          // 1-based step index
    int phase;      // 1..3
    StepKind kind;
};

// Structure of the fixed recipe: which step belongs to which phase and
// which steps are phase-closing conditions (phase 3 closes on a set step;
// its condition is the batch termination itself).
const std::array<RecipeStep, kNumTheta>& recipe_program();
int phase_final_step(int phase);   // 5, 11, 14
int phase_of_step(int c);

// Certified admissible interval per parameter; policy actions are affinely
// mapped into the box and can never leave it.
struct ExpertBoxes {
    std::array<double, kNumTheta> lo{};
    std::array<double, kNumTheta> hi{};

    static ExpertBoxes from_config(const KvConfig& cfg);
    bool contains(int c, double v) const;         // c is 1-based
    double clamp_to_box(int c, double v) const;
    double midpoint(int c) const;
    double map_action(int c, double a) const;     // [-1,1] -> box
    double inverse_map(int c, double v) const;    // box -> [-1,1]
};

struct RecipeParameters {
    std::array<double, kNumTheta> theta{};
    int n_set = 0;  // entries are assigned strictly in index order

    bool is_set(int c) const { return c >= 1 && c <= n_set; }
    double value(int c) const { return theta[c - 1]; }
    bool operator==(const RecipeParameters&) const = default;
};

// theta' = theta + i_c * value with the prefix rule enforced; the value is
// clamped into the expert box before application.
RecipeParameters apply_set_step(const ExpertBoxes& boxes, const RecipeParameters& theta,
                                int c, double value);

struct PhaseTrace {
    std::vector<PhysicalState> states;   // state after each interval
    std::vector<ControlInput> inputs;    // input held over each interval
    std::vector<double> rewards;         // per-interval classical reward
    std::vector<int> violations;         // violated-constraint count per interval
    int n_end = 0;                       // number of 30 s intervals executed
    double elapsed_s = 0.0;
    bool converged = false;
    bool truncated = false;
    std::string exit_reason;             // mass-threshold | feed-cap | time-limit |
                                         // converged | truncated
};

// Runs whole batch phases through the simulator and cascade controller.
class RecipeEngine {
public:
    RecipeEngine(ModelParameters p, CascadeConfig cascade_base, ExpertBoxes boxes,
                 RewardConfig reward, double conversion_target, double batch_time_limit_s);

    struct PhaseResult {
        PhaseTrace trace;
        PhysicalState x;
        double feed = 0.0;                       // commanded feed at phase end
        std::optional<ControlInput> u_prev;      // last applied input
    };

    // Simulates phase z until its exit predicate holds or the global batch
    // clock hits the truncation limit. feed_in is the commanded feed at
    // entry (ramp continuity); u_prev carries the smoothness-penalty memory
    // across phase boundaries. PID integrators start fresh each phase.
    PhaseResult run_phase(const PhysicalState& x, const RecipeParameters& theta, int z,
                          double clock_s, double feed_in,
                          const std::optional<ControlInput>& u_prev) const;

    const ModelParameters& params() const { return params_; }
    const ExpertBoxes& boxes() const { return boxes_; }
    const RewardConfig& reward() const { return reward_; }
    const CascadeConfig& cascade_base() const { return cascade_base_; }
    double conversion_target() const { return conversion_target_; }
    double batch_time_limit_s() const { return batch_time_limit_s_; }

    // Phase-z cascade: base config with the outer gains and setpoint taken
    // from theta.
    CascadeConfig cascade_for_phase(const RecipeParameters& theta, int z) const;

private:
    ModelParameters params_;
    CascadeConfig cascade_base_;
    ExpertBoxes boxes_;
    RewardConfig reward_;
    double conversion_target_;
    double batch_time_limit_s_;
};

// The fixed expert baseline, read from the versioned config file.
RecipeParameters baseline_recipe(const KvConfig& cfg, const ExpertBoxes& boxes);

}  // namespace rrl
