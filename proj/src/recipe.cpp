#include "rrl/recipe.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rrl/errors.hpp"

namespace rrl {

const std::array<RecipeStep, kNumTheta>& recipe_program() {
    static const std::array<RecipeStep, kNumTheta> program = {{
        {1, 1, StepKind::kSet},        // slope of feed ramp
        {2, 1, StepKind::kSet},        // T_R setpoint, outer PID
        {3, 1, StepKind::kSet},        // outer K_P
        {4, 1, StepKind::kSet},        // outer K_I
        {5, 1, StepKind::kCondition},  // run until total mass threshold
        {6, 2, StepKind::kSet},        // slope of feed ramp
        {7, 2, StepKind::kSet},        // T_R setpoint
        {8, 2, StepKind::kSet},        // outer K_P
        {9, 2, StepKind::kSet},        // outer K_I
        {10, 2, StepKind::kSet},       // feed cap
        {11, 2, StepKind::kCondition}, // run until time limit or feed cap
        {12, 3, StepKind::kSet},       // close feed, T_R setpoint
        {13, 3, StepKind::kSet},       // outer K_P
        {14, 3, StepKind::kSet},       // outer K_I
    }};
    return program;
}

int phase_final_step(int phase) {
    switch (phase) {
        case 1: return 5;
        case 2: return 11;
        case 3: return 14;
        default: throw ContractViolation("phase index out of range");
    }
}

int phase_of_step(int c) {
    if (c < 1 || c > kNumTheta) throw ContractViolation("recipe step out of range");
    return recipe_program()[c - 1].phase;
}

ExpertBoxes ExpertBoxes::from_config(const KvConfig& cfg) {
    ExpertBoxes b;
    for (int c = 1; c <= kNumTheta; ++c) {
        const std::string stem = "box_theta" + std::to_string(c);
        b.lo[c - 1] = cfg.get(stem + "_min");
        b.hi[c - 1] = cfg.get(stem + "_max");
        if (!(b.lo[c - 1] <= b.hi[c - 1]))
            throw ConfigError("expert box " + std::to_string(c) + " is empty");
    }
    return b;
}

bool ExpertBoxes::contains(int c, double v) const {
    return v >= lo[c - 1] && v <= hi[c - 1];
}

double ExpertBoxes::clamp_to_box(int c, double v) const {
    return std::clamp(v, lo[c - 1], hi[c - 1]);
}

double ExpertBoxes::midpoint(int c) const { return 0.5 * (lo[c - 1] + hi[c - 1]); }

double ExpertBoxes::map_action(int c, double a) const {
    const double t = std::clamp(a, -1.0, 1.0);
    return lo[c - 1] + 0.5 * (t + 1.0) * (hi[c - 1] - lo[c - 1]);
}

double ExpertBoxes::inverse_map(int c, double v) const {
    const double w = hi[c - 1] - lo[c - 1];
    if (w == 0.0) return 0.0;
    return std::clamp(2.0 * (v - lo[c - 1]) / w - 1.0, -1.0, 1.0);
}

RecipeParameters apply_set_step(const ExpertBoxes& boxes, const RecipeParameters& theta,
                                int c, double value) {
    if (c < 1 || c > kNumTheta) throw ContractViolation("recipe step out of range");
    if (c != theta.n_set + 1) {
        std::ostringstream os;
        os << "out-of-order recipe assignment: step " << c << " while " << theta.n_set
           << " parameters are set";
        throw ContractViolation(os.str());
    }
    RecipeParameters next = theta;
    next.theta[c - 1] = boxes.clamp_to_box(c, value);
    next.n_set = c;
    return next;
}

RecipeEngine::RecipeEngine(ModelParameters p, CascadeConfig cascade_base, ExpertBoxes boxes,
                           RewardConfig reward, double conversion_target,
                           double batch_time_limit_s)
    : params_(std::move(p)),
      cascade_base_(cascade_base),
      boxes_(boxes),
      reward_(reward),
      conversion_target_(conversion_target),
      batch_time_limit_s_(batch_time_limit_s) {
    cascade_base_.validate();
    if (std::abs(cascade_base_.inner_period_s - params_.control_interval_s) > 1e-9)
        throw ConfigError("cascade inner period must equal the control interval");
}

CascadeConfig RecipeEngine::cascade_for_phase(const RecipeParameters& theta, int z) const {
    CascadeConfig cc = cascade_base_;
    switch (z) {
        case 1:
            cc.T_R_set = theta.value(kThetaTRset1);
            cc.outer_K_P = theta.value(kThetaKP1);
            cc.outer_K_I = theta.value(kThetaKI1);
            break;
        case 2:
            cc.T_R_set = theta.value(kThetaTRset2);
            cc.outer_K_P = theta.value(kThetaKP2);
            cc.outer_K_I = theta.value(kThetaKI2);
            break;
        case 3:
            cc.T_R_set = theta.value(kThetaTRset3);
            cc.outer_K_P = theta.value(kThetaKP3);
            cc.outer_K_I = theta.value(kThetaKI3);
            break;
        default:
            throw ContractViolation("phase index out of range");
    }
    cc.outer_K_D = 0.0;
    return cc;
}

RecipeEngine::PhaseResult RecipeEngine::run_phase(const PhysicalState& x0,
                                                  const RecipeParameters& theta, int z,
                                                  double clock_s, double feed_in,
                                                  const std::optional<ControlInput>& u_prev_in) const {
    if (z < 1 || z > kNumPhases) throw ContractViolation("phase index out of range");
    if (theta.n_set < phase_final_step(z)) {
        std::ostringstream os;
        os << "phase " << z << " requires the first " << phase_final_step(z)
           << " parameters; only " << theta.n_set << " are set";
        throw ContractViolation(os.str());
    }

    const double dt_s = params_.control_interval_s;
    const double dt_h = dt_s / 3600.0;

    const CascadeConfig cc = cascade_for_phase(theta, z);
    CascadeState cst = cascade_reset(cc);

    PhaseResult res;
    res.x = x0;
    res.feed = feed_in;
    res.u_prev = u_prev_in;
    PhaseTrace& tr = res.trace;

    double elapsed_phase = 0.0;
    while (true) {
        bool phase_done = false;
        if (z == 1) {
            const double m_total = res.x.m_W + res.x.m_M + res.x.m_P;
            if (m_total >= theta.value(kThetaMassThreshold)) {
                tr.exit_reason = "mass-threshold";
                phase_done = true;
            }
        } else if (z == 2) {
            if (elapsed_phase >= theta.value(kThetaTimeLimit2)) {
                tr.exit_reason = "time-limit";
                phase_done = true;
            } else {
                const double candidate = std::min(res.feed + theta.value(kThetaSlope2) * dt_h,
                                                  params_.actuators.feed_max);
                if (candidate >= theta.value(kThetaFeedCap)) {
                    tr.exit_reason = "feed-cap";
                    phase_done = true;
                }
            }
        } else {
            if (conversion(res.x) >= conversion_target_) {
                tr.converged = true;
                tr.exit_reason = "converged";
                phase_done = true;
            }
        }
        if (phase_done) break;
        // the global clock truncates every phase
        if (clock_s + elapsed_phase >= batch_time_limit_s_) {
            tr.truncated = true;
            tr.exit_reason = "truncated";
            break;
        }

        double feed = 0.0;
        if (z == 1) {
            feed = std::min(res.feed + theta.value(kThetaSlope1) * dt_h, params_.actuators.feed_max);
        } else if (z == 2) {
            feed = std::min(res.feed + theta.value(kThetaSlope2) * dt_h, params_.actuators.feed_max);
        }
        try {
            const CascadeOutput co = cascade_step(cc, cst, res.x, dt_s);
            cst = co.state;
            const ControlInput u = make_control_input(feed, co.T_J_in, co.T_CW_EHE_in, params_);
            const PhysicalState x_next = step_control_interval(res.x, u, params_);

            tr.rewards.push_back(classical_reward(res.x, u, res.u_prev, x_next, dt_s, cc.T_R_set,
                                                  reward_, params_));
            tr.violations.push_back(check_constraints(x_next, u, params_).n_violated);
            tr.states.push_back(x_next);
            tr.inputs.push_back(u);

            res.x = x_next;
            res.feed = feed;
            res.u_prev = u;
        } catch (const SimulationFault& e) {
            std::ostringstream os;
            os << e.what() << " (phase " << z << ", t = " << clock_s + elapsed_phase << " s)";
            throw SimulationFault(os.str());
        }
        elapsed_phase += dt_s;
        ++tr.n_end;
    }

    tr.elapsed_s = elapsed_phase;
    return res;
}

RecipeParameters baseline_recipe(const KvConfig& cfg, const ExpertBoxes& boxes) {
    RecipeParameters theta;
    for (int c = 1; c <= kNumTheta; ++c) {
        const double v = cfg.get("baseline_theta" + std::to_string(c));
        if (!boxes.contains(c, v))
            throw ConfigError("baseline_theta" + std::to_string(c) + " lies outside its expert box");
        theta = apply_set_step(boxes, theta, c, v);
    }
    return theta;
}

}  // namespace rrl
