#pragma once

#include <cmath>
#include <optional>

#include "rrl/reactor.hpp"

namespace rrl {

enum class RewardScenario : int {
    kMaximizeProduct = 1,
    kMinimizeTime = 2,
    kHybrid = 3,
};

struct RewardConfig {
    RewardScenario scenario = RewardScenario::kHybrid;
    double w_mP = 1.0 / 30000.0;   // 1/kg, default 1/m_acc_max
    double w_t = 1.0 / 3600.0;     // 1/s
    double lambda_cv = 10.0;       // per violated constraint-interval
    double lambda_du = 0.1;        // per squared normalized input step
    double lambda_track = 1e-4;    // 1/K^2
    double gamma = 0.99;
    bool magnitude_cv = false;     // penalize positive slack magnitude instead of count
    bool track_in_direct = false;  // tracking term in the direct environment
};

// Per-interval reward: scenario objective minus constraint, input-smoothness
// and temperature-tracking penalties. u_prev absent means first interval
// (no smoothness penalty). When t_r_setpoint is NaN the tracking term is
// skipped.
inline double classical_reward(const PhysicalState& x, const ControlInput& u,
                               const std::optional<ControlInput>& u_prev,
                               const PhysicalState& x_next, double dt_s,
                               double t_r_setpoint, const RewardConfig& cfg,
                               const ModelParameters& p) {
    double objective = 0.0;
    const double d_m_P = x_next.m_P - x.m_P;
    switch (cfg.scenario) {
        case RewardScenario::kMaximizeProduct: objective = cfg.w_mP * d_m_P; break;
        case RewardScenario::kMinimizeTime: objective = -cfg.w_t * dt_s; break;
        case RewardScenario::kHybrid: objective = cfg.w_mP * d_m_P - cfg.w_t * dt_s; break;
    }

    double cv_penalty = 0.0;
    const ConstraintReport rep = check_constraints(x_next, u, p);
    if (cfg.magnitude_cv) {
        for (std::size_t i = 0; i < ConstraintReport::kCount; ++i)
            if (rep.violated[i]) cv_penalty += rep.slack[i];
    } else {
        cv_penalty = static_cast<double>(rep.n_violated);
    }

    double du_penalty = 0.0;
    if (u_prev.has_value()) {
        const auto& b = p.actuators;
        const double df = (u.m_dot_feed - u_prev->m_dot_feed) / (b.feed_max - b.feed_min);
        const double dj = (u.T_J_in - u_prev->T_J_in) / (b.T_J_in_max - b.T_J_in_min);
        const double dc = (u.T_CW_EHE_in - u_prev->T_CW_EHE_in) /
                          (b.T_CW_EHE_in_max - b.T_CW_EHE_in_min);
        du_penalty = df * df + dj * dj + dc * dc;
    }

    double track_penalty = 0.0;
    if (!std::isnan(t_r_setpoint)) {
        const double e = x_next.T_R - t_r_setpoint;
        track_penalty = e * e;
    }

    return objective - cfg.lambda_cv * cv_penalty - cfg.lambda_du * du_penalty -
           cfg.lambda_track * track_penalty;
}

}  // namespace rrl
