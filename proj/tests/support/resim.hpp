#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "rrl/env.hpp"

namespace rrl_test {

// Independent monolithic re-simulation of a fully-set recipe: one flat loop
// over 30 s intervals applying the phase rules directly, with no use of the
// recipe engine. Oracle for phase lumping and return decomposition.
struct ResimResult {
    std::vector<rrl::PhysicalState> states;
    std::vector<rrl::ControlInput> inputs;
    std::vector<double> rewards;       // classical reward per interval
    std::vector<int> violations;
    rrl::PhysicalState x_end;
    double clock_s = 0.0;
    bool terminated = false;
    bool truncated = false;
};

inline ResimResult resimulate(const rrl::LabConfig& lab, const rrl::RewardConfig& rc,
                              const rrl::RecipeParameters& theta,
                              const rrl::PhysicalState& x0) {
    using namespace rrl;
    const ModelParameters& p = lab.params;
    const double dt_s = p.control_interval_s;
    const double dt_h = dt_s / 3600.0;

    ResimResult res;
    res.x_end = x0;
    double feed = 0.0;
    std::optional<ControlInput> u_prev;

    for (int z = 1; z <= 3; ++z) {
        CascadeConfig cc = lab.cascade;
        const int base = (z == 1) ? 2 : (z == 2 ? 7 : 12);   // T_R set, K_P, K_I indices
        cc.T_R_set = theta.value(base);
        cc.outer_K_P = theta.value(base + 1);
        cc.outer_K_I = theta.value(base + 2);
        cc.outer_K_D = 0.0;
        CascadeState cst = cascade_reset(cc);

        double elapsed = 0.0;
        while (true) {
            // phase predicate first; global truncation second; final episode
            // flags are read off the phase-3 exit alone
            if (z == 1) {
                if (res.x_end.m_W + res.x_end.m_M + res.x_end.m_P >= theta.value(5)) break;
            } else if (z == 2) {
                if (elapsed >= theta.value(11)) break;
                if (std::min(feed + theta.value(6) * dt_h, p.actuators.feed_max) >=
                    theta.value(10))
                    break;
            } else {
                if (conversion(res.x_end) >= lab.conversion_target) {
                    res.terminated = true;
                    break;
                }
            }
            if (res.clock_s >= lab.batch_time_limit_s) {
                if (z == 3) res.truncated = true;
                break;
            }

            double f = 0.0;
            if (z == 1) f = std::min(feed + theta.value(1) * dt_h, p.actuators.feed_max);
            if (z == 2) f = std::min(feed + theta.value(6) * dt_h, p.actuators.feed_max);

            const CascadeOutput co = cascade_step(cc, cst, res.x_end, dt_s);
            cst = co.state;
            const ControlInput u = make_control_input(f, co.T_J_in, co.T_CW_EHE_in, p);
            const PhysicalState x_next = step_control_interval(res.x_end, u, p);

            res.rewards.push_back(
                classical_reward(res.x_end, u, u_prev, x_next, dt_s, cc.T_R_set, rc, p) *
                dt_s);   // episode return accumulates r_cl weighted by the interval length
            res.violations.push_back(check_constraints(x_next, u, p).n_violated);
            res.states.push_back(x_next);
            res.inputs.push_back(u);

            res.x_end = x_next;
            feed = f;
            u_prev = u;
            elapsed += dt_s;
            res.clock_s += dt_s;
        }
    }
    return res;
}

}  // namespace rrl_test
