#include "rrl/pid.hpp"

#include <algorithm>
#include <cmath>

#include "rrl/errors.hpp"

namespace rrl {

std::pair<double, PidState> pid_step(const PidConfig& cfg, const PidState& st,
                                     double measurement, double dt_s) {
    if (!(dt_s > 0.0)) throw ContractViolation("pid_step: dt must be > 0");
    if (!(cfg.output_min < cfg.output_max))
        throw ContractViolation("pid_step: output box is empty");

    const double e = measurement - cfg.setpoint;
    const double de = st.initialized ? (e - st.prev_error) / dt_s : 0.0;
    double integral = st.integral + e * dt_s;

    if (cfg.K_I != 0.0) {
        // keep the unsaturated output inside the box
        const double base = cfg.u_ss + cfg.K_P * e + cfg.K_D * de;
        const double b1 = (cfg.output_min - base) / cfg.K_I;
        const double b2 = (cfg.output_max - base) / cfg.K_I;
        integral = std::clamp(integral, std::min(b1, b2), std::max(b1, b2));
    }

    const double raw = cfg.u_ss + cfg.K_P * e + cfg.K_I * integral + cfg.K_D * de;
    const double out = std::clamp(raw, cfg.output_min, cfg.output_max);

    PidState next;
    next.integral = integral;
    next.prev_error = e;
    next.initialized = true;
    return {out, next};
}

CascadeConfig CascadeConfig::from_config(const KvConfig& c) {
    CascadeConfig k;
    k.inner_period_s = c.get("inner_period_s");
    k.outer_period_s = c.get("outer_period_s");
    k.jacket_channel.u_ss_offset = c.get("outer_jacket_u_ss_offset");
    k.jacket_channel.gain_scale = c.get("outer_jacket_gain_scale");
    k.jacket_channel.out_min = c.get("outer_jacket_out_min");
    k.jacket_channel.out_max = c.get("outer_jacket_out_max");
    k.ehe_channel.u_ss_offset = c.get("outer_ehe_u_ss_offset");
    k.ehe_channel.gain_scale = c.get("outer_ehe_gain_scale");
    k.ehe_channel.out_min = c.get("outer_ehe_out_min");
    k.ehe_channel.out_max = c.get("outer_ehe_out_max");
    k.inner_jacket.K_P = c.get("inner_jacket_K_P");
    k.inner_jacket.K_I = c.get("inner_jacket_K_I");
    k.inner_jacket.K_D = 0.0;
    k.inner_jacket.output_min = c.get("inner_jacket_out_min");
    k.inner_jacket.output_max = c.get("inner_jacket_out_max");
    k.inner_jacket_u_ss_offset = c.get("inner_jacket_u_ss_offset");
    k.inner_ehe.K_P = c.get("inner_ehe_K_P");
    k.inner_ehe.K_I = c.get("inner_ehe_K_I");
    k.inner_ehe.K_D = 0.0;
    k.inner_ehe.output_min = c.get("inner_ehe_out_min");
    k.inner_ehe.output_max = c.get("inner_ehe_out_max");
    k.inner_ehe_u_ss_offset = c.get("inner_ehe_u_ss_offset");
    k.validate();
    return k;
}

void CascadeConfig::validate() const {
    if (!(inner_period_s > 0.0) || !(outer_period_s > 0.0))
        throw ConfigError("cascade: loop periods must be > 0");
    if (inner_period_s > outer_period_s)
        throw ConfigError("cascade: inner period must be <= outer period");
    const double ratio = outer_period_s / inner_period_s;
    if (std::abs(ratio - std::round(ratio)) > 1e-9)
        throw ConfigError("cascade: outer period must be an integer multiple of inner period");
}

int CascadeConfig::outer_ratio() const {
    return static_cast<int>(std::lround(outer_period_s / inner_period_s));
}

CascadeState cascade_reset(const CascadeConfig& cfg) {
    CascadeState st;
    // hold the feed-forward value until the first outer tick fires
    st.T_J_set = cfg.T_R_set + cfg.jacket_channel.u_ss_offset;
    st.T_EHE_set = cfg.T_R_set + cfg.ehe_channel.u_ss_offset;
    return st;
}

CascadeOutput cascade_step(const CascadeConfig& cfg, const CascadeState& st,
                           const PhysicalState& x, double dt_inner_s) {
    if (std::abs(dt_inner_s - cfg.inner_period_s) > 1e-9)
        throw ContractViolation("cascade_step: dt does not match configured inner period");

    CascadeState next = st;

    if (st.interval_count % cfg.outer_ratio() == 0) {
        const auto run_channel = [&](const OuterChannel& ch, const PidState& pst,
                                     PidState& out_state) {
            PidConfig pc;
            pc.K_P = cfg.outer_K_P * ch.gain_scale;
            pc.K_I = cfg.outer_K_I * ch.gain_scale;
            pc.K_D = cfg.outer_K_D * ch.gain_scale;
            pc.setpoint = cfg.T_R_set;
            pc.u_ss = cfg.T_R_set + ch.u_ss_offset;
            pc.output_min = ch.out_min;
            pc.output_max = ch.out_max;
            auto [out, nst] = pid_step(pc, pst, x.T_R, cfg.outer_period_s);
            out_state = nst;
            return out;
        };
        next.T_J_set = run_channel(cfg.jacket_channel, st.outer_jacket, next.outer_jacket);
        next.T_EHE_set = run_channel(cfg.ehe_channel, st.outer_ehe, next.outer_ehe);
    }

    PidConfig jc = cfg.inner_jacket;
    jc.setpoint = next.T_J_set;
    jc.u_ss = next.T_J_set + cfg.inner_jacket_u_ss_offset;
    auto [t_j_in, jst] = pid_step(jc, st.inner_jacket, x.T_J, dt_inner_s);
    next.inner_jacket = jst;

    PidConfig ec = cfg.inner_ehe;
    ec.setpoint = next.T_EHE_set;
    ec.u_ss = next.T_EHE_set + cfg.inner_ehe_u_ss_offset;
    auto [t_cw_in, est] = pid_step(ec, st.inner_ehe, x.T_EHE, dt_inner_s);
    next.inner_ehe = est;

    ++next.interval_count;
    return {t_j_in, t_cw_in, next};
}

}  // namespace rrl
