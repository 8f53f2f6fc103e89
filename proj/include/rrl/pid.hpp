#pragma once

#include <utility>

#include "rrl/kv_config.hpp"
#include "rrl/reactor.hpp"

namespace rrl {

// Discrete PID of the textbook form
//   e = measurement - setpoint
//   u = clamp(u_ss + K_P e + K_I * sum(e dt) + K_D * de/dt, box)
// Gains may carry either sign; shipped configurations use K_D = 0.
struct PidConfig {
    double K_P = 0.0;
    double K_I = 0.0;          // 1/s
    double K_D = 0.0;          // s
    double setpoint = 0.0;
    double u_ss = 0.0;
    double output_min = 0.0;
    double output_max = 0.0;
};

struct PidState {
    double integral = 0.0;     // state units * s, anti-windup clamped
    double prev_error = 0.0;
    bool initialized = false;  // derivative memory present
};

// Returns the saturated output and the advanced controller state.
// The integral is conditionally clamped so the unsaturated output cannot
// leave the box (anti-windup); derivative is zero on the first call.
std::pair<double, PidState> pid_step(const PidConfig& cfg, const PidState& st,
                                     double measurement, double dt_s);

// One outer-loop output channel. The two channels share the outer error and
// gains; each applies its own sign/scale, steady-state offset relative to
// the reactor setpoint, and saturation box.
struct OuterChannel {
    double u_ss_offset = 0.0;  // added to T_R_set
    double gain_scale = 0.0;
    double out_min = 0.0;
    double out_max = 0.0;
};

// Reactor-temperature cascade: outer loop measures T_R and emits setpoints
// for the jacket and EHE inner loops; those emit the physical inlet
// temperatures. Inner loops feed their setpoint forward as u_ss (plus a
// configured offset) and let the integral find the load-dependent rest.
struct CascadeConfig {
    double outer_K_P = 0.0;
    double outer_K_I = 0.0;
    double outer_K_D = 0.0;
    double T_R_set = 0.0;
    OuterChannel jacket_channel;
    OuterChannel ehe_channel;
    PidConfig inner_jacket;    // setpoint/u_ss are overwritten each outer tick
    PidConfig inner_ehe;
    double inner_jacket_u_ss_offset = 0.0;
    double inner_ehe_u_ss_offset = 0.0;
    double inner_period_s = 0.0;
    double outer_period_s = 0.0;

    // loads the fixed (non-recipe) parts: inner gains, channel maps, periods
    static CascadeConfig from_config(const KvConfig& cfg);
    void validate() const;
    int outer_ratio() const;   // outer period / inner period
};

struct CascadeState {
    PidState outer_jacket;
    PidState outer_ehe;
    PidState inner_jacket;
    PidState inner_ehe;
    double T_J_set = 0.0;
    double T_EHE_set = 0.0;
    long interval_count = 0;
};

struct CascadeOutput {
    double T_J_in = 0.0;
    double T_CW_EHE_in = 0.0;
    CascadeState state;
};

CascadeState cascade_reset(const CascadeConfig& cfg);

// Advances the cascade one inner period. The outer loop runs only on outer
// period boundaries (including the first call after reset); inner loops run
// every call.
CascadeOutput cascade_step(const CascadeConfig& cfg, const CascadeState& st,
                           const PhysicalState& x, double dt_inner_s);

}  // namespace rrl
