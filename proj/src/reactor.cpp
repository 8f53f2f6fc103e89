#include "rrl/reactor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rrl/errors.hpp"
#include "rrl/rk4.hpp"

namespace rrl {

namespace {

constexpr const char* kFieldNames[PhysicalState::kSize] = {
    "m_W", "m_M", "m_P", "T_R", "T_S", "T_J", "T_EHE", "T_CW_EHE", "m_acc", "T_ad"};

constexpr const char* kConstraintNames[ConstraintReport::kCount] = {
    "T_R_below_band", "T_R_above_band", "T_ad_above_max", "m_acc_above_max"};

}  // namespace

const char* PhysicalState::field_name(std::size_t i) { return kFieldNames[i]; }
const char* ConstraintReport::constraint_name(std::size_t i) { return kConstraintNames[i]; }

bool ActuatorBox::contains(const ControlInput& u) const {
    return u.m_dot_feed >= feed_min && u.m_dot_feed <= feed_max &&
           u.T_J_in >= T_J_in_min && u.T_J_in <= T_J_in_max &&
           u.T_CW_EHE_in >= T_CW_EHE_in_min && u.T_CW_EHE_in <= T_CW_EHE_in_max;
}

ControlInput ActuatorBox::clamp(const ControlInput& u) const {
    return {std::clamp(u.m_dot_feed, feed_min, feed_max),
            std::clamp(u.T_J_in, T_J_in_min, T_J_in_max),
            std::clamp(u.T_CW_EHE_in, T_CW_EHE_in_min, T_CW_EHE_in_max)};
}

ModelParameters ModelParameters::from_config(const KvConfig& cfg) {
    ModelParameters p;
    p.gas_constant = cfg.get("gas_constant");
    p.activation_energy = cfg.get("activation_energy");
    p.k0 = cfg.get("k0");
    p.k_U1 = cfg.get("k_U1");
    p.k_U2 = cfg.get("k_U2");
    p.enthalpy_reaction = cfg.get("enthalpy_reaction");
    p.feed_temperature = cfg.get("feed_temperature");
    p.w_water_feed = cfg.get("w_water_feed");
    p.w_monomer_feed = cfg.get("w_monomer_feed");
    p.cp_water = cfg.get("cp_water");
    p.cp_steel = cfg.get("cp_steel");
    p.cp_feed = cfg.get("cp_feed");
    p.cp_reactor = cfg.get("cp_reactor");
    p.m_jacket_water = cfg.get("m_jacket_water");
    p.flow_jacket_water = cfg.get("flow_jacket_water");
    p.m_ehe_water = cfg.get("m_ehe_water");
    p.flow_ehe_water = cfg.get("flow_ehe_water");
    p.m_ehe_content = cfg.get("m_ehe_content");
    p.flow_ehe_content = cfg.get("flow_ehe_content");
    p.m_steel = cfg.get("m_steel");
    p.k_water_steel = cfg.get("k_water_steel");
    p.k_monomer_steel = cfg.get("k_monomer_steel");
    p.k_product_steel = cfg.get("k_product_steel");
    p.area_jacket = cfg.get("area_jacket");
    p.alpha_ehe = cfg.get("alpha_ehe");
    p.actuators.feed_min = cfg.get("feed_min");
    p.actuators.feed_max = cfg.get("feed_max");
    p.actuators.T_J_in_min = cfg.get("T_J_in_min");
    p.actuators.T_J_in_max = cfg.get("T_J_in_max");
    p.actuators.T_CW_EHE_in_min = cfg.get("T_CW_EHE_in_min");
    p.actuators.T_CW_EHE_in_max = cfg.get("T_CW_EHE_in_max");
    p.T_R_lower = cfg.get("T_R_lower");
    p.T_R_upper = cfg.get("T_R_upper");
    p.T_ad_max = cfg.get("T_ad_max");
    p.m_acc_max = cfg.get("m_acc_max");
    p.T_plaus_min = cfg.get("T_plaus_min");
    p.T_plaus_max = cfg.get("T_plaus_max");
    p.dt_substep_s = cfg.get("dt_substep_s");
    p.control_interval_s = cfg.get("control_interval_s");
    p.validate();
    return p;
}

void ModelParameters::validate() const {
    const double positives[] = {gas_constant, activation_energy, k0, k_U1, k_U2,
                                enthalpy_reaction, feed_temperature, cp_water, cp_steel,
                                cp_feed, cp_reactor, m_jacket_water, flow_jacket_water,
                                m_ehe_water, flow_ehe_water, m_ehe_content, flow_ehe_content,
                                m_steel, k_water_steel, k_monomer_steel, k_product_steel,
                                area_jacket, alpha_ehe, dt_substep_s, control_interval_s};
    for (double v : positives)
        if (!(v > 0.0)) throw ConfigError("model parameters: all physical constants must be > 0");
    if (!(w_water_feed > 0.0 && w_monomer_feed > 0.0))
        throw ConfigError("model parameters: feed fractions must be > 0");
    if (!(T_R_lower < T_R_upper))
        throw ConfigError("model parameters: T_R_lower must be < T_R_upper");
    if (!(T_plaus_min < T_plaus_max))
        throw ConfigError("model parameters: plausibility band is empty");
    if (!(actuators.feed_min < actuators.feed_max &&
          actuators.T_J_in_min < actuators.T_J_in_max &&
          actuators.T_CW_EHE_in_min < actuators.T_CW_EHE_in_max))
        throw ConfigError("model parameters: actuator boxes are empty");
}

InitialConditionRanges InitialConditionRanges::from_config(const KvConfig& cfg) {
    InitialConditionRanges r;
    r.m_W_min = cfg.get("ic_m_W_min");
    r.m_W_max = cfg.get("ic_m_W_max");
    r.m_M_min = cfg.get("ic_m_M_min");
    r.m_M_max = cfg.get("ic_m_M_max");
    r.T_R_min = cfg.get("ic_T_R_min");
    r.T_R_max = cfg.get("ic_T_R_max");
    r.T_S_min = cfg.get("ic_T_S_min");
    r.T_S_max = cfg.get("ic_T_S_max");
    r.T_J_min = cfg.get("ic_T_J_min");
    r.T_J_max = cfg.get("ic_T_J_max");
    r.T_EHE_min = cfg.get("ic_T_EHE_min");
    r.T_EHE_max = cfg.get("ic_T_EHE_max");
    r.T_CW_EHE_min = cfg.get("ic_T_CW_EHE_min");
    r.T_CW_EHE_max = cfg.get("ic_T_CW_EHE_max");
    const double pairs[][2] = {{r.m_W_min, r.m_W_max}, {r.m_M_min, r.m_M_max},
                               {r.T_R_min, r.T_R_max}, {r.T_S_min, r.T_S_max},
                               {r.T_J_min, r.T_J_max}, {r.T_EHE_min, r.T_EHE_max},
                               {r.T_CW_EHE_min, r.T_CW_EHE_max}};
    for (const auto& pr : pairs)
        if (!(pr[0] <= pr[1])) throw ConfigError("initial-condition ranges: min > max");
    return r;
}

ControlInput make_control_input(double m_dot_feed, double T_J_in, double T_CW_EHE_in,
                                const ModelParameters& p) {
    const ControlInput u{m_dot_feed, T_J_in, T_CW_EHE_in};
    if (!p.actuators.contains(u)) {
        std::ostringstream os;
        os << "control input outside actuator box: feed=" << m_dot_feed
           << " T_J_in=" << T_J_in << " T_CW_EHE_in=" << T_CW_EHE_in;
        throw ContractViolation(os.str());
    }
    return u;
}

std::array<double, PhysicalState::kSize> rhs(const PhysicalState& x, const ControlInput& u,
                                             const ModelParameters& p) {
    const double m_total = x.m_W + x.m_M + x.m_P;
    const double U_m = x.m_P / (x.m_M + x.m_P);
    const double rate_factor = p.k_U1 * (1.0 - U_m) + p.k_U2 * U_m;
    const double k_R1 = p.k0 * std::exp(-p.activation_energy / (p.gas_constant * x.T_R)) * rate_factor;
    const double k_R2 = p.k0 * std::exp(-p.activation_energy / (p.gas_constant * x.T_EHE)) * rate_factor;
    const double k_K = (x.m_W * p.k_water_steel + x.m_M * p.k_monomer_steel +
                        x.m_P * p.k_product_steel) / m_total;

    // monomer split between reactor and the mixture held in the EHE loop
    const double m_M_ehe = p.m_ehe_content * x.m_M / m_total;
    const double m_M_reactor = x.m_M - m_M_ehe;
    const double reaction_reactor = k_R1 * m_M_reactor;
    const double reaction_ehe = k_R2 * m_M_ehe;

    const double d_m_W = u.m_dot_feed * p.w_water_feed;
    const double d_m_M = u.m_dot_feed * p.w_monomer_feed - reaction_reactor - reaction_ehe;
    const double d_m_P = reaction_reactor + reaction_ehe;

    const double kKA = k_K * p.area_jacket;
    const double d_T_R = (u.m_dot_feed * p.cp_feed * (p.feed_temperature - x.T_R)
                          - kKA * (x.T_R - x.T_S)
                          - p.flow_ehe_content * p.cp_reactor * (x.T_R - x.T_EHE)
                          + p.enthalpy_reaction * reaction_reactor)
                         / (p.cp_reactor * m_total);
    const double d_T_S = (kKA * (x.T_R - x.T_S) - kKA * (x.T_S - x.T_J))
                         / (p.cp_steel * p.m_steel);
    const double d_T_J = (p.flow_jacket_water * p.cp_water * (u.T_J_in - x.T_J)
                          + kKA * (x.T_S - x.T_J))
                         / (p.cp_water * p.m_jacket_water);
    const double d_T_EHE = (p.flow_ehe_content * p.cp_reactor * (x.T_R - x.T_EHE)
                            - p.alpha_ehe * (x.T_EHE - x.T_CW_EHE)
                            + p.enthalpy_reaction * reaction_ehe)
                           / (p.cp_reactor * p.m_ehe_content);
    const double d_T_CW = (p.flow_ehe_water * p.cp_water * (u.T_CW_EHE_in - x.T_CW_EHE)
                           - p.alpha_ehe * (x.T_CW_EHE - x.T_EHE))
                          / (p.cp_water * p.m_ehe_water);
    const double d_m_acc = u.m_dot_feed;
    // chain rule on T_ad = T_R + dH * m_M / (m_total * cp)
    const double d_m_total = d_m_W + d_m_M + d_m_P;
    const double d_T_ad = p.enthalpy_reaction / (m_total * p.cp_reactor) * d_m_M
                          - d_m_total * x.m_M * p.enthalpy_reaction
                                / (m_total * m_total * p.cp_reactor)
                          + d_T_R;

    const std::array<double, PhysicalState::kSize> dx = {
        d_m_W, d_m_M, d_m_P, d_T_R, d_T_S, d_T_J, d_T_EHE, d_T_CW, d_m_acc, d_T_ad};
    for (std::size_t i = 0; i < dx.size(); ++i) {
        if (!std::isfinite(dx[i])) {
            std::ostringstream os;
            os << "non-finite derivative for state " << PhysicalState::field_name(i);
            throw SimulationFault(os.str());
        }
    }
    return dx;
}

PhysicalState step(const PhysicalState& x, const ControlInput& u, double dt_s,
                   const ModelParameters& p) {
    if (!(dt_s > 0.0)) throw ContractViolation("step: dt must be > 0");
    const double h = dt_s / 3600.0;  // rhs is per hour
    const auto f = [&](const std::array<double, PhysicalState::kSize>& y) {
        return rhs(PhysicalState::from_array(y), u, p);
    };
    const PhysicalState out = PhysicalState::from_array(rk4_step(f, x.as_array(), h));
    validate_state(out, p);
    return out;
}

PhysicalState step_control_interval(const PhysicalState& x, const ControlInput& u,
                                    const ModelParameters& p) {
    const int n = static_cast<int>(std::lround(p.control_interval_s / p.dt_substep_s));
    PhysicalState cur = x;
    for (int i = 0; i < n; ++i) cur = step(cur, u, p.dt_substep_s, p);
    return cur;
}

ConstraintReport check_constraints(const PhysicalState& x, const ControlInput& /*u*/,
                                   const ModelParameters& p) {
    ConstraintReport r;
    r.slack[0] = p.T_R_lower - x.T_R;
    r.slack[1] = x.T_R - p.T_R_upper;
    r.slack[2] = x.T_ad - p.T_ad_max;
    r.slack[3] = x.m_acc - p.m_acc_max;
    for (std::size_t i = 0; i < ConstraintReport::kCount; ++i) {
        r.violated[i] = r.slack[i] > 0.0;
        if (r.violated[i]) ++r.n_violated;
    }
    return r;
}

double conversion(const PhysicalState& x) {
    const double denom = x.m_P + x.m_M;
    if (!(denom > 0.0))
        throw SimulationFault("conversion undefined: m_P + m_M is zero");
    return x.m_P / denom;
}

double adiabatic_temperature(const PhysicalState& x, const ModelParameters& p) {
    const double m_total = x.m_W + x.m_M + x.m_P;
    return x.T_R + p.enthalpy_reaction * x.m_M / (m_total * p.cp_reactor);
}

PhysicalState sample_initial_state(std::mt19937_64& rng, const InitialConditionRanges& cfg,
                                   const ModelParameters& p) {
    const auto draw = [&rng](double lo, double hi) {
        if (lo == hi) return lo;
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    };
    PhysicalState x;
    x.m_W = draw(cfg.m_W_min, cfg.m_W_max);
    x.m_M = draw(cfg.m_M_min, cfg.m_M_max);
    x.m_P = 0.0;
    x.T_R = draw(cfg.T_R_min, cfg.T_R_max);
    x.T_S = draw(cfg.T_S_min, cfg.T_S_max);
    x.T_J = draw(cfg.T_J_min, cfg.T_J_max);
    x.T_EHE = draw(cfg.T_EHE_min, cfg.T_EHE_max);
    x.T_CW_EHE = draw(cfg.T_CW_EHE_min, cfg.T_CW_EHE_max);
    x.m_acc = 0.0;
    x.T_ad = adiabatic_temperature(x, p);
    return x;
}

void validate_state(const PhysicalState& x, const ModelParameters& p) {
    const auto a = x.as_array();
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!std::isfinite(a[i]))
            throw SimulationFault(std::string("non-finite state ") + PhysicalState::field_name(i));
    }
    const double masses[] = {x.m_W, x.m_M, x.m_P, x.m_acc};
    const char* mass_names[] = {"m_W", "m_M", "m_P", "m_acc"};
    for (int i = 0; i < 4; ++i) {
        // tolerate integrator roundoff at the zero boundary
        if (masses[i] < -1e-9)
            throw SimulationFault(std::string("negative mass ") + mass_names[i]);
    }
    const double temps[] = {x.T_R, x.T_S, x.T_J, x.T_EHE, x.T_CW_EHE, x.T_ad};
    const char* temp_names[] = {"T_R", "T_S", "T_J", "T_EHE", "T_CW_EHE", "T_ad"};
    for (int i = 0; i < 6; ++i) {
        if (temps[i] < p.T_plaus_min || temps[i] > p.T_plaus_max) {
            std::ostringstream os;
            os << "temperature " << temp_names[i] << " = " << temps[i]
               << " left plausibility band [" << p.T_plaus_min << ", " << p.T_plaus_max << "]";
            throw SimulationFault(os.str());
        }
    }
}

}  // namespace rrl
