#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>

#include "rrl/kv_config.hpp"

namespace rrl {

// The ten states of the semi-batch polymerization reactor. Masses in kg,
// temperatures in K. m_acc and T_ad are bookkeeping states carried because
// process constraints are placed on them.
struct PhysicalState {
    double m_W = 0.0;        // water mass
    double m_M = 0.0;        // monomer mass
    double m_P = 0.0;        // product mass
    double T_R = 0.0;        // reactor content temperature
    double T_S = 0.0;        // wall (steel) temperature
    double T_J = 0.0;        // jacket water temperature
    double T_EHE = 0.0;      // external heat exchanger content temperature
    double T_CW_EHE = 0.0;   // EHE cooling water temperature
    double m_acc = 0.0;      // accumulated feed mass
    double T_ad = 0.0;       // adiabatic end temperature

    static constexpr std::size_t kSize = 10;

    std::array<double, kSize> as_array() const {
        return {m_W, m_M, m_P, T_R, T_S, T_J, T_EHE, T_CW_EHE, m_acc, T_ad};
    }
    static PhysicalState from_array(const std::array<double, kSize>& a) {
        return {a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7], a[8], a[9]};
    }

    bool operator==(const PhysicalState&) const = default;

    static const char* field_name(std::size_t i);
};

// Physical control inputs. Feed rate in kg/h, inlet temperatures in K.
struct ControlInput {
    double m_dot_feed = 0.0;
    double T_J_in = 0.0;
    double T_CW_EHE_in = 0.0;

    bool operator==(const ControlInput&) const = default;
};

struct ActuatorBox {
    double feed_min = 0.0, feed_max = 0.0;
    double T_J_in_min = 0.0, T_J_in_max = 0.0;
    double T_CW_EHE_in_min = 0.0, T_CW_EHE_in_max = 0.0;

    bool contains(const ControlInput& u) const;
    ControlInput clamp(const ControlInput& u) const;
};

// Model constants, actuator box and constraint bounds. Values live in the
// versioned parameter file (config/reactor_params.txt); code never embeds
// them. All thermal constants use kJ/kg/K/h units, so derivatives come out
// per hour.
struct ModelParameters {
    // kinetics
    double gas_constant = 0.0;        // kJ/(kmol K)
    double activation_energy = 0.0;   // kJ/kmol
    double k0 = 0.0;                  // 1/h
    double k_U1 = 0.0;
    double k_U2 = 0.0;
    double enthalpy_reaction = 0.0;   // kJ/kg monomer

    // feed
    double feed_temperature = 0.0;    // K
    double w_water_feed = 0.0;
    double w_monomer_feed = 0.0;

    // heat capacities, kJ/(kg K)
    double cp_water = 0.0;
    double cp_steel = 0.0;
    double cp_feed = 0.0;
    double cp_reactor = 0.0;

    // hold-ups and circulation flows
    double m_jacket_water = 0.0;      // kg
    double flow_jacket_water = 0.0;   // kg/h
    double m_ehe_water = 0.0;         // kg
    double flow_ehe_water = 0.0;      // kg/h
    double m_ehe_content = 0.0;       // kg of reactor mixture held in the EHE
    double flow_ehe_content = 0.0;    // kg/h circulated through the EHE
    double m_steel = 0.0;             // kg

    // heat transfer
    double k_water_steel = 0.0;       // kJ/(h m^2 K)
    double k_monomer_steel = 0.0;
    double k_product_steel = 0.0;
    double area_jacket = 0.0;         // m^2
    double alpha_ehe = 0.0;           // kJ/(h K)

    ActuatorBox actuators;

    // process constraints (reported, not enforced)
    double T_R_lower = 0.0;
    double T_R_upper = 0.0;
    double T_ad_max = 0.0;
    double m_acc_max = 0.0;

    // plausibility band; leaving it is a simulation fault
    double T_plaus_min = 0.0;
    double T_plaus_max = 0.0;

    // timing
    double dt_substep_s = 0.0;        // inner RK4 step
    double control_interval_s = 0.0;  // zero-order hold of u

    static ModelParameters from_config(const KvConfig& cfg);
    void validate() const;
};

// Uniform sampling boxes for fresh batches. m_P and m_acc always start at
// zero; T_ad is derived from the sampled masses and temperatures.
struct InitialConditionRanges {
    double m_W_min = 0.0, m_W_max = 0.0;
    double m_M_min = 0.0, m_M_max = 0.0;
    double T_R_min = 0.0, T_R_max = 0.0;
    double T_S_min = 0.0, T_S_max = 0.0;
    double T_J_min = 0.0, T_J_max = 0.0;
    double T_EHE_min = 0.0, T_EHE_max = 0.0;
    double T_CW_EHE_min = 0.0, T_CW_EHE_max = 0.0;

    static InitialConditionRanges from_config(const KvConfig& cfg);
};

// Signed slacks in the g <= 0 convention; g_i > 0 means constraint i is
// violated by that amount.
struct ConstraintReport {
    static constexpr std::size_t kCount = 4;
    // order: T_R below band, T_R above band, T_ad above max, m_acc above max
    std::array<double, kCount> slack{};
    std::array<bool, kCount> violated{};
    int n_violated = 0;

    static const char* constraint_name(std::size_t i);
};

// Construction-checked control input; throws ContractViolation outside the box.
ControlInput make_control_input(double m_dot_feed, double T_J_in, double T_CW_EHE_in,
                                const ModelParameters& p);

// Time derivative of the state in units per hour, u held constant.
// Throws SimulationFault when a derivative comes out non-finite,
// naming the offending state.
std::array<double, PhysicalState::kSize> rhs(const PhysicalState& x, const ControlInput& u,
                                             const ModelParameters& p);

// One RK4 step of dt seconds (u held constant). Checks the plausibility
// band on the result.
PhysicalState step(const PhysicalState& x, const ControlInput& u, double dt_s,
                   const ModelParameters& p);

// Simulates one control interval (p.control_interval_s) by repeated RK4
// substeps of p.dt_substep_s.
PhysicalState step_control_interval(const PhysicalState& x, const ControlInput& u,
                                    const ModelParameters& p);

ConstraintReport check_constraints(const PhysicalState& x, const ControlInput& u,
                                   const ModelParameters& p);

// chi = m_P / (m_P + m_M). Throws SimulationFault when both masses are zero.
double conversion(const PhysicalState& x);

// The adiabatic end temperature implied algebraically by the current state;
// T_ad is integrated as a state, this is its consistency reference.
double adiabatic_temperature(const PhysicalState& x, const ModelParameters& p);

PhysicalState sample_initial_state(std::mt19937_64& rng, const InitialConditionRanges& cfg,
                                   const ModelParameters& p);

// Plausibility check; throws SimulationFault naming the first offending state.
void validate_state(const PhysicalState& x, const ModelParameters& p);

}  // namespace rrl
