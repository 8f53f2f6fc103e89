#include <cmath>
#include <random>

#include <doctest.h>

#include "rrl/env.hpp"
#include "rrl/errors.hpp"
#include "rrl/policy.hpp"
#include "rrl/rk4.hpp"
#include "support/paths.hpp"

using namespace rrl;
using rrl_test::lab_config;

namespace {

// Runs the shipped baseline recipe to batch end, returning (x0, x_final).
std::pair<PhysicalState, PhysicalState> run_baseline_batch(std::uint64_t seed) {
    const LabConfig& lab = lab_config();
    RecipeEnv env(lab, rrl_test::reward_config(3));
    const KvConfig kv = KvConfig::load(rrl_test::lab_config_path());
    FixedRecipePolicy policy(lab.boxes, baseline_recipe(kv, lab.boxes));
    std::vector<double> s = env.reset(seed);
    while (!env.episode_finished()) s = env.step(policy.act(s)).s_next;
    REQUIRE(env.summary().terminated);
    return {env.initial_state(), env.interval_logs().back().x};
}

}  // namespace

TEST_CASE("rk4 integrates exp(-t) to 1e-6 at t=1 with dt=0.01") {
    const auto f = [](const std::array<double, 1>& y) { return std::array<double, 1>{-y[0]}; };
    std::array<double, 1> y{1.0};
    for (int i = 0; i < 100; ++i) y = rk4_step(f, y, 0.01);
    CHECK(std::abs(y[0] - std::exp(-1.0)) <= 1e-6);
}

TEST_CASE("rk4 observed convergence order is at least 3.8") {
    const auto f = [](const std::array<double, 1>& y) { return std::array<double, 1>{-y[0]}; };
    const auto err_at = [&](double dt) {
        std::array<double, 1> y{1.0};
        const int n = static_cast<int>(std::lround(1.0 / dt));
        for (int i = 0; i < n; ++i) y = rk4_step(f, y, dt);
        return std::abs(y[0] - std::exp(-1.0));
    };
    const double e1 = err_at(0.1);
    const double e2 = err_at(0.05);
    const double order = std::log2(e1 / e2);
    CHECK(order >= 3.8);
}

TEST_CASE("rk4 is exact on a linear-in-time derivative") {
    // y' = c: one step lands exactly on y0 + c h, any h
    const auto f = [](const std::array<double, 1>&) { return std::array<double, 1>{3.25}; };
    const auto y = rk4_step(f, std::array<double, 1>{1.5}, 0.4);
    CHECK(y[0] == doctest::Approx(1.5 + 3.25 * 0.4).epsilon(1e-15));
}

TEST_CASE("initial-state sampling is seeded and in range") {
    const LabConfig& lab = lab_config();
    std::mt19937_64 a(99), b(99), c(100);
    const PhysicalState xa = sample_initial_state(a, lab.ic, lab.params);
    const PhysicalState xb = sample_initial_state(b, lab.ic, lab.params);
    const PhysicalState xc = sample_initial_state(c, lab.ic, lab.params);
    CHECK(xa == xb);
    CHECK(xa != xc);
    CHECK(xa.m_W >= lab.ic.m_W_min);
    CHECK(xa.m_W <= lab.ic.m_W_max);
    CHECK(xa.m_M >= lab.ic.m_M_min);
    CHECK(xa.m_M <= lab.ic.m_M_max);
    CHECK(xa.T_R >= lab.ic.T_R_min);
    CHECK(xa.T_R <= lab.ic.T_R_max);
    CHECK(xa.m_P == 0.0);
    CHECK(xa.m_acc == 0.0);
    CHECK(xa.T_ad == doctest::Approx(adiabatic_temperature(xa, lab.params)).epsilon(1e-12));
}

TEST_CASE("control input construction enforces the actuator box") {
    const ModelParameters& p = lab_config().params;
    CHECK_NOTHROW(make_control_input(0.0, 350.0, 350.0, p));
    CHECK_NOTHROW(make_control_input(p.actuators.feed_max, p.actuators.T_J_in_max,
                                     p.actuators.T_CW_EHE_in_min, p));
    CHECK_THROWS_AS(make_control_input(-1.0, 350.0, 350.0, p), ContractViolation);
    CHECK_THROWS_AS(make_control_input(0.0, 1000.0, 350.0, p), ContractViolation);
}

TEST_CASE("one control interval equals thirty explicit substeps") {
    const LabConfig& lab = lab_config();
    std::mt19937_64 rng(5);
    const PhysicalState x0 = sample_initial_state(rng, lab.ic, lab.params);
    const ControlInput u = make_control_input(5000.0, 355.0, 340.0, lab.params);

    PhysicalState manual = x0;
    for (int i = 0; i < 30; ++i) manual = step(manual, u, lab.params.dt_substep_s, lab.params);
    const PhysicalState direct = step_control_interval(x0, u, lab.params);
    CHECK(manual == direct);
}

TEST_CASE("leaving the plausibility band is a simulation fault") {
    const LabConfig& lab = lab_config();
    std::mt19937_64 rng(5);
    PhysicalState x = sample_initial_state(rng, lab.ic, lab.params);
    x.T_R = lab.params.T_plaus_max + 50.0;
    CHECK_THROWS_AS(validate_state(x, lab.params), SimulationFault);
    CHECK_THROWS_AS(step(x, make_control_input(0.0, 350.0, 350.0, lab.params), 1.0, lab.params),
                    SimulationFault);
}

TEST_CASE("constraint report counts violated bounds individually") {
    const LabConfig& lab = lab_config();
    std::mt19937_64 rng(5);
    PhysicalState x = sample_initial_state(rng, lab.ic, lab.params);
    const ControlInput u = make_control_input(0.0, 350.0, 350.0, lab.params);

    CHECK(check_constraints(x, u, lab.params).n_violated == 0);

    PhysicalState hot = x;
    hot.T_R = lab.params.T_R_upper + 0.5;
    const ConstraintReport r1 = check_constraints(hot, u, lab.params);
    CHECK(r1.n_violated == 1);
    CHECK(r1.violated[1]);
    CHECK(r1.slack[1] == doctest::Approx(0.5).epsilon(1e-12));

    hot.m_acc = lab.params.m_acc_max + 10.0;
    CHECK(check_constraints(hot, u, lab.params).n_violated == 2);

    PhysicalState cold = x;
    cold.T_R = lab.params.T_R_lower - 0.2;
    const ConstraintReport r2 = check_constraints(cold, u, lab.params);
    CHECK(r2.n_violated == 1);
    CHECK(r2.violated[0]);
}

TEST_CASE("conversion is m_P over m_P plus m_M") {
    PhysicalState x;
    x.m_P = 900.0;
    x.m_M = 100.0;
    CHECK(conversion(x) == doctest::Approx(0.9).epsilon(1e-15));
    x.m_P = 0.0;
    x.m_M = 0.0;
    CHECK_THROWS_AS(conversion(x), SimulationFault);
}

TEST_CASE("mass balance holds over a full nominal batch") {
    const auto [x0, xf] = run_baseline_batch(1000001);
    const double fed = xf.m_acc;                     // integrated feed mass
    const double gained = (xf.m_W + xf.m_M + xf.m_P) - (x0.m_W + x0.m_M + x0.m_P);
    CHECK(std::abs(gained - fed) / (xf.m_W + xf.m_M + xf.m_P) <= 1e-6);
}

TEST_CASE("integrated T_ad stays consistent with its algebraic definition") {
    const LabConfig& lab = lab_config();
    const auto [x0, xf] = run_baseline_batch(1000002);
    (void)x0;
    CHECK(std::abs(xf.T_ad - adiabatic_temperature(xf, lab.params)) <= 0.1);
}

TEST_CASE("simulation is bit-deterministic") {
    const auto [a0, af] = run_baseline_batch(1000003);
    const auto [b0, bf] = run_baseline_batch(1000003);
    CHECK(a0 == b0);
    CHECK(af == bf);
}
