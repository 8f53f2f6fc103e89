#pragma once

#include <memory>

#include "rrl/env.hpp"
#include "rrl/mlp.hpp"

namespace rrl {

// Maps observations to actions in [-1, 1]^n. begin_episode resets any
// per-episode internal state; clone supports parallel episode fan-out.
class Policy {
public:
    virtual ~Policy() = default;
    virtual void begin_episode() {}
    virtual std::vector<double> act(const std::vector<double>& observation) = 0;
    virtual std::unique_ptr<Policy> clone() const = 0;
};

// Stateless network policy (tanh head keeps actions inside (-1, 1)).
class NetworkPolicy final : public Policy {
public:
    explicit NetworkPolicy(Mlp net);
    std::vector<double> act(const std::vector<double>& observation) override;
    std::unique_ptr<Policy> clone() const override;
    const Mlp& net() const { return net_; }

private:
    Mlp net_;
};

// Plays one fixed recipe: at step c it emits the action that maps back onto
// theta_c. Only meaningful on the recipe environment.
class FixedRecipePolicy final : public Policy {
public:
    FixedRecipePolicy(const ExpertBoxes& boxes, const RecipeParameters& theta);
    void begin_episode() override { next_c_ = 1; }
    std::vector<double> act(const std::vector<double>& observation) override;
    std::unique_ptr<Policy> clone() const override;

private:
    ExpertBoxes boxes_;
    RecipeParameters theta_;
    int next_c_ = 1;
};

// Replays a fixed action sequence (debugging and the simulate command).
class ScriptedPolicy final : public Policy {
public:
    explicit ScriptedPolicy(std::vector<std::vector<double>> actions);
    void begin_episode() override { next_ = 0; }
    std::vector<double> act(const std::vector<double>& observation) override;
    std::unique_ptr<Policy> clone() const override;

private:
    std::vector<std::vector<double>> actions_;
    std::size_t next_ = 0;
};

}  // namespace rrl
