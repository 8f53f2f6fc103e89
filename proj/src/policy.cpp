#include "rrl/policy.hpp"

#include "rrl/errors.hpp"

namespace rrl {

NetworkPolicy::NetworkPolicy(Mlp net) : net_(std::move(net)) { net_.validate(); }

std::vector<double> NetworkPolicy::act(const std::vector<double>& observation) {
    return forward(net_, observation);
}

std::unique_ptr<Policy> NetworkPolicy::clone() const {
    return std::make_unique<NetworkPolicy>(*this);
}

FixedRecipePolicy::FixedRecipePolicy(const ExpertBoxes& boxes, const RecipeParameters& theta)
    : boxes_(boxes), theta_(theta) {
    if (theta.n_set != kNumTheta)
        throw ContractViolation("fixed recipe policy needs a fully set parameter vector");
}

std::vector<double> FixedRecipePolicy::act(const std::vector<double>& /*observation*/) {
    if (next_c_ > kNumTheta) throw ContractViolation("fixed recipe policy exhausted its steps");
    const double a = boxes_.inverse_map(next_c_, theta_.value(next_c_));
    ++next_c_;
    return {a};
}

std::unique_ptr<Policy> FixedRecipePolicy::clone() const {
    auto p = std::make_unique<FixedRecipePolicy>(boxes_, theta_);
    return p;
}

ScriptedPolicy::ScriptedPolicy(std::vector<std::vector<double>> actions)
    : actions_(std::move(actions)) {}

std::vector<double> ScriptedPolicy::act(const std::vector<double>& /*observation*/) {
    if (next_ >= actions_.size())
        throw ContractViolation("scripted policy exhausted its action sequence");
    return actions_[next_++];
}

std::unique_ptr<Policy> ScriptedPolicy::clone() const {
    auto p = std::make_unique<ScriptedPolicy>(actions_);
    return p;
}

}  // namespace rrl
