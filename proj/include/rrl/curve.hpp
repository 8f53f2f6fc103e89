#pragma once

#include <cstddef>
#include <vector>

#include "rrl/errors.hpp"

namespace rrl {

struct LearningCurvePoint {
    std::size_t env_steps = 0;
    double mean_return = 0.0;
    double std_return = 0.0;
};

struct LearningCurve {
    std::vector<LearningCurvePoint> points;

    void append(std::size_t env_steps, double mean_return, double std_return) {
        if (!points.empty() && env_steps <= points.back().env_steps)
            throw ContractViolation("learning-curve steps must be strictly increasing");
        points.push_back({env_steps, mean_return, std_return});
    }
};

}  // namespace rrl
