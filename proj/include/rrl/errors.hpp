#pragma once

#include <stdexcept>
#include <string>

namespace rrl {

// Bad input files, missing keys, malformed values. CLI exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure inside a simulation (non-finite state, plausibility
// band left). Distinct from a process-constraint violation, which is a
// reportable metric, not an error. CLI exit code 1.
struct SimulationFault : std::runtime_error {
    explicit SimulationFault(const std::string& msg) : std::runtime_error(msg) {}
};

// API misuse: out-of-order recipe assignment, stepping a finished
// episode, shape mismatches.
struct ContractViolation : std::logic_error {
    explicit ContractViolation(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace rrl
