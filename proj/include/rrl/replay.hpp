#pragma once

#include <cstdint>
#include <random>

#include "rrl/env.hpp"

namespace rrl {

// Seeded ring buffer of transitions; sampling is with replacement and fully
// reproducible from the construction seed.
class ReplayBuffer {
public:
    ReplayBuffer(std::size_t capacity, std::uint64_t seed);

    void add(TransitionRecord t);
    std::size_t size() const { return store_.size(); }
    std::size_t capacity() const { return capacity_; }
    std::size_t inserted() const { return inserted_; }
    const TransitionRecord& at(std::size_t i) const { return store_[i]; }

    std::vector<std::size_t> sample_indices(std::size_t n);

private:
    std::size_t capacity_;
    std::size_t next_ = 0;
    std::size_t inserted_ = 0;
    std::vector<TransitionRecord> store_;
    std::mt19937_64 rng_;
};

}  // namespace rrl
