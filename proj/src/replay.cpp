#include "rrl/replay.hpp"

#include "rrl/errors.hpp"

namespace rrl {

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::uint64_t seed)
    : capacity_(capacity), rng_(seed) {
    if (capacity == 0) throw ContractViolation("replay capacity must be positive");
    store_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayBuffer::add(TransitionRecord t) {
    if (store_.size() < capacity_) {
        store_.push_back(std::move(t));
    } else {
        store_[next_] = std::move(t);
    }
    next_ = (next_ + 1) % capacity_;
    ++inserted_;
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t n) {
    if (store_.empty()) throw ContractViolation("sampling from an empty replay buffer");
    std::uniform_int_distribution<std::size_t> dist(0, store_.size() - 1);
    std::vector<std::size_t> idx(n);
    for (std::size_t& i : idx) i = dist(rng_);
    return idx;
}

}  // namespace rrl
