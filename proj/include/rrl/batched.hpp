#pragma once

#include "rrl/mlp.hpp"

namespace rrl {

// Batched forward/backward over B stacked inputs (row-major B x width).
// Each kernel exists twice: a plain serial reference and an OpenMP variant.
// The parallel loops are arranged so every accumulator is owned by exactly
// one thread and summed in the same order as the serial code, so the two
// variants agree bit-for-bit and results never depend on the thread count.

struct BatchedCache {
    std::size_t batch = 0;
    std::vector<std::vector<double>> activations;   // L+1 buffers, B x width
    std::vector<std::vector<double>> pre;           // L buffers, B x width
};

struct BatchedGradients {
    std::vector<std::vector<double>> dW;   // summed over the batch
    std::vector<std::vector<double>> db;
    std::vector<double> dX;                // per-sample input gradients, B x input

    static BatchedGradients zeros_like(const Mlp& net, std::size_t batch);
};

void batched_forward_serial(const Mlp& net, const std::vector<double>& X, std::size_t batch,
                            BatchedCache& cache, std::vector<double>& Y);
void batched_forward_omp(const Mlp& net, const std::vector<double>& X, std::size_t batch,
                         BatchedCache& cache, std::vector<double>& Y);

// dY: gradient w.r.t. the post-activation outputs, B x output row-major.
void batched_backward_serial(const Mlp& net, const BatchedCache& cache,
                             const std::vector<double>& dY, BatchedGradients& out);
void batched_backward_omp(const Mlp& net, const BatchedCache& cache,
                          const std::vector<double>& dY, BatchedGradients& out);

// Dispatchers; `parallel` selects the OpenMP variant when it was compiled in.
void batched_forward(const Mlp& net, const std::vector<double>& X, std::size_t batch,
                     BatchedCache& cache, std::vector<double>& Y, bool parallel);
void batched_backward(const Mlp& net, const BatchedCache& cache, const std::vector<double>& dY,
                      BatchedGradients& out, bool parallel);

bool openmp_compiled();
int openmp_max_threads();

}  // namespace rrl
