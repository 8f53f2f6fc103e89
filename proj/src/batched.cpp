#include "rrl/batched.hpp"

#include <cmath>

#include "rrl/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rrl {

namespace {

void check_batch_shapes(const Mlp& net, const std::vector<double>& X, std::size_t batch) {
    if (batch == 0) throw ContractViolation("batch must be nonempty");
    if (X.size() != batch * net.input_size())
        throw ContractViolation("batched input has wrong size");
}

void prepare_cache(const Mlp& net, std::size_t batch, BatchedCache& cache) {
    const std::size_t L = net.n_layers();
    cache.batch = batch;
    cache.activations.resize(L + 1);
    cache.pre.resize(L);
    for (std::size_t l = 0; l <= L; ++l) cache.activations[l].resize(batch * net.widths[l]);
    for (std::size_t l = 0; l < L; ++l) cache.pre[l].resize(batch * net.widths[l + 1]);
}

// forward for one sample inside prepared batch buffers
void forward_one(const Mlp& net, BatchedCache& cache, std::size_t b) {
    const std::size_t L = net.n_layers();
    for (std::size_t l = 0; l < L; ++l) {
        const std::size_t rows = net.widths[l + 1];
        const std::size_t cols = net.widths[l];
        const double* in = &cache.activations[l][b * cols];
        double* pre = &cache.pre[l][b * rows];
        for (std::size_t i = 0; i < rows; ++i) {
            double acc = net.b[l][i];
            const double* w = &net.W[l][i * cols];
            for (std::size_t j = 0; j < cols; ++j) acc += w[j] * in[j];
            pre[i] = acc;
        }
        double* out = &cache.activations[l + 1][b * rows];
        if (l + 1 < L) {
            for (std::size_t i = 0; i < rows; ++i) out[i] = pre[i] > 0.0 ? pre[i] : 0.0;
        } else if (net.head == OutputHead::kTanh) {
            for (std::size_t i = 0; i < rows; ++i) out[i] = std::tanh(pre[i]);
        } else {
            for (std::size_t i = 0; i < rows; ++i) out[i] = pre[i];
        }
    }
}

// per-sample deltas for every layer; delta[l] is B x widths[l+1]
void compute_deltas_one(const Mlp& net, const BatchedCache& cache,
                        const std::vector<double>& dY,
                        std::vector<std::vector<double>>& delta, std::size_t b) {
    const std::size_t L = net.n_layers();
    const std::size_t out_w = net.output_size();
    {
        double* d = &delta[L - 1][b * out_w];
        const double* up = &dY[b * out_w];
        if (net.head == OutputHead::kTanh) {
            const double* y = &cache.activations[L][b * out_w];
            for (std::size_t i = 0; i < out_w; ++i) d[i] = up[i] * (1.0 - y[i] * y[i]);
        } else {
            for (std::size_t i = 0; i < out_w; ++i) d[i] = up[i];
        }
    }
    for (std::size_t l = L - 1; l-- > 0;) {
        const std::size_t rows = net.widths[l + 2];
        const std::size_t cols = net.widths[l + 1];
        const double* dnext = &delta[l + 1][b * rows];
        double* d = &delta[l][b * cols];
        for (std::size_t j = 0; j < cols; ++j) d[j] = 0.0;
        for (std::size_t i = 0; i < rows; ++i) {
            const double* w = &net.W[l + 1][i * cols];
            const double di = dnext[i];
            for (std::size_t j = 0; j < cols; ++j) d[j] += w[j] * di;
        }
        const double* z = &cache.pre[l][b * cols];
        for (std::size_t j = 0; j < cols; ++j)
            if (z[j] <= 0.0) d[j] = 0.0;
    }
}

void input_grad_one(const Mlp& net, const std::vector<std::vector<double>>& delta,
                    std::vector<double>& dX, std::size_t b) {
    const std::size_t cols = net.input_size();
    const std::size_t rows = net.widths[1];
    double* out = &dX[b * cols];
    const double* d = &delta[0][b * rows];
    for (std::size_t j = 0; j < cols; ++j) out[j] = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
        const double* w = &net.W[0][i * cols];
        for (std::size_t j = 0; j < cols; ++j) out[j] += w[j] * d[i];
    }
}

// weight/bias reduction for the rows [row_begin, row_end) of layer l;
// the batch loop is innermost and ascending so the sum order matches the
// serial reference exactly.
void reduce_rows(const Mlp& net, const BatchedCache& cache,
                 const std::vector<std::vector<double>>& delta, std::size_t l,
                 std::size_t row_begin, std::size_t row_end, std::size_t batch,
                 BatchedGradients& out) {
    const std::size_t rows = net.widths[l + 1];
    const std::size_t cols = net.widths[l];
    for (std::size_t i = row_begin; i < row_end; ++i) {
        double* dw = &out.dW[l][i * cols];
        double dbi = 0.0;
        for (std::size_t j = 0; j < cols; ++j) dw[j] = 0.0;
        for (std::size_t b = 0; b < batch; ++b) {
            const double di = delta[l][b * rows + i];
            dbi += di;
            const double* a = &cache.activations[l][b * cols];
            for (std::size_t j = 0; j < cols; ++j) dw[j] += di * a[j];
        }
        out.db[l][i] = dbi;
    }
}

std::vector<std::vector<double>> make_delta_buffers(const Mlp& net, std::size_t batch) {
    std::vector<std::vector<double>> delta(net.n_layers());
    for (std::size_t l = 0; l < net.n_layers(); ++l)
        delta[l].resize(batch * net.widths[l + 1]);
    return delta;
}

}  // namespace

BatchedGradients BatchedGradients::zeros_like(const Mlp& net, std::size_t batch) {
    BatchedGradients g;
    for (std::size_t l = 0; l < net.n_layers(); ++l) {
        g.dW.emplace_back(net.W[l].size(), 0.0);
        g.db.emplace_back(net.b[l].size(), 0.0);
    }
    g.dX.assign(batch * net.input_size(), 0.0);
    return g;
}

void batched_forward_serial(const Mlp& net, const std::vector<double>& X, std::size_t batch,
                            BatchedCache& cache, std::vector<double>& Y) {
    check_batch_shapes(net, X, batch);
    prepare_cache(net, batch, cache);
    cache.activations[0] = X;
    for (std::size_t b = 0; b < batch; ++b) forward_one(net, cache, b);
    Y = cache.activations[net.n_layers()];
}

void batched_forward_omp(const Mlp& net, const std::vector<double>& X, std::size_t batch,
                         BatchedCache& cache, std::vector<double>& Y) {
    check_batch_shapes(net, X, batch);
    prepare_cache(net, batch, cache);
    cache.activations[0] = X;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::size_t b = 0; b < batch; ++b) forward_one(net, cache, b);
    Y = cache.activations[net.n_layers()];
}

void batched_backward_serial(const Mlp& net, const BatchedCache& cache,
                             const std::vector<double>& dY, BatchedGradients& out) {
    const std::size_t batch = cache.batch;
    if (dY.size() != batch * net.output_size())
        throw ContractViolation("batched upstream gradient has wrong size");
    out = BatchedGradients::zeros_like(net, batch);
    std::vector<std::vector<double>> delta = make_delta_buffers(net, batch);
    for (std::size_t b = 0; b < batch; ++b) {
        compute_deltas_one(net, cache, dY, delta, b);
        input_grad_one(net, delta, out.dX, b);
    }
    for (std::size_t l = 0; l < net.n_layers(); ++l)
        reduce_rows(net, cache, delta, l, 0, net.widths[l + 1], batch, out);
}

void batched_backward_omp(const Mlp& net, const BatchedCache& cache,
                          const std::vector<double>& dY, BatchedGradients& out) {
    const std::size_t batch = cache.batch;
    if (dY.size() != batch * net.output_size())
        throw ContractViolation("batched upstream gradient has wrong size");
    out = BatchedGradients::zeros_like(net, batch);
    std::vector<std::vector<double>> delta = make_delta_buffers(net, batch);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::size_t b = 0; b < batch; ++b) {
        compute_deltas_one(net, cache, dY, delta, b);
        input_grad_one(net, delta, out.dX, b);
    }
    for (std::size_t l = 0; l < net.n_layers(); ++l) {
        const std::size_t rows = net.widths[l + 1];
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (std::size_t i = 0; i < rows; ++i)
            reduce_rows(net, cache, delta, l, i, i + 1, batch, out);
    }
}

void batched_forward(const Mlp& net, const std::vector<double>& X, std::size_t batch,
                     BatchedCache& cache, std::vector<double>& Y, bool parallel) {
    if (parallel)
        batched_forward_omp(net, X, batch, cache, Y);
    else
        batched_forward_serial(net, X, batch, cache, Y);
}

void batched_backward(const Mlp& net, const BatchedCache& cache, const std::vector<double>& dY,
                      BatchedGradients& out, bool parallel) {
    if (parallel)
        batched_backward_omp(net, cache, dY, out);
    else
        batched_backward_serial(net, cache, dY, out);
}

bool openmp_compiled() {
#ifdef _OPENMP
    return true;
#else
    return false;
#endif
}

int openmp_max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace rrl
