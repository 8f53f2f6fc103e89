#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#include <CLI11.hpp>

#include "rrl/batched.hpp"
#include "rrl/mlp.hpp"

using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return false;
    return true;
}

bool grads_equal(const rrl::BatchedGradients& a, const rrl::BatchedGradients& b) {
    if (!bitwise_equal(a.dX, b.dX)) return false;
    for (std::size_t l = 0; l < a.dW.size(); ++l)
        if (!bitwise_equal(a.dW[l], b.dW[l]) || !bitwise_equal(a.db[l], b.db[l])) return false;
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Serial vs OpenMP batched-kernel benchmark"};
    std::string arch = "50-50";
    std::size_t input = 41, output = 1, repeats = 20;
    std::vector<std::size_t> batches{64, 256, 1024, 4096};
    app.add_option("--arch", arch, "Hidden widths, e.g. 50-50");
    app.add_option("--input", input, "Input width");
    app.add_option("--output", output, "Output width");
    app.add_option("--repeats", repeats, "Timed repetitions per size");
    app.add_option("--batches", batches, "Batch sizes to sweep");
    CLI11_PARSE(app, argc, argv);

    std::vector<std::size_t> widths{input};
    std::size_t pos = 0;
    while (pos < arch.size()) {
        std::size_t next = arch.find('-', pos);
        if (next == std::string::npos) next = arch.size();
        widths.push_back(std::stoul(arch.substr(pos, next - pos)));
        pos = next + 1;
    }
    widths.push_back(output);

    const rrl::Mlp net = rrl::Mlp::make(widths, rrl::OutputHead::kIdentity, 7);
    std::printf("kernels: OpenMP %s, max threads %d\n",
                rrl::openmp_compiled() ? "on" : "off", rrl::openmp_max_threads());
    std::printf("%8s  %12s  %12s  %8s  %12s  %12s  %8s  %s\n", "batch", "fwd serial", "fwd omp",
                "speedup", "bwd serial", "bwd omp", "speedup", "bit-exact");

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    bool all_exact = true;

    for (const std::size_t B : batches) {
        std::vector<double> X(B * input), up(B * output);
        for (double& v : X) v = dist(rng);
        for (double& v : up) v = dist(rng);

        rrl::BatchedCache cache;
        std::vector<double> y_serial, y_omp;
        rrl::BatchedGradients g_serial, g_omp;

        // warm once so both paths touch their buffers before timing
        rrl::batched_forward_serial(net, X, B, cache, y_serial);
        rrl::batched_backward_serial(net, cache, up, g_serial);
        rrl::batched_forward_omp(net, X, B, cache, y_omp);
        rrl::batched_backward_omp(net, cache, up, g_omp);

        auto t0 = Clock::now();
        for (std::size_t r = 0; r < repeats; ++r)
            rrl::batched_forward_serial(net, X, B, cache, y_serial);
        const double fwd_s = ms_since(t0) / static_cast<double>(repeats);

        t0 = Clock::now();
        for (std::size_t r = 0; r < repeats; ++r)
            rrl::batched_forward_omp(net, X, B, cache, y_omp);
        const double fwd_p = ms_since(t0) / static_cast<double>(repeats);

        rrl::batched_forward_serial(net, X, B, cache, y_serial);
        t0 = Clock::now();
        for (std::size_t r = 0; r < repeats; ++r)
            rrl::batched_backward_serial(net, cache, up, g_serial);
        const double bwd_s = ms_since(t0) / static_cast<double>(repeats);

        t0 = Clock::now();
        for (std::size_t r = 0; r < repeats; ++r)
            rrl::batched_backward_omp(net, cache, up, g_omp);
        const double bwd_p = ms_since(t0) / static_cast<double>(repeats);

        const bool exact = bitwise_equal(y_serial, y_omp) && grads_equal(g_serial, g_omp);
        all_exact = all_exact && exact;
        std::printf("%8zu  %9.3f ms  %9.3f ms  %7.2fx  %9.3f ms  %9.3f ms  %7.2fx  %s\n", B,
                    fwd_s, fwd_p, fwd_s / fwd_p, bwd_s, bwd_p, bwd_s / bwd_p,
                    exact ? "yes" : "NO");
    }

    if (!all_exact) {
        std::fprintf(stderr, "FAIL: OpenMP kernels are not bit-exact against serial\n");
        return 1;
    }
    return 0;
}
