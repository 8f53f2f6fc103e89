#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rrl {

enum class OutputHead { kTanh, kIdentity };

// Fully connected network, ReLU hidden layers; row-major weight matrices.
// Layer l maps widths[l] -> widths[l+1].
struct Mlp {
    std::vector<std::size_t> widths;
    OutputHead head = OutputHead::kIdentity;
    std::vector<std::vector<double>> W;   // W[l]: widths[l+1] x widths[l], row-major
    std::vector<std::vector<double>> b;   // b[l]: widths[l+1]

    static Mlp make(const std::vector<std::size_t>& widths, OutputHead head,
                    std::uint64_t seed);

    std::size_t n_layers() const { return W.size(); }
    std::size_t input_size() const { return widths.front(); }
    std::size_t output_size() const { return widths.back(); }
    std::size_t parameter_count() const;
    void validate() const;   // shapes consistent, all parameters finite

    bool operator==(const Mlp&) const = default;
};

struct ForwardCache {
    // activations[0] is the input; activations[l+1] the post-activation of layer l
    std::vector<std::vector<double>> activations;
    std::vector<std::vector<double>> pre;   // pre[l]: pre-activation of layer l
};

std::vector<double> forward(const Mlp& net, const std::vector<double>& input);
std::vector<double> forward_cached(const Mlp& net, const std::vector<double>& input,
                                   ForwardCache& cache);

// Exact reverse-mode gradients of the scalar loss whose output gradient is
// `upstream` (w.r.t. the post-activation network output).
struct GradientBundle {
    std::vector<std::vector<double>> dW;
    std::vector<std::vector<double>> db;
    std::vector<double> dinput;

    static GradientBundle zeros_like(const Mlp& net);
    void accumulate(const GradientBundle& other, double scale);
    void scale(double s);
};

GradientBundle backward(const Mlp& net, const ForwardCache& cache,
                        const std::vector<double>& upstream);

struct AdamState {
    std::vector<std::vector<double>> mW, vW, mb, vb;
    long t = 0;

    static AdamState zeros_like(const Mlp& net);
};

// Descent convention: parameters move against the gradient.
void adam_update(Mlp& net, const GradientBundle& g, AdamState& st, double lr,
                 double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

void soft_update(Mlp& target, const Mlp& online, double tau);

struct WeightsFile {
    Mlp net;
    std::uint64_t seed = 0;
    std::string created_at;
};

void save_weights(const Mlp& net, const std::string& path, std::uint64_t seed,
                  const std::string& created_at);
WeightsFile load_weights(const std::string& path, OutputHead head);

}  // namespace rrl
