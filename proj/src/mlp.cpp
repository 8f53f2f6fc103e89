#include "rrl/mlp.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

#include "rrl/errors.hpp"

namespace rrl {

Mlp Mlp::make(const std::vector<std::size_t>& widths, OutputHead head, std::uint64_t seed) {
    if (widths.size() < 2) throw ContractViolation("network needs at least input and output widths");
    for (std::size_t w : widths)
        if (w == 0) throw ContractViolation("network widths must be positive");

    Mlp net;
    net.widths = widths;
    net.head = head;
    std::mt19937_64 rng(seed);
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        const std::size_t fan_in = widths[l];
        const std::size_t fan_out = widths[l + 1];
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
        std::uniform_real_distribution<double> dist(-limit, limit);
        std::vector<double> w(fan_out * fan_in);
        for (double& v : w) v = dist(rng);
        net.W.push_back(std::move(w));
        net.b.emplace_back(fan_out, 0.0);
    }
    return net;
}

std::size_t Mlp::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < W.size(); ++l) n += W[l].size() + b[l].size();
    return n;
}

void Mlp::validate() const {
    if (widths.size() < 2 || W.size() != widths.size() - 1 || b.size() != W.size())
        throw ContractViolation("network layer bookkeeping is inconsistent");
    for (std::size_t l = 0; l < W.size(); ++l) {
        if (W[l].size() != widths[l + 1] * widths[l] || b[l].size() != widths[l + 1])
            throw ContractViolation("layer " + std::to_string(l) + " has mismatched shapes");
        for (double v : W[l])
            if (!std::isfinite(v)) throw ContractViolation("non-finite weight");
        for (double v : b[l])
            if (!std::isfinite(v)) throw ContractViolation("non-finite bias");
    }
}

namespace {

void affine(const std::vector<double>& W, const std::vector<double>& b,
            const std::vector<double>& in, std::vector<double>& out) {
    const std::size_t rows = b.size();
    const std::size_t cols = in.size();
    out.resize(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        double acc = b[i];
        const double* w = &W[i * cols];
        for (std::size_t j = 0; j < cols; ++j) acc += w[j] * in[j];
        out[i] = acc;
    }
}

void apply_head(OutputHead head, const std::vector<double>& pre, std::vector<double>& out) {
    out = pre;
    if (head == OutputHead::kTanh)
        for (double& v : out) v = std::tanh(v);
}

}  // namespace

std::vector<double> forward_cached(const Mlp& net, const std::vector<double>& input,
                                   ForwardCache& cache) {
    if (input.size() != net.input_size())
        throw ContractViolation("input width " + std::to_string(input.size()) +
                                " does not match network input " +
                                std::to_string(net.input_size()));
    const std::size_t L = net.n_layers();
    cache.activations.assign(L + 1, {});
    cache.pre.assign(L, {});
    cache.activations[0] = input;
    for (std::size_t l = 0; l < L; ++l) {
        affine(net.W[l], net.b[l], cache.activations[l], cache.pre[l]);
        if (l + 1 < L) {
            cache.activations[l + 1] = cache.pre[l];
            for (double& v : cache.activations[l + 1])
                if (v < 0.0) v = 0.0;
        } else {
            apply_head(net.head, cache.pre[l], cache.activations[L]);
        }
    }
    return cache.activations[L];
}

std::vector<double> forward(const Mlp& net, const std::vector<double>& input) {
    ForwardCache cache;
    return forward_cached(net, input, cache);
}

GradientBundle GradientBundle::zeros_like(const Mlp& net) {
    GradientBundle g;
    for (std::size_t l = 0; l < net.n_layers(); ++l) {
        g.dW.emplace_back(net.W[l].size(), 0.0);
        g.db.emplace_back(net.b[l].size(), 0.0);
    }
    g.dinput.assign(net.input_size(), 0.0);
    return g;
}

void GradientBundle::accumulate(const GradientBundle& other, double s) {
    for (std::size_t l = 0; l < dW.size(); ++l) {
        for (std::size_t i = 0; i < dW[l].size(); ++i) dW[l][i] += s * other.dW[l][i];
        for (std::size_t i = 0; i < db[l].size(); ++i) db[l][i] += s * other.db[l][i];
    }
    for (std::size_t i = 0; i < dinput.size(); ++i) dinput[i] += s * other.dinput[i];
}

void GradientBundle::scale(double s) {
    for (auto& layer : dW)
        for (double& v : layer) v *= s;
    for (auto& layer : db)
        for (double& v : layer) v *= s;
    for (double& v : dinput) v *= s;
}

GradientBundle backward(const Mlp& net, const ForwardCache& cache,
                        const std::vector<double>& upstream) {
    const std::size_t L = net.n_layers();
    if (cache.activations.size() != L + 1 || cache.pre.size() != L)
        throw ContractViolation("forward cache does not match the network");
    if (upstream.size() != net.output_size())
        throw ContractViolation("upstream gradient width mismatch");

    GradientBundle g = GradientBundle::zeros_like(net);

    // delta at the output, through the head activation
    std::vector<double> delta = upstream;
    if (net.head == OutputHead::kTanh) {
        const std::vector<double>& y = cache.activations[L];
        for (std::size_t i = 0; i < delta.size(); ++i) delta[i] *= 1.0 - y[i] * y[i];
    }

    for (std::size_t l = L; l-- > 0;) {
        const std::vector<double>& a = cache.activations[l];
        const std::size_t rows = net.b[l].size();
        const std::size_t cols = a.size();
        for (std::size_t i = 0; i < rows; ++i) {
            g.db[l][i] = delta[i];
            double* dw = &g.dW[l][i * cols];
            for (std::size_t j = 0; j < cols; ++j) dw[j] = delta[i] * a[j];
        }
        // propagate to the previous activation
        std::vector<double> prev(cols, 0.0);
        for (std::size_t i = 0; i < rows; ++i) {
            const double* w = &net.W[l][i * cols];
            for (std::size_t j = 0; j < cols; ++j) prev[j] += w[j] * delta[i];
        }
        if (l > 0) {
            // ReLU subgradient: zero at and below zero
            const std::vector<double>& z = cache.pre[l - 1];
            for (std::size_t j = 0; j < cols; ++j)
                if (z[j] <= 0.0) prev[j] = 0.0;
        }
        delta = std::move(prev);
    }
    g.dinput = delta;
    return g;
}

AdamState AdamState::zeros_like(const Mlp& net) {
    AdamState st;
    for (std::size_t l = 0; l < net.n_layers(); ++l) {
        st.mW.emplace_back(net.W[l].size(), 0.0);
        st.vW.emplace_back(net.W[l].size(), 0.0);
        st.mb.emplace_back(net.b[l].size(), 0.0);
        st.vb.emplace_back(net.b[l].size(), 0.0);
    }
    return st;
}

void adam_update(Mlp& net, const GradientBundle& g, AdamState& st, double lr,
                 double beta1, double beta2, double eps) {
    ++st.t;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(st.t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(st.t));
    const auto update = [&](std::vector<double>& p, const std::vector<double>& grad,
                            std::vector<double>& m, std::vector<double>& v) {
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
            v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
    };
    for (std::size_t l = 0; l < net.n_layers(); ++l) {
        update(net.W[l], g.dW[l], st.mW[l], st.vW[l]);
        update(net.b[l], g.db[l], st.mb[l], st.vb[l]);
    }
}

void soft_update(Mlp& target, const Mlp& online, double tau) {
    if (target.widths != online.widths)
        throw ContractViolation("soft update across different architectures");
    for (std::size_t l = 0; l < target.n_layers(); ++l) {
        for (std::size_t i = 0; i < target.W[l].size(); ++i)
            target.W[l][i] = (1.0 - tau) * target.W[l][i] + tau * online.W[l][i];
        for (std::size_t i = 0; i < target.b[l].size(); ++i)
            target.b[l][i] = (1.0 - tau) * target.b[l][i] + tau * online.b[l][i];
    }
}

void save_weights(const Mlp& net, const std::string& path, std::uint64_t seed,
                  const std::string& created_at) {
    net.validate();
    nlohmann::ordered_json j;
    j["arch"] = net.widths;
    j["layers"] = nlohmann::json::array();
    for (std::size_t l = 0; l < net.n_layers(); ++l) {
        nlohmann::ordered_json layer;
        layer["W"] = net.W[l];
        layer["b"] = net.b[l];
        j["layers"].push_back(std::move(layer));
    }
    j["seed"] = seed;
    j["created_at"] = created_at;
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write weights file: " + path);
    out << j.dump(2) << '\n';
}

WeightsFile load_weights(const std::string& path, OutputHead head) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read weights file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed weights file " + path + ": " + e.what());
    }
    WeightsFile wf;
    try {
        wf.net.widths = j.at("arch").get<std::vector<std::size_t>>();
        wf.net.head = head;
        for (const auto& layer : j.at("layers")) {
            wf.net.W.push_back(layer.at("W").get<std::vector<double>>());
            wf.net.b.push_back(layer.at("b").get<std::vector<double>>());
        }
        wf.seed = j.at("seed").get<std::uint64_t>();
        wf.created_at = j.at("created_at").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("weights file " + path + " is missing fields: " + e.what());
    }
    try {
        wf.net.validate();
    } catch (const ContractViolation& e) {
        throw ConfigError("weights file " + path + " is inconsistent: " + e.what());
    }
    return wf;
}

}  // namespace rrl
