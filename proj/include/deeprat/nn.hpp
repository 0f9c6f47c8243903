#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "deeprat/rng.hpp"

namespace deeprat::nn {

enum class OutputActivation : std::uint32_t { Linear = 0, Logistic = 1 };

// Fully-connected net, rectifier hidden units, linear or logistic output.
// Weights are row-major (out x in) per layer.
struct DenseNet {
    std::vector<int> widths;  // [in, hidden..., out]
    std::vector<std::vector<double>> w;
    std::vector<std::vector<double>> b;
    OutputActivation out_act = OutputActivation::Linear;

    int n_layers() const { return int(widths.size()) - 1; }
    int in_dim() const { return widths.front(); }
    int out_dim() const { return widths.back(); }
    std::size_t n_params() const;
};

// Xavier-uniform weights, zero biases.
DenseNet make_net(const std::vector<int>& widths, OutputActivation out_act,
                  rng::Stream& rs);

struct ForwardCache {
    std::vector<double> input;
    std::vector<std::vector<double>> pre;  // pre-activations per layer
    std::vector<std::vector<double>> act;  // post-activations per layer
};

std::vector<double> forward(const DenseNet& net, const std::vector<double>& input);
std::vector<double> forward(const DenseNet& net, const std::vector<double>& input,
                            ForwardCache& cache);

struct Grads {
    std::vector<std::vector<double>> w, b;
};

Grads zero_grads(const DenseNet& net);
void accumulate(Grads& into, const Grads& from);
void scale(Grads& g, double s);
double global_norm(const Grads& g);
// No-op when max_norm <= 0 or the norm is already within bounds.
void clip_global_norm(Grads& g, double max_norm);

// Reverse-mode gradients for loss gradient dL/dy at the output. Accumulates
// parameter gradients into `grads` and returns dL/dinput (needed to push
// critic gradients through to the actor).
std::vector<double> backward(const DenseNet& net, const ForwardCache& cache,
                             const std::vector<double>& dloss_dout, Grads& grads);

struct AdamState {
    double lr = 1e-3;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    long long t = 0;
    std::vector<std::vector<double>> m_w, v_w, m_b, v_b;
};

AdamState make_adam(const DenseNet& net, double lr, double beta1 = 0.9,
                    double beta2 = 0.999, double eps = 1e-8);

// Bias-corrected Adam update (descent direction of `grads`).
void adam_step(DenseNet& net, const Grads& grads, AdamState& state);

// target <- tau * main + (1 - tau) * target, elementwise.
void soft_update(DenseNet& target, const DenseNet& main, double tau);
void hard_update(DenseNet& target, const DenseNet& main);

// Numerically safe logistic.
double logistic(double x);

// Checkpoint format: 16-byte magic, u32 version, u32 width count, i32 widths,
// then per layer row-major f64 weights followed by f64 biases. Little-endian.
void save_checkpoint(const DenseNet& net, std::ostream& os);
void save_checkpoint(const DenseNet& net, const std::string& path);
DenseNet load_checkpoint(std::istream& is, OutputActivation out_act);
DenseNet load_checkpoint(const std::string& path, OutputActivation out_act);

// Raw parameter/optimizer state IO for resumable training (internal format).
void save_state(const DenseNet& net, std::ostream& os);
void load_state(DenseNet& net, std::istream& is);
void save_state(const AdamState& st, std::ostream& os);
void load_state(AdamState& st, std::istream& is);

}  // namespace deeprat::nn
