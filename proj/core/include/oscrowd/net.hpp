#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "oscrowd/matrix.hpp"
#include "oscrowd/rng.hpp"

namespace oscrowd::nn {

enum class Activation { Tanh, Relu };
enum class Head { Linear, Sigmoid, Softmax };

// Probabilities are clamped into [kProbEps, 1 - kProbEps] before any log.
constexpr double kProbEps = 1e-7;

// Dense feed-forward network. weights[l] has shape (sizes[l+1] x sizes[l]);
// the hidden activation applies to every layer except the last, which uses
// the output head.
struct MLPNet {
    std::vector<int> layer_sizes;
    std::vector<Matrix> weights;
    std::vector<Vec> biases;
    Activation hidden = Activation::Tanh;
    Head head = Head::Linear;

    static MLPNet make(std::vector<int> sizes, Activation hidden, Head head);

    int input_size() const { return layer_sizes.front(); }
    int output_size() const { return layer_sizes.back(); }
    std::size_t layer_count() const { return weights.size(); }

    void init_params(Rng& rng);  // uniform Glorot range
    bool same_parameters(const MLPNet& other) const;
    bool all_finite() const;
};

struct ForwardCache {
    std::vector<Matrix> pre;  // pre-activations per layer
    std::vector<Matrix> act;  // act[0] is the input batch, act.back() the output
};

// batch: one sample per row, column count = input size.
Matrix forward(const MLPNet& net, const Matrix& batch);
ForwardCache forward_cached(const MLPNet& net, const Matrix& batch);

struct Gradients {
    std::vector<Matrix> weights;
    std::vector<Vec> biases;
    Matrix input;  // dLoss/dInput; chains one network into another
};

// upstream = dLoss/dOutput (same shape as the forward output). The head
// Jacobian is applied internally.
Gradients backward(const MLPNet& net, const ForwardCache& cache, const Matrix& upstream);

// Variant taking dLoss/dPreActivation of the last layer directly; used with
// the canonical softmax/cross-entropy and sigmoid/BCE deltas.
Gradients backward_from_logits(const MLPNet& net, const ForwardCache& cache,
                               const Matrix& delta_out);

void apply_sgd(MLPNet& net, const Gradients& grads, double learning_rate);

// --- losses ---------------------------------------------------------------

// Domain-discrimination cross entropy in the two-expectation form:
// -(mean log d_on_source + mean log(1 - d_on_target)). Inputs are
// probabilities and are clamped before the logs. Vanishes as
// d_on_source -> 1 and d_on_target -> 0.
double bce_domain_loss(const Vec& d_on_source, const Vec& d_on_target);

// mean over rows of -log p[label]
double cross_entropy(const Matrix& probs, const std::vector<int>& labels);

// elementwise binary cross entropy against targets in {0,1}, mean over rows
double binary_cross_entropy(const Matrix& probs, const Vec& targets);

double mean_squared_error(const Matrix& out, const Matrix& target);

// dLoss/dLogits for softmax + cross_entropy: (p - onehot) / n
Matrix softmax_ce_delta(const Matrix& probs, const std::vector<int>& labels);

// dLoss/dLogits for sigmoid + binary_cross_entropy: (p - y) / n
Matrix sigmoid_bce_delta(const Matrix& probs, const Vec& targets);

}  // namespace oscrowd::nn
