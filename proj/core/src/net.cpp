#include "oscrowd/net.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oscrowd::nn {

namespace {

double clamp_prob(double p) { return std::clamp(p, kProbEps, 1.0 - kProbEps); }

double activate(Activation a, double x) {
    return a == Activation::Tanh ? std::tanh(x) : (x > 0.0 ? x : 0.0);
}

// derivative expressed via pre-activation x and activation value y
double activate_grad(Activation a, double x, double y) {
    return a == Activation::Tanh ? 1.0 - y * y : (x > 0.0 ? 1.0 : 0.0);
}

void apply_head(Head head, Matrix& m) {
    switch (head) {
        case Head::Linear:
            return;
        case Head::Sigmoid:
            for (auto& x : m.data) x = 1.0 / (1.0 + std::exp(-x));
            return;
        case Head::Softmax:
            for (std::size_t r = 0; r < m.rows; ++r) {
                double mx = m(r, 0);
                for (std::size_t c = 1; c < m.cols; ++c) mx = std::max(mx, m(r, c));
                double sum = 0.0;
                for (std::size_t c = 0; c < m.cols; ++c) {
                    m(r, c) = std::exp(m(r, c) - mx);
                    sum += m(r, c);
                }
                for (std::size_t c = 0; c < m.cols; ++c) m(r, c) /= sum;
            }
            return;
    }
}

}  // namespace

MLPNet MLPNet::make(std::vector<int> sizes, Activation hidden, Head head) {
    if (sizes.size() < 2) throw std::invalid_argument("MLPNet: need at least two layer sizes");
    for (int s : sizes)
        if (s <= 0) throw std::invalid_argument("MLPNet: layer sizes must be positive");

    MLPNet net;
    net.layer_sizes = std::move(sizes);
    net.hidden = hidden;
    net.head = head;
    for (std::size_t l = 0; l + 1 < net.layer_sizes.size(); ++l) {
        net.weights.emplace_back(static_cast<std::size_t>(net.layer_sizes[l + 1]),
                                 static_cast<std::size_t>(net.layer_sizes[l]));
        net.biases.emplace_back(static_cast<std::size_t>(net.layer_sizes[l + 1]), 0.0);
    }
    return net;
}

void MLPNet::init_params(Rng& rng) {
    for (std::size_t l = 0; l < weights.size(); ++l) {
        double limit = std::sqrt(6.0 / (layer_sizes[l] + layer_sizes[l + 1]));
        for (auto& w : weights[l].data) w = rng.uniform(-limit, limit);
        std::fill(biases[l].begin(), biases[l].end(), 0.0);
    }
}

bool MLPNet::same_parameters(const MLPNet& other) const {
    if (layer_sizes != other.layer_sizes) return false;
    for (std::size_t l = 0; l < weights.size(); ++l)
        if (weights[l].data != other.weights[l].data || biases[l] != other.biases[l])
            return false;
    return true;
}

bool MLPNet::all_finite() const {
    for (const auto& w : weights)
        for (double x : w.data)
            if (!std::isfinite(x)) return false;
    for (const auto& b : biases)
        for (double x : b)
            if (!std::isfinite(x)) return false;
    return true;
}

ForwardCache forward_cached(const MLPNet& net, const Matrix& batch) {
    check_shape(batch.cols == static_cast<std::size_t>(net.input_size()),
                "forward: batch columns vs net input size");
    ForwardCache cache;
    cache.act.push_back(batch);
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        Matrix pre = matmul_bt(cache.act.back(), net.weights[l]);
        for (std::size_t r = 0; r < pre.rows; ++r)
            for (std::size_t c = 0; c < pre.cols; ++c) pre(r, c) += net.biases[l][c];

        Matrix act = pre;
        if (l + 1 < net.layer_count()) {
            for (std::size_t i = 0; i < act.data.size(); ++i)
                act.data[i] = activate(net.hidden, act.data[i]);
        } else {
            apply_head(net.head, act);
        }
        cache.pre.push_back(std::move(pre));
        cache.act.push_back(std::move(act));
    }
    return cache;
}

Matrix forward(const MLPNet& net, const Matrix& batch) {
    return forward_cached(net, batch).act.back();
}

namespace {

Gradients backward_impl(const MLPNet& net, const ForwardCache& cache, Matrix delta) {
    Gradients grads;
    grads.weights.resize(net.layer_count());
    grads.biases.resize(net.layer_count());

    for (std::size_t l = net.layer_count(); l-- > 0;) {
        grads.weights[l] = matmul_at(delta, cache.act[l]);
        grads.biases[l].assign(delta.cols, 0.0);
        for (std::size_t r = 0; r < delta.rows; ++r)
            for (std::size_t c = 0; c < delta.cols; ++c) grads.biases[l][c] += delta(r, c);

        Matrix dact = matmul(delta, net.weights[l]);
        if (l > 0) {
            delta = std::move(dact);
            const Matrix& pre = cache.pre[l - 1];
            const Matrix& act = cache.act[l];
            for (std::size_t i = 0; i < delta.data.size(); ++i)
                delta.data[i] *= activate_grad(net.hidden, pre.data[i], act.data[i]);
        } else {
            grads.input = std::move(dact);
        }
    }
    return grads;
}

}  // namespace

Gradients backward(const MLPNet& net, const ForwardCache& cache, const Matrix& upstream) {
    const Matrix& out = cache.act.back();
    check_shape(upstream.same_shape(out), "backward: upstream vs output");

    Matrix delta = upstream;
    switch (net.head) {
        case Head::Linear:
            break;
        case Head::Sigmoid:
            for (std::size_t i = 0; i < delta.data.size(); ++i)
                delta.data[i] *= out.data[i] * (1.0 - out.data[i]);
            break;
        case Head::Softmax:
            for (std::size_t r = 0; r < delta.rows; ++r) {
                double dot = 0.0;
                for (std::size_t c = 0; c < delta.cols; ++c) dot += upstream(r, c) * out(r, c);
                for (std::size_t c = 0; c < delta.cols; ++c)
                    delta(r, c) = out(r, c) * (upstream(r, c) - dot);
            }
            break;
    }
    return backward_impl(net, cache, std::move(delta));
}

Gradients backward_from_logits(const MLPNet& net, const ForwardCache& cache,
                               const Matrix& delta_out) {
    check_shape(delta_out.same_shape(cache.act.back()), "backward_from_logits: delta vs output");
    return backward_impl(net, cache, delta_out);
}

void apply_sgd(MLPNet& net, const Gradients& grads, double learning_rate) {
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        for (std::size_t i = 0; i < net.weights[l].data.size(); ++i)
            net.weights[l].data[i] -= learning_rate * grads.weights[l].data[i];
        for (std::size_t i = 0; i < net.biases[l].size(); ++i)
            net.biases[l][i] -= learning_rate * grads.biases[l][i];
    }
}

double bce_domain_loss(const Vec& d_on_source, const Vec& d_on_target) {
    if (d_on_source.empty() || d_on_target.empty())
        throw std::invalid_argument("bce_domain_loss: empty batch");
    double src = 0.0;
    for (double p : d_on_source) src += std::log(clamp_prob(p));
    double tgt = 0.0;
    for (double p : d_on_target) tgt += std::log(1.0 - clamp_prob(p));
    return -(src / static_cast<double>(d_on_source.size()) +
             tgt / static_cast<double>(d_on_target.size()));
}

double cross_entropy(const Matrix& probs, const std::vector<int>& labels) {
    if (probs.rows == 0 || probs.rows != labels.size())
        throw std::invalid_argument("cross_entropy: batch/label mismatch");
    double loss = 0.0;
    for (std::size_t r = 0; r < probs.rows; ++r)
        loss -= std::log(clamp_prob(probs(r, static_cast<std::size_t>(labels[r]))));
    return loss / static_cast<double>(probs.rows);
}

double binary_cross_entropy(const Matrix& probs, const Vec& targets) {
    if (probs.rows == 0 || probs.rows != targets.size() || probs.cols != 1)
        throw std::invalid_argument("binary_cross_entropy: batch/target mismatch");
    double loss = 0.0;
    for (std::size_t r = 0; r < probs.rows; ++r) {
        double p = clamp_prob(probs(r, 0));
        loss -= targets[r] * std::log(p) + (1.0 - targets[r]) * std::log(1.0 - p);
    }
    return loss / static_cast<double>(probs.rows);
}

double mean_squared_error(const Matrix& out, const Matrix& target) {
    check_shape(out.same_shape(target), "mean_squared_error");
    double loss = 0.0;
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        double d = out.data[i] - target.data[i];
        loss += d * d;
    }
    return loss / static_cast<double>(out.rows);
}

Matrix softmax_ce_delta(const Matrix& probs, const std::vector<int>& labels) {
    Matrix delta = probs;
    double n = static_cast<double>(probs.rows);
    for (std::size_t r = 0; r < probs.rows; ++r) {
        delta(r, static_cast<std::size_t>(labels[r])) -= 1.0;
        for (std::size_t c = 0; c < probs.cols; ++c) delta(r, c) /= n;
    }
    return delta;
}

Matrix sigmoid_bce_delta(const Matrix& probs, const Vec& targets) {
    Matrix delta = probs;
    double n = static_cast<double>(probs.rows);
    for (std::size_t r = 0; r < probs.rows; ++r) delta(r, 0) = (probs(r, 0) - targets[r]) / n;
    return delta;
}

}  // namespace oscrowd::nn
