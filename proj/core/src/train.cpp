#include "oscrowd/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

namespace oscrowd::nn {

void TrainConfig::validate() const {
    if (learning_rate <= 0.0) throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
    if (gen_lr_scale <= 0.0) throw std::invalid_argument("TrainConfig: gen_lr_scale must be > 0");
    if (batch_size < 1 || disc_steps < 1 || patience < 1)
        throw std::invalid_argument("TrainConfig: counts must be >= 1");
    if (max_epochs < 0) throw std::invalid_argument("TrainConfig: max_epochs must be >= 0");
}

LabelledBatch LabelledBatch::from_samples(const std::vector<synth::Sample>& samples) {
    LabelledBatch b;
    std::set<int> ids;
    for (const auto& s : samples) ids.insert(s.true_class);
    b.class_ids.assign(ids.begin(), ids.end());
    for (std::size_t i = 0; i < b.class_ids.size(); ++i) b.class_index[b.class_ids[i]] = static_cast<int>(i);

    if (samples.empty()) return b;
    b.features = Matrix(samples.size(), samples.front().features.size());
    b.labels.reserve(samples.size());
    for (std::size_t r = 0; r < samples.size(); ++r) {
        for (std::size_t c = 0; c < b.features.cols; ++c)
            b.features(r, c) = samples[r].features[c];
        b.labels.push_back(b.class_index.at(samples[r].true_class));
    }
    return b;
}

Matrix features_of(const MLPNet& extractor, const std::vector<synth::Sample>& samples) {
    Matrix batch(samples.size(), samples.empty() ? 0 : samples.front().features.size());
    for (std::size_t r = 0; r < samples.size(); ++r)
        for (std::size_t c = 0; c < batch.cols; ++c) batch(r, c) = samples[r].features[c];
    return forward(extractor, batch);
}

Vec discriminator_scores(const MLPNet& discriminator, const Matrix& features) {
    Matrix out = forward(discriminator, features);
    Vec scores(out.rows);
    for (std::size_t r = 0; r < out.rows; ++r) scores[r] = out(r, 0);
    return scores;
}

MLPNet default_extractor(int feature_dim) {
    return MLPNet::make({feature_dim, 32, 8}, Activation::Tanh, Head::Linear);
}

MLPNet default_classifier(int n_classes) {
    return MLPNet::make({8, n_classes}, Activation::Tanh, Head::Softmax);
}

MLPNet default_discriminator() {
    return MLPNet::make({8, 16, 1}, Activation::Tanh, Head::Sigmoid);
}

namespace {

Matrix take_rows(const Matrix& m, const std::vector<int>& idx, int begin, int count) {
    Matrix out(static_cast<std::size_t>(count), m.cols);
    for (int r = 0; r < count; ++r) {
        int src = idx[static_cast<std::size_t>(begin + r)];
        for (std::size_t c = 0; c < m.cols; ++c)
            out(static_cast<std::size_t>(r), c) = m(static_cast<std::size_t>(src), c);
    }
    return out;
}

void shuffle_indices(std::vector<int>& idx, Rng& rng) {
    for (std::size_t i = idx.size(); i > 1; --i)
        std::swap(idx[i - 1], idx[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i) - 1))]);
}

// Rotating minibatch source; reshuffles after each full pass.
class BatchStream {
public:
    BatchStream(std::size_t n, Rng& rng) : rng_(rng) {
        idx_.resize(n);
        std::iota(idx_.begin(), idx_.end(), 0);
        shuffle_indices(idx_, rng_);
    }

    std::vector<int> next(int count) {
        std::vector<int> out;
        out.reserve(static_cast<std::size_t>(count));
        for (int i = 0; i < count; ++i) {
            if (pos_ == idx_.size()) {
                shuffle_indices(idx_, rng_);
                pos_ = 0;
            }
            out.push_back(idx_[pos_++]);
        }
        return out;
    }

private:
    std::vector<int> idx_;
    std::size_t pos_ = 0;
    Rng& rng_;
};

Matrix gather_rows(const Matrix& m, const std::vector<int>& rows) {
    Matrix out(rows.size(), m.cols);
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < m.cols; ++c)
            out(r, c) = m(static_cast<std::size_t>(rows[r]), c);
    return out;
}

}  // namespace

SourceTrainResult train_source(MLPNet extractor, MLPNet classifier,
                               const std::vector<synth::Sample>& source,
                               const TrainConfig& cfg) {
    cfg.validate();
    if (source.empty()) throw std::invalid_argument("train_source: empty source set");

    LabelledBatch data = LabelledBatch::from_samples(source);
    if (data.class_ids.size() < 2)
        throw std::invalid_argument("train_source: need at least two classes");
    if (classifier.output_size() != static_cast<int>(data.class_ids.size()))
        throw std::invalid_argument("train_source: classifier head size vs class count");
    if (classifier.input_size() != extractor.output_size())
        throw std::invalid_argument("train_source: classifier input vs extractor output");

    Rng rng(cfg.seed);
    const int n = static_cast<int>(source.size());

    SourceTrainResult result;
    result.class_ids = data.class_ids;

    double prev_loss = std::numeric_limits<double>::infinity();
    int calm_epochs = 0;
    int epoch = 0;
    for (; epoch < cfg.max_epochs; ++epoch) {
        std::vector<int> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), 0);
        shuffle_indices(order, rng);

        double epoch_loss = 0.0;
        int batches = 0;
        for (int begin = 0; begin < n; begin += cfg.batch_size) {
            int count = std::min(cfg.batch_size, n - begin);
            Matrix batch = take_rows(data.features, order, begin, count);
            std::vector<int> labels(static_cast<std::size_t>(count));
            for (int i = 0; i < count; ++i)
                labels[static_cast<std::size_t>(i)] =
                    data.labels[static_cast<std::size_t>(order[static_cast<std::size_t>(begin + i)])];

            ForwardCache feat_cache = forward_cached(extractor, batch);
            ForwardCache head_cache = forward_cached(classifier, feat_cache.act.back());
            const Matrix& probs = head_cache.act.back();

            epoch_loss += cross_entropy(probs, labels);
            ++batches;

            Matrix delta = softmax_ce_delta(probs, labels);
            Gradients head_grads = backward_from_logits(classifier, head_cache, delta);
            Gradients feat_grads = backward(extractor, feat_cache, head_grads.input);
            apply_sgd(classifier, head_grads, cfg.learning_rate);
            apply_sgd(extractor, feat_grads, cfg.learning_rate);
        }

        epoch_loss /= std::max(1, batches);
        if (std::abs(prev_loss - epoch_loss) < cfg.patience_tol) {
            if (++calm_epochs >= cfg.patience) {
                ++epoch;
                break;
            }
        } else {
            calm_epochs = 0;
        }
        prev_loss = epoch_loss;
    }
    result.epochs_run = epoch;

    Matrix probs = forward(classifier, forward(extractor, data.features));
    int correct = 0;
    for (std::size_t r = 0; r < probs.rows; ++r) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < probs.cols; ++c)
            if (probs(r, c) > probs(r, best)) best = c;
        if (static_cast<int>(best) == data.labels[r]) ++correct;
    }
    result.train_accuracy = source.empty() ? 0.0 : static_cast<double>(correct) / source.size();
    result.extractor = std::move(extractor);
    result.classifier = std::move(classifier);
    return result;
}

AdvTrainResult train_adversarial(MLPNet generator, MLPNet discriminator,
                                 const MLPNet& frozen_extractor,
                                 const std::vector<synth::Sample>& source,
                                 const std::vector<synth::Sample>& target,
                                 const TrainConfig& cfg) {
    cfg.validate();
    if (source.empty()) throw std::invalid_argument("train_adversarial: empty source set");
    if (target.empty()) throw std::invalid_argument("train_adversarial: empty target set");

    Rng rng(cfg.seed);

    Matrix src_inputs(source.size(), source.front().features.size());
    for (std::size_t r = 0; r < source.size(); ++r)
        for (std::size_t c = 0; c < src_inputs.cols; ++c)
            src_inputs(r, c) = source[r].features[c];
    Matrix tgt_inputs(target.size(), target.front().features.size());
    for (std::size_t r = 0; r < target.size(); ++r)
        for (std::size_t c = 0; c < tgt_inputs.cols; ++c)
            tgt_inputs(r, c) = target[r].features[c];

    // Source features never change while the extractor is frozen.
    Matrix src_features = forward(frozen_extractor, src_inputs);

    AdvTrainResult result;
    BatchStream src_stream(source.size(), rng);
    BatchStream tgt_stream(target.size(), rng);

    const int batches_per_epoch =
        static_cast<int>((std::max(source.size(), target.size()) + cfg.batch_size - 1) /
                         static_cast<std::size_t>(cfg.batch_size));

    double prev_d = std::numeric_limits<double>::infinity();
    double prev_g = std::numeric_limits<double>::infinity();
    int calm_epochs = 0;
    int epoch = 0;
    for (; epoch < cfg.max_epochs; ++epoch) {
        double d_loss_sum = 0.0, g_loss_sum = 0.0;
        int d_count = 0, g_count = 0;

        for (int b = 0; b < batches_per_epoch; ++b) {
            for (int k = 0; k < cfg.disc_steps; ++k) {
                Matrix src_feat = gather_rows(src_features, src_stream.next(cfg.batch_size));
                Matrix tgt_feat =
                    forward(generator, gather_rows(tgt_inputs, tgt_stream.next(cfg.batch_size)));

                // One stacked batch, per-domain normalisation: source rows
                // carry weight 1/n_src, target rows 1/n_tgt, matching the
                // two-expectation objective.
                Matrix joint(src_feat.rows + tgt_feat.rows, src_feat.cols);
                for (std::size_t r = 0; r < src_feat.rows; ++r)
                    for (std::size_t c = 0; c < src_feat.cols; ++c) joint(r, c) = src_feat(r, c);
                for (std::size_t r = 0; r < tgt_feat.rows; ++r)
                    for (std::size_t c = 0; c < tgt_feat.cols; ++c)
                        joint(src_feat.rows + r, c) = tgt_feat(r, c);

                ForwardCache d_cache = forward_cached(discriminator, joint);
                const Matrix& scores = d_cache.act.back();

                Vec s_src(src_feat.rows), s_tgt(tgt_feat.rows);
                for (std::size_t r = 0; r < src_feat.rows; ++r) s_src[r] = scores(r, 0);
                for (std::size_t r = 0; r < tgt_feat.rows; ++r)
                    s_tgt[r] = scores(src_feat.rows + r, 0);
                // Same value as Eq-style bce over flipped scores: the
                // discriminator drives source scores to 0, target to 1.
                Vec flipped_src(s_src.size()), flipped_tgt(s_tgt.size());
                for (std::size_t i = 0; i < s_src.size(); ++i) flipped_src[i] = 1.0 - s_src[i];
                for (std::size_t i = 0; i < s_tgt.size(); ++i) flipped_tgt[i] = 1.0 - s_tgt[i];
                d_loss_sum += bce_domain_loss(flipped_src, flipped_tgt);
                ++d_count;

                Matrix delta(joint.rows, 1);
                double n_src = static_cast<double>(src_feat.rows);
                double n_tgt = static_cast<double>(tgt_feat.rows);
                for (std::size_t r = 0; r < src_feat.rows; ++r)
                    delta(r, 0) = scores(r, 0) / n_src;
                for (std::size_t r = 0; r < tgt_feat.rows; ++r)
                    delta(src_feat.rows + r, 0) = (scores(src_feat.rows + r, 0) - 1.0) / n_tgt;

                Gradients d_grads = backward_from_logits(discriminator, d_cache, delta);
                apply_sgd(discriminator, d_grads, cfg.learning_rate);
            }

            {
                Matrix tgt_batch = gather_rows(tgt_inputs, tgt_stream.next(cfg.batch_size));
                ForwardCache g_cache = forward_cached(generator, tgt_batch);
                ForwardCache d_cache = forward_cached(discriminator, g_cache.act.back());
                const Matrix& scores = d_cache.act.back();

                // Non-saturating confusion objective: push the generator's
                // outputs toward the discriminator's source side.
                double loss = 0.0;
                double n = static_cast<double>(scores.rows);
                Matrix delta(scores.rows, 1);
                for (std::size_t r = 0; r < scores.rows; ++r) {
                    double s = std::clamp(scores(r, 0), kProbEps, 1.0 - kProbEps);
                    loss -= std::log(1.0 - s);
                    delta(r, 0) = scores(r, 0) / n;  // d(-log(1-s))/dlogit = s
                }
                g_loss_sum += loss / n;
                ++g_count;

                Gradients d_grads = backward_from_logits(discriminator, d_cache, delta);
                Gradients g_grads = backward(generator, g_cache, d_grads.input);
                apply_sgd(generator, g_grads, cfg.learning_rate * cfg.gen_lr_scale);
            }
        }

        double d_mean = d_loss_sum / std::max(1, d_count);
        double g_mean = g_loss_sum / std::max(1, g_count);
        result.disc_loss.push_back(d_mean);
        result.gen_loss.push_back(g_mean);

        if (std::abs(prev_d - d_mean) < cfg.patience_tol &&
            std::abs(prev_g - g_mean) < cfg.patience_tol) {
            if (++calm_epochs >= cfg.patience) {
                ++epoch;
                break;
            }
        } else {
            calm_epochs = 0;
        }
        prev_d = d_mean;
        prev_g = g_mean;
    }
    result.epochs_run = epoch;
    result.generator = std::move(generator);
    result.discriminator = std::move(discriminator);
    return result;
}

}  // namespace oscrowd::nn
