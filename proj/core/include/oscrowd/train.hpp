#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "oscrowd/net.hpp"
#include "oscrowd/scenario.hpp"

namespace oscrowd::nn {

struct TrainConfig {
    double learning_rate = 0.05;
    int batch_size = 32;
    int max_epochs = 200;
    int disc_steps = 5;         // discriminator updates per generator update
    double gen_lr_scale = 0.2;  // generator step size relative to learning_rate
    int patience = 5;           // epochs of sub-tolerance loss change before stopping
    double patience_tol = 1e-4;
    uint64_t seed = 1;

    void validate() const;
};

// Batch matrix + class indices for a labelled sample set. Class ids are
// remapped onto contiguous indices (sorted order) for the softmax head.
struct LabelledBatch {
    Matrix features;
    std::vector<int> labels;       // contiguous indices
    std::vector<int> class_ids;    // index -> original class id
    std::map<int, int> class_index;

    static LabelledBatch from_samples(const std::vector<synth::Sample>& samples);
};

struct SourceTrainResult {
    MLPNet extractor;
    MLPNet classifier;
    double train_accuracy = 0.0;
    std::vector<int> class_ids;
    int epochs_run = 0;
};

// Supervised pre-training of the source extractor plus softmax head on the
// labelled source pool. The extractor stays fixed afterwards.
SourceTrainResult train_source(MLPNet extractor, MLPNet classifier,
                               const std::vector<synth::Sample>& source,
                               const TrainConfig& cfg);

struct AdvTrainResult {
    MLPNet generator;
    MLPNet discriminator;
    std::vector<double> disc_loss;  // per-epoch means
    std::vector<double> gen_loss;
    int epochs_run = 0;
};

// Adversarial alignment. The discriminator scores target membership
// (source samples are labelled 0, target samples 1, so source-unique
// regions end up scoring near 0). Each round runs cfg.disc_steps
// discriminator updates followed by one generator update with the
// non-saturating objective: the generator pushes its outputs toward the
// source side of the discriminator. frozen_extractor feeds the source
// batches and is never modified.
AdvTrainResult train_adversarial(MLPNet generator, MLPNet discriminator,
                                 const MLPNet& frozen_extractor,
                                 const std::vector<synth::Sample>& source,
                                 const std::vector<synth::Sample>& target,
                                 const TrainConfig& cfg);

// Discriminator target-membership scores for a feature batch.
Vec discriminator_scores(const MLPNet& discriminator, const Matrix& features);

Matrix features_of(const MLPNet& extractor, const std::vector<synth::Sample>& samples);

// Default architectures.
MLPNet default_extractor(int feature_dim);
MLPNet default_classifier(int n_classes);
MLPNet default_discriminator();

}  // namespace oscrowd::nn
