#pragma once

#include <map>
#include <optional>
#include <vector>

#include "oscrowd/scenario.hpp"
#include "oscrowd/train.hpp"

namespace oscrowd::pda {

// Mean discriminator target-membership probability over one source class.
struct ClassScore {
    int class_id = 0;
    double k_c = 0.0;
    int round = 1;
};

struct PdaConfig {
    double tau = 0.5;                 // a class counts as target-relevant at k_c >= tau
    bool retrain_source_round2 = true;
    nn::TrainConfig source_train{.max_epochs = 200};
    nn::TrainConfig adv_train{.max_epochs = 60};
};

struct PdaResult {
    std::vector<int> surviving_domains;
    std::vector<ClassScore> round1;
    std::vector<ClassScore> round2;
    nn::MLPNet source_extractor;  // round-2 nets, used downstream
    nn::MLPNet generator;
    nn::MLPNet discriminator;
    nn::MLPNet classifier;
    std::vector<int> surviving_classes;  // label space after removal
    std::vector<int> shared_classes;     // k_c(round 2) >= tau

    std::optional<double> score(int round, int class_id) const;
};

std::vector<ClassScore> score_classes(
    const nn::MLPNet& discriminator, const nn::MLPNet& source_extractor,
    const std::map<int, std::vector<synth::Sample>>& source_by_class, int round = 1);

// A domain is dropped iff every one of its classes scores below tau.
// Throws if nothing survives.
std::vector<synth::DomainSpec> drop_irrelevant(const std::vector<synth::DomainSpec>& domains,
                                               const std::vector<ClassScore>& scores,
                                               double tau);

// Two-round protocol: train on everything, score, drop all-unique domains,
// then retrain and rescore on the survivors.
PdaResult run_pda(const synth::Scenario& scenario, const PdaConfig& cfg);

}  // namespace oscrowd::pda
