#include "oscrowd/adapt.hpp"

#include <algorithm>
#include <stdexcept>

namespace oscrowd::pda {

std::optional<double> PdaResult::score(int round, int class_id) const {
    const auto& scores = round == 1 ? round1 : round2;
    for (const auto& s : scores)
        if (s.class_id == class_id) return s.k_c;
    return std::nullopt;
}

std::vector<ClassScore> score_classes(
    const nn::MLPNet& discriminator, const nn::MLPNet& source_extractor,
    const std::map<int, std::vector<synth::Sample>>& source_by_class, int round) {
    std::vector<ClassScore> out;
    for (const auto& [class_id, samples] : source_by_class) {
        if (samples.empty())
            throw std::invalid_argument("score_classes: class " + std::to_string(class_id) +
                                        " has no samples");
        Matrix features = nn::features_of(source_extractor, samples);
        Vec scores = nn::discriminator_scores(discriminator, features);
        double mean = 0.0;
        for (double s : scores) mean += s;
        mean /= static_cast<double>(scores.size());
        out.push_back({class_id, mean, round});
    }
    return out;
}

std::vector<synth::DomainSpec> drop_irrelevant(const std::vector<synth::DomainSpec>& domains,
                                               const std::vector<ClassScore>& scores,
                                               double tau) {
    std::map<int, double> by_class;
    for (const auto& s : scores) by_class[s.class_id] = s.k_c;

    std::vector<synth::DomainSpec> survivors;
    for (const auto& d : domains) {
        bool any_relevant = false;
        for (int c : d.class_set) {
            auto it = by_class.find(c);
            if (it == by_class.end())
                throw std::invalid_argument("drop_irrelevant: class " + std::to_string(c) +
                                            " has no score");
            if (it->second >= tau) {
                any_relevant = true;
                break;
            }
        }
        if (any_relevant) survivors.push_back(d);
    }
    if (survivors.empty())
        throw std::runtime_error("drop_irrelevant: every source domain was removed");
    return survivors;
}

namespace {

struct RoundNets {
    nn::SourceTrainResult source;
    nn::AdvTrainResult adv;
};

RoundNets run_round(const std::vector<synth::Sample>& source_samples,
                    const std::vector<synth::Sample>& target,
                    int feature_dim, int n_classes, const PdaConfig& cfg, int round,
                    const nn::SourceTrainResult* reuse_source) {
    RoundNets nets;
    if (reuse_source != nullptr) {
        nets.source = *reuse_source;
    } else {
        nn::TrainConfig src_cfg = cfg.source_train;
        src_cfg.seed = cfg.source_train.seed + static_cast<uint64_t>(round) * 101;
        nn::MLPNet extractor = nn::default_extractor(feature_dim);
        nn::MLPNet classifier = nn::default_classifier(n_classes);
        Rng init_rng(src_cfg.seed ^ 0xF5F5F5F5ull);
        extractor.init_params(init_rng);
        classifier.init_params(init_rng);
        nets.source = nn::train_source(std::move(extractor), std::move(classifier),
                                       source_samples, src_cfg);
    }

    nn::TrainConfig adv_cfg = cfg.adv_train;
    adv_cfg.seed = cfg.adv_train.seed + static_cast<uint64_t>(round) * 211;
    nn::MLPNet generator = nets.source.extractor;  // copied init, frozen original
    nn::MLPNet discriminator = nn::default_discriminator();
    Rng d_rng(adv_cfg.seed ^ 0xD15Cull);
    discriminator.init_params(d_rng);
    nets.adv = nn::train_adversarial(std::move(generator), std::move(discriminator),
                                     nets.source.extractor, source_samples, target, adv_cfg);
    return nets;
}

}  // namespace

PdaResult run_pda(const synth::Scenario& scenario, const PdaConfig& cfg) {
    scenario.validate();

    std::vector<synth::DomainSpec> source_domains;
    for (const auto& d : scenario.domains)
        if (d.role == synth::DomainRole::Source) source_domains.push_back(d);
    if (source_domains.empty()) throw std::invalid_argument("run_pda: no source domains");

    // Samples are drawn once per domain; both rounds see identical data.
    std::map<int, std::vector<synth::Sample>> samples_by_domain;
    for (const auto& d : source_domains)
        samples_by_domain[d.domain_id] = synth::sample_domain(d, scenario);
    std::vector<synth::Sample> target = synth::target_samples(scenario);

    auto collect = [&](const std::vector<synth::DomainSpec>& domains) {
        std::vector<synth::Sample> out;
        for (const auto& d : domains) {
            const auto& s = samples_by_domain.at(d.domain_id);
            out.insert(out.end(), s.begin(), s.end());
        }
        return out;
    };

    PdaResult result;

    // Round 1: everything in.
    std::vector<synth::Sample> round1_samples = collect(source_domains);
    auto round1_classes = synth::group_by_class(round1_samples);
    RoundNets nets1 = run_round(round1_samples, target, scenario.feature_dim,
                                static_cast<int>(round1_classes.size()), cfg, 1, nullptr);
    result.round1 =
        score_classes(nets1.adv.discriminator, nets1.source.extractor, round1_classes, 1);

    std::vector<synth::DomainSpec> survivors =
        drop_irrelevant(source_domains, result.round1, cfg.tau);
    for (const auto& d : survivors) result.surviving_domains.push_back(d.domain_id);

    // Round 2: survivors only.
    std::vector<synth::Sample> round2_samples = collect(survivors);
    auto round2_classes = synth::group_by_class(round2_samples);
    const nn::SourceTrainResult* reuse =
        cfg.retrain_source_round2 ? nullptr : &nets1.source;
    RoundNets nets2 = run_round(round2_samples, target, scenario.feature_dim,
                                static_cast<int>(round2_classes.size()), cfg, 2, reuse);
    result.round2 =
        score_classes(nets2.adv.discriminator, nets2.source.extractor, round2_classes, 2);

    for (const auto& [class_id, unused] : round2_classes)
        result.surviving_classes.push_back(class_id);
    for (const auto& s : result.round2)
        if (s.k_c >= cfg.tau) result.shared_classes.push_back(s.class_id);
    std::sort(result.shared_classes.begin(), result.shared_classes.end());

    result.source_extractor = std::move(nets2.source.extractor);
    result.classifier = std::move(nets2.source.classifier);
    result.generator = std::move(nets2.adv.generator);
    result.discriminator = std::move(nets2.adv.discriminator);
    return result;
}

}  // namespace oscrowd::pda
