#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "oscrowd/adapt.hpp"
#include "oscrowd/json_io.hpp"

using namespace oscrowd;

namespace {

// identity feature extractor in d dimensions
nn::MLPNet identity_net(int d) {
    auto net = nn::MLPNet::make({d, d}, nn::Activation::Tanh, nn::Head::Linear);
    for (int i = 0; i < d; ++i)
        net.weights[0](static_cast<std::size_t>(i), static_cast<std::size_t>(i)) = 1.0;
    return net;
}

// discriminator emitting a constant probability regardless of input
nn::MLPNet constant_disc(int d, double p) {
    auto net = nn::MLPNet::make({d, 1}, nn::Activation::Tanh, nn::Head::Sigmoid);
    net.biases[0][0] = std::log(p / (1.0 - p));
    return net;
}

std::vector<synth::Sample> points(std::vector<std::pair<int, Vec>> defs) {
    std::vector<synth::Sample> out;
    int id = 0;
    for (auto& [cls, f] : defs) {
        synth::Sample s;
        s.id = id++;
        s.true_class = cls;
        s.features = f;
        out.push_back(std::move(s));
    }
    return out;
}

synth::DomainSpec spec_of(int id, std::set<int> classes) {
    synth::DomainSpec d;
    d.domain_id = id;
    d.class_set = std::move(classes);
    d.samples_per_class = 1;
    d.shift = {0.0};
    d.scale = 1.0;
    return d;
}

pda::PdaConfig fast_pda() {
    pda::PdaConfig cfg;
    cfg.source_train.max_epochs = 120;
    cfg.adv_train.max_epochs = 40;
    return cfg;
}

}  // namespace

TEST_CASE("score_classes: constant discriminator means constant scores") {
    auto samples = synth::group_by_class(
        points({{0, {1.0, 0.0}}, {0, {0.5, 0.5}}, {1, {-1.0, 0.2}}, {1, {0.3, -0.3}}}));
    auto scores = pda::score_classes(constant_disc(2, 0.7), identity_net(2), samples);
    REQUIRE(scores.size() == 2);
    for (const auto& s : scores) CHECK(s.k_c == doctest::Approx(0.7));
}

TEST_CASE("score_classes: half high, half low averages to 0.5") {
    // feature x0 = +1 scores ~1, x0 = -1 scores ~0
    auto net = nn::MLPNet::make({2, 1}, nn::Activation::Tanh, nn::Head::Sigmoid);
    net.weights[0](0, 0) = 100.0;
    auto samples = synth::group_by_class(
        points({{0, {1.0, 0.0}}, {0, {-1.0, 0.0}}, {0, {1.0, 3.0}}, {0, {-1.0, -3.0}}}));
    auto scores = pda::score_classes(net, identity_net(2), samples);
    REQUIRE(scores.size() == 1);
    CHECK(scores[0].k_c == doctest::Approx(0.5));
}

TEST_CASE("score_classes rejects empty classes") {
    std::map<int, std::vector<synth::Sample>> empty_class;
    empty_class[0] = {};
    CHECK_THROWS(pda::score_classes(constant_disc(2, 0.5), identity_net(2), empty_class));
}

TEST_CASE("drop_irrelevant removes exactly the all-unique domains") {
    std::vector<synth::DomainSpec> domains = {spec_of(0, {0, 1}), spec_of(1, {2, 5}),
                                              spec_of(2, {3, 4, 6}), spec_of(3, {7, 8})};
    // round-1-shaped scores: shared classes high, {7,8} low everywhere
    std::vector<pda::ClassScore> scores = {{0, 0.69, 1}, {1, 0.79, 1}, {2, 0.85, 1},
                                           {3, 0.71, 1}, {4, 0.82, 1}, {5, 0.41, 1},
                                           {6, 0.52, 1}, {7, 0.24, 1}, {8, 0.34, 1}};
    auto survivors = pda::drop_irrelevant(domains, scores, 0.6);
    REQUIRE(survivors.size() == 3);
    for (const auto& d : survivors) CHECK(d.domain_id != 3);

    SUBCASE("all scores above tau keeps everything") {
        auto all = pda::drop_irrelevant(domains, scores, 0.2);
        CHECK(all.size() == 4);
    }
    SUBCASE("tau zero keeps everything") {
        auto all = pda::drop_irrelevant(domains, scores, 0.0);
        CHECK(all.size() == 4);
    }
    SUBCASE("removing every domain is a pipeline error") {
        CHECK_THROWS(pda::drop_irrelevant(domains, scores, 0.99));
    }
    SUBCASE("missing scores are rejected") {
        CHECK_THROWS(pda::drop_irrelevant(domains, {{0, 0.5, 1}}, 0.5));
    }
}

TEST_CASE("run_pda on the default scenario: structure of the two rounds") {
    auto scenario = synth::make_default_scenario(synth::ScenarioStyle::O31Like, 4);
    auto result = pda::run_pda(scenario, fast_pda());

    // round 1 scores every source class
    CHECK(result.round1.size() == 9);

    // round-2 scores exist only for surviving domains' classes
    std::set<int> surviving_classes;
    for (const auto& d : scenario.domains) {
        if (d.role != synth::DomainRole::Source) continue;
        if (std::find(result.surviving_domains.begin(), result.surviving_domains.end(),
                      d.domain_id) != result.surviving_domains.end())
            surviving_classes.insert(d.class_set.begin(), d.class_set.end());
    }
    for (const auto& s : result.round2) CHECK(surviving_classes.count(s.class_id));
    CHECK(result.round2.size() == surviving_classes.size());

    // scores are probabilities
    for (const auto& s : result.round1) {
        CHECK(s.k_c >= 0.0);
        CHECK(s.k_c <= 1.0);
    }

    // the {7,8} analogue is gone and the shared set is recovered
    CHECK(std::find(result.surviving_domains.begin(), result.surviving_domains.end(), 3) ==
          result.surviving_domains.end());
    CHECK(result.shared_classes == std::vector<int>{0, 1, 2, 3, 4});
}

TEST_CASE("run_pda is deterministic") {
    auto scenario = synth::make_default_scenario(synth::ScenarioStyle::O31Like, 6);
    auto a = pda::run_pda(scenario, fast_pda());
    auto b = pda::run_pda(scenario, fast_pda());
    CHECK(io::pda_to_json(scenario, a) == io::pda_to_json(scenario, b));
}

TEST_CASE("a source equal to the target distribution survives with scores near 0.5") {
    synth::Scenario s;
    s.feature_dim = 4;
    s.seed = 99;
    Rng proto_rng(1234);
    for (int c = 0; c < 3; ++c) {
        Vec p(4);
        for (auto& x : p) x = proto_rng.normal(0.0, 6.0);
        s.prototypes[c] = p;
    }
    synth::DomainSpec src;
    src.domain_id = 0;
    src.class_set = {0, 1, 2};
    src.samples_per_class = 40;
    src.shift = {0.0, 0.0, 0.0, 0.0};
    src.scale = 1.0;
    synth::DomainSpec tgt = src;
    tgt.domain_id = 1;
    tgt.samples_per_class = 80;
    tgt.role = synth::DomainRole::Target;
    s.domains = {src, tgt};
    s.validate();

    auto result = pda::run_pda(s, fast_pda());
    CHECK(result.surviving_domains == std::vector<int>{0});
    for (const auto& score : result.round2) {
        CHECK(score.k_c > 0.35);
        CHECK(score.k_c < 0.65);
    }
}
