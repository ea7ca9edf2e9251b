#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "oscrowd/json_io.hpp"
#include "oscrowd/scenario.hpp"

using namespace oscrowd;
using synth::ScenarioStyle;

TEST_CASE("o31-like default composition") {
    auto s = synth::make_default_scenario(ScenarioStyle::O31Like, 1);
    auto sources = s.source_domains();
    CHECK(sources.size() == 4);
    CHECK(s.source_class_union() == std::set<int>{0, 1, 2, 3, 4, 5, 6, 7, 8});
    CHECK(s.target_class_set() == std::set<int>{0, 1, 2, 3, 4});

    // the {7,8} domain shares nothing with the target
    bool found = false;
    for (const auto* d : sources) {
        if (d->class_set == std::set<int>{7, 8}) {
            found = true;
            for (int c : d->class_set) CHECK(!s.target_class_set().count(c));
        }
    }
    CHECK(found);

    // two shift profiles across the four source domains
    std::set<std::pair<double, double>> profiles;
    for (const auto* d : sources) profiles.insert({d->shift[0], d->scale});
    CHECK(profiles.size() == 2);
}

TEST_CASE("oh-like uses three source shift profiles") {
    auto s = synth::make_default_scenario(ScenarioStyle::OHLike, 1);
    auto sources = s.source_domains();
    CHECK(sources.size() == 4);
    std::set<std::pair<double, double>> profiles;
    for (const auto* d : sources) profiles.insert({d->shift[0], d->scale});
    CHECK(profiles.size() == 3);
    CHECK(s.target_class_set() == std::set<int>{0, 1, 2, 3, 4});
}

TEST_CASE("same style and seed give byte-identical scenarios and samples") {
    auto a = synth::make_default_scenario(ScenarioStyle::O31Like, 7);
    auto b = synth::make_default_scenario(ScenarioStyle::O31Like, 7);
    CHECK(io::scenario_to_json(a) == io::scenario_to_json(b));

    auto sa = synth::all_source_samples(a);
    auto sb = synth::all_source_samples(b);
    REQUIRE(sa.size() == sb.size());
    for (std::size_t i = 0; i < sa.size(); ++i) {
        CHECK(sa[i].id == sb[i].id);
        CHECK(sa[i].features == sb[i].features);  // bitwise
    }
}

TEST_CASE("target classes are a strict subset of the source union") {
    for (auto style : {ScenarioStyle::O31Like, ScenarioStyle::OHLike}) {
        auto s = synth::make_default_scenario(style, 3);
        auto src = s.source_class_union();
        auto tgt = s.target_class_set();
        for (int c : tgt) CHECK(src.count(c));
        CHECK(tgt.size() < src.size());
    }
}

TEST_CASE("prototype separation holds in default scenarios") {
    auto s = synth::make_default_scenario(ScenarioStyle::O31Like, 5);
    double max_scale = 0.0;
    for (const auto& d : s.domains) max_scale = std::max(max_scale, d.scale);
    double min_dist = 4.0 * max_scale * std::sqrt(static_cast<double>(s.feature_dim));
    for (auto it = s.prototypes.begin(); it != s.prototypes.end(); ++it)
        for (auto jt = std::next(it); jt != s.prototypes.end(); ++jt)
            CHECK(std::sqrt(squared_distance(it->second, jt->second)) >= min_dist);
}

TEST_CASE("sample_domain count and class contract") {
    synth::Scenario s;
    s.feature_dim = 3;
    s.seed = 11;
    s.prototypes[0] = {1.0, 2.0, 3.0};
    synth::DomainSpec spec;
    spec.domain_id = 0;
    spec.class_set = {0};
    spec.samples_per_class = 10;
    spec.shift = {0.0, 0.0, 0.0};
    spec.scale = 1.0;
    auto samples = synth::sample_domain(spec, s);
    REQUIRE(samples.size() == 10);
    for (const auto& x : samples) {
        CHECK(x.true_class == 0);
        CHECK(x.features.size() == 3);
    }
}

TEST_CASE("zero shift, unit scale: sample mean within 3 sigma / sqrt(n)") {
    synth::Scenario s;
    s.feature_dim = 4;
    s.seed = 13;
    s.prototypes[0] = {2.0, -1.0, 0.5, 3.0};
    synth::DomainSpec spec;
    spec.domain_id = 0;
    spec.class_set = {0};
    spec.samples_per_class = 400;
    spec.shift = {0.0, 0.0, 0.0, 0.0};
    spec.scale = 1.0;

    auto samples = synth::sample_domain(spec, s);
    double bound = 3.0 / std::sqrt(static_cast<double>(samples.size()));
    for (int k = 0; k < 4; ++k) {
        double mean = 0.0;
        for (const auto& x : samples) mean += x.features[static_cast<std::size_t>(k)];
        mean /= static_cast<double>(samples.size());
        CHECK(std::abs(mean - s.prototypes[0][static_cast<std::size_t>(k)]) < bound);
    }
}

TEST_CASE("empirical means of shifted twins differ by the shift difference") {
    synth::Scenario s;
    s.feature_dim = 2;
    s.seed = 17;
    s.prototypes[0] = {0.0, 0.0};
    synth::DomainSpec a, b;
    a.domain_id = 0;
    a.class_set = {0};
    a.samples_per_class = 1500;
    a.shift = {0.0, 0.0};
    a.scale = 1.0;
    b = a;
    b.domain_id = 1;
    b.shift = {2.0, -1.5};

    auto sa = synth::sample_domain(a, s);
    auto sb = synth::sample_domain(b, s);
    for (int k = 0; k < 2; ++k) {
        double ma = 0.0, mb = 0.0;
        for (const auto& x : sa) ma += x.features[static_cast<std::size_t>(k)];
        for (const auto& x : sb) mb += x.features[static_cast<std::size_t>(k)];
        ma /= static_cast<double>(sa.size());
        mb /= static_cast<double>(sb.size());
        CHECK(std::abs((mb - ma) - b.shift[static_cast<std::size_t>(k)]) < 0.12);
    }
}

TEST_CASE("unknown class id is a configuration error") {
    synth::Scenario s;
    s.feature_dim = 2;
    s.seed = 1;
    s.prototypes[0] = {0.0, 0.0};
    synth::DomainSpec spec;
    spec.domain_id = 0;
    spec.class_set = {42};
    spec.samples_per_class = 1;
    spec.shift = {0.0, 0.0};
    spec.scale = 1.0;
    CHECK_THROWS(synth::sample_domain(spec, s));
}

TEST_CASE("scenario JSON round trip") {
    auto s = synth::make_default_scenario(ScenarioStyle::OHLike, 23);
    auto text = io::scenario_to_json(s);
    auto back = io::scenario_from_json(text);
    CHECK(io::scenario_to_json(back) == text);
    CHECK(back.feature_dim == s.feature_dim);
    CHECK(back.domains.size() == s.domains.size());
    // samples be regenerable bit-identically from the parsed copy
    CHECK(synth::target_samples(back).front().features ==
          synth::target_samples(s).front().features);
}

TEST_CASE("scenario validation rejects broken inputs") {
    auto s = synth::make_default_scenario(ScenarioStyle::O31Like, 2);
    auto broken = s;
    broken.domains[0].scale = 0.0;
    CHECK_THROWS(broken.validate());

    broken = s;
    broken.domains.back().role = synth::DomainRole::Source;  // drop the target
    CHECK_THROWS(broken.validate());

    broken = s;
    broken.prototypes.erase(0);
    CHECK_THROWS(broken.validate());
}
