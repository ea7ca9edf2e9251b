#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "oscrowd/open_set.hpp"

using namespace oscrowd;
using openset::AssignConfig;
using openset::ClassCenter;

namespace {

nn::MLPNet identity_net(int d) {
    auto net = nn::MLPNet::make({d, d}, nn::Activation::Tanh, nn::Head::Linear);
    for (int i = 0; i < d; ++i)
        net.weights[0](static_cast<std::size_t>(i), static_cast<std::size_t>(i)) = 1.0;
    return net;
}

synth::Sample sample_at(int id, int cls, Vec f) {
    synth::Sample s;
    s.id = id;
    s.true_class = cls;
    s.features = std::move(f);
    return s;
}

ClassCenter center_of(int cls, Vec c, double max_dist, double k) {
    ClassCenter out;
    out.class_id = cls;
    out.center = std::move(c);
    out.max_dist = max_dist;
    out.k_c = k;
    return out;
}

}  // namespace

TEST_CASE("compute_centers closed forms") {
    std::map<int, std::vector<synth::Sample>> by_class;
    by_class[0] = {sample_at(0, 0, {0.0, 0.0}), sample_at(1, 0, {2.0, 0.0})};
    by_class[1] = {sample_at(2, 1, {5.0, 5.0})};
    std::vector<pda::ClassScore> scores = {{0, 0.8, 2}, {1, 0.6, 2}};

    auto centers = openset::compute_centers(by_class, identity_net(2), scores);
    REQUIRE(centers.size() == 2);
    CHECK(centers[0].center[0] == doctest::Approx(1.0));
    CHECK(centers[0].center[1] == doctest::Approx(0.0));
    CHECK(centers[0].max_dist == doctest::Approx(1.0));
    CHECK(centers[0].k_c == doctest::Approx(0.8));

    // single-sample class collapses on itself
    CHECK(centers[1].center[0] == doctest::Approx(5.0));
    CHECK(centers[1].max_dist == 0.0);
}

TEST_CASE("compute_centers matches a brute-force loop on random data") {
    Rng rng(41);
    std::map<int, std::vector<synth::Sample>> by_class;
    for (int i = 0; i < 20; ++i)
        by_class[0].push_back(
            sample_at(i, 0, {rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0), rng.normal()}));
    std::vector<pda::ClassScore> scores = {{0, 0.5, 2}};
    auto centers = openset::compute_centers(by_class, identity_net(3), scores);
    REQUIRE(centers.size() == 1);

    Vec mean(3, 0.0);
    for (const auto& s : by_class[0])
        for (int k = 0; k < 3; ++k) mean[static_cast<std::size_t>(k)] += s.features[static_cast<std::size_t>(k)];
    for (auto& x : mean) x /= 20.0;
    double max_d = 0.0;
    for (const auto& s : by_class[0]) max_d = std::max(max_d, squared_distance(s.features, mean));

    for (int k = 0; k < 3; ++k)
        CHECK(centers[0].center[static_cast<std::size_t>(k)] ==
              doctest::Approx(mean[static_cast<std::size_t>(k)]));
    CHECK(centers[0].max_dist == doctest::Approx(max_d));
}

TEST_CASE("compute_centers rejects empty classes and missing scores") {
    std::map<int, std::vector<synth::Sample>> by_class;
    by_class[0] = {};
    CHECK_THROWS(openset::compute_centers(by_class, identity_net(2), {{0, 0.5, 2}}));

    by_class[0] = {sample_at(0, 0, {0.0, 0.0})};
    CHECK_THROWS(openset::compute_centers(by_class, identity_net(2), {}));
}

TEST_CASE("weighted_distance formula") {
    auto c = center_of(0, {1.0, 1.0}, 1.0, 0.5);
    CHECK(openset::weighted_distance({1.0, 1.0}, c) == 0.0);

    // squared distance 2 at k_c = 0.5 doubles twice
    CHECK(openset::weighted_distance({0.0, 0.0}, c) == doctest::Approx(4.0));

    // equidistant from two centers: the double-k class is half the distance
    auto strong = center_of(1, {2.0, 0.0}, 1.0, 0.8);
    auto weak = center_of(2, {-2.0, 0.0}, 1.0, 0.4);
    Vec x = {0.0, 0.0};
    CHECK(openset::weighted_distance(x, strong) ==
          doctest::Approx(0.5 * openset::weighted_distance(x, weak)));

    auto bad = center_of(3, {0.0, 0.0}, 1.0, 0.0);
    CHECK_THROWS(openset::weighted_distance(x, bad));
}

TEST_CASE("assign: center hit, unknown miss, and the feasibility flip") {
    AssignConfig cfg;  // alpha 1.2
    std::vector<ClassCenter> centers = {center_of(0, {0.0, 0.0}, 1.0, 1.0),
                                        center_of(1, {4.0, 0.0}, 1.0, 1.0)};

    auto at_center = openset::assign(1, {0.0, 0.0}, centers, cfg);
    CHECK(at_center.label == 0);
    CHECK(*at_center.weighted_distance == 0.0);

    auto far = openset::assign(2, {100.0, 100.0}, centers, cfg);
    CHECK(far.is_unknown());
    CHECK(!far.weighted_distance.has_value());

    // nearest class by raw distance is infeasible, the farther one feasible
    std::vector<ClassCenter> tight = {center_of(0, {0.0, 0.0}, 0.01, 1.0),
                                      center_of(1, {3.0, 0.0}, 10.0, 1.0)};
    Vec x = {1.0, 0.0};
    // brute-force feasibility check of the constructed geometry
    REQUIRE(openset::weighted_distance(x, tight[0]) > cfg.alpha * tight[0].max_dist);
    REQUIRE(openset::weighted_distance(x, tight[1]) <= cfg.alpha * tight[1].max_dist);
    REQUIRE(squared_distance(x, tight[0].center) < squared_distance(x, tight[1].center));

    auto flipped = openset::assign(3, x, tight, cfg);
    CHECK(flipped.label == 1);
}

TEST_CASE("assign breaks exact ties toward the lower class id") {
    AssignConfig cfg;
    std::vector<ClassCenter> centers = {center_of(5, {1.0, 0.0}, 2.0, 0.5),
                                        center_of(2, {-1.0, 0.0}, 2.0, 0.5)};
    auto label = openset::assign(0, {0.0, 0.0}, centers, cfg);
    CHECK(label.label == 2);
}

TEST_CASE("label_target splits every task and respects alpha extremes") {
    Rng rng(77);
    std::vector<ClassCenter> centers = {center_of(0, {0.0, 0.0}, 1.0, 0.7),
                                        center_of(1, {6.0, 0.0}, 1.0, 0.7)};
    std::vector<synth::Sample> target;
    for (int i = 0; i < 60; ++i)
        target.push_back(sample_at(i, 0, {rng.uniform(-3.0, 9.0), rng.uniform(-3.0, 3.0)}));

    AssignConfig huge;
    huge.alpha = 1e6;
    auto all = openset::label_target(target, identity_net(2), centers, huge);
    CHECK(all.unknown.empty());
    CHECK(all.total() == target.size());

    AssignConfig tiny;
    tiny.alpha = 1e-12;
    auto none = openset::label_target(target, identity_net(2), centers, tiny);
    CHECK(none.labelled.empty());
    CHECK(none.total() == target.size());
}

TEST_CASE("labelled sets grow monotonically with alpha") {
    Rng rng(88);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<ClassCenter> centers;
        int n_centers = 2 + static_cast<int>(rng.next_u64() % 3);
        for (int c = 0; c < n_centers; ++c)
            centers.push_back(center_of(c, {rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0)},
                                        rng.uniform(0.1, 4.0), rng.uniform(0.2, 1.0)));
        std::vector<synth::Sample> target;
        for (int i = 0; i < 40; ++i)
            target.push_back(sample_at(i, 0, {rng.uniform(-8.0, 8.0), rng.uniform(-8.0, 8.0)}));

        std::set<int> previous;
        for (double alpha : {0.3, 0.7, 1.0, 1.4, 2.5}) {
            AssignConfig cfg;
            cfg.alpha = alpha;
            auto split = openset::label_target(target, identity_net(2), centers, cfg);
            std::set<int> labelled;
            for (const auto& m : split.labelled) labelled.insert(m.task_id);
            for (int id : previous) CHECK(labelled.count(id));
            previous = std::move(labelled);
        }
    }
}

TEST_CASE("uniform k_c scaling keeps the argmin within a fixed feasible set") {
    Rng rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<ClassCenter> centers;
        for (int c = 0; c < 4; ++c)
            centers.push_back(center_of(c, {rng.uniform(-4.0, 4.0), rng.uniform(-4.0, 4.0)},
                                        rng.uniform(0.5, 3.0), rng.uniform(0.2, 0.9)));
        Vec x = {rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0)};

        AssignConfig cfg;
        cfg.alpha = 1.2;
        std::vector<int> feasible;
        for (const auto& c : centers)
            if (openset::weighted_distance(x, c) <= cfg.alpha * c.max_dist)
                feasible.push_back(c.class_id);
        if (feasible.empty()) continue;

        auto argmin_over = [&](double lambda) {
            int best = -1;
            double best_d = 0.0;
            for (const auto& c : centers) {
                if (std::find(feasible.begin(), feasible.end(), c.class_id) == feasible.end())
                    continue;
                auto scaled = c;
                scaled.k_c *= lambda;
                double d = openset::weighted_distance(x, scaled);
                if (best < 0 || d < best_d) {
                    best = c.class_id;
                    best_d = d;
                }
            }
            return best;
        };
        CHECK(argmin_over(1.0) == argmin_over(3.7));
        CHECK(argmin_over(1.0) == argmin_over(0.25));
    }
}

TEST_CASE("assign is pure") {
    AssignConfig cfg;
    std::vector<ClassCenter> centers = {center_of(0, {0.0, 0.0}, 1.0, 0.5)};
    auto a = openset::assign(7, {0.5, 0.5}, centers, cfg);
    auto b = openset::assign(7, {0.5, 0.5}, centers, cfg);
    CHECK(a.label == b.label);
    CHECK(a.weighted_distance == b.weighted_distance);
}
