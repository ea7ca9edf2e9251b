#include <benchmark/benchmark.h>

#include "oscrowd/adapt.hpp"
#include "oscrowd/crowd.hpp"
#include "oscrowd/open_set.hpp"
#include "oscrowd/pipeline.hpp"
#include "oscrowd/train.hpp"

using namespace oscrowd;

namespace {

nn::MLPNet random_net(std::vector<int> sizes, uint64_t seed) {
    auto net = nn::MLPNet::make(std::move(sizes), nn::Activation::Tanh, nn::Head::Linear);
    Rng rng(seed);
    net.init_params(rng);
    return net;
}

Matrix random_batch(std::size_t rows, std::size_t cols, uint64_t seed) {
    Rng rng(seed);
    Matrix m(rows, cols);
    for (auto& x : m.data) x = rng.uniform(-1.0, 1.0);
    return m;
}

}  // namespace

static void BM_Forward(benchmark::State& state) {
    auto net = random_net({10, 32, 8}, 1);
    auto batch = random_batch(static_cast<std::size_t>(state.range(0)), 10, 2);
    for (auto _ : state) {
        auto out = nn::forward(net, batch);
        benchmark::DoNotOptimize(out.data);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Forward)->Arg(32)->Arg(256);

static void BM_Backward(benchmark::State& state) {
    auto net = random_net({10, 32, 8}, 3);
    auto batch = random_batch(static_cast<std::size_t>(state.range(0)), 10, 4);
    auto cache = nn::forward_cached(net, batch);
    Matrix upstream(batch.rows, 8, 0.01);
    for (auto _ : state) {
        auto grads = nn::backward(net, cache, upstream);
        benchmark::DoNotOptimize(grads.input.data);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Backward)->Arg(32)->Arg(256);

static void BM_AdversarialEpoch(benchmark::State& state) {
    auto scenario = synth::make_default_scenario(synth::ScenarioStyle::O31Like, 1);
    auto source = synth::all_source_samples(scenario);
    auto target = synth::target_samples(scenario);
    auto fs = random_net({10, 32, 8}, 5);
    auto disc = nn::MLPNet::make({8, 16, 1}, nn::Activation::Tanh, nn::Head::Sigmoid);
    Rng rng(6);
    disc.init_params(rng);

    nn::TrainConfig cfg;
    cfg.max_epochs = 1;
    for (auto _ : state) {
        auto result = nn::train_adversarial(fs, disc, fs, source, target, cfg);
        benchmark::DoNotOptimize(result.epochs_run);
    }
}
BENCHMARK(BM_AdversarialEpoch);

static void BM_LabelTarget(benchmark::State& state) {
    auto scenario = synth::make_default_scenario(synth::ScenarioStyle::O31Like, 2);
    auto source = synth::group_by_class(synth::all_source_samples(scenario));
    auto target = synth::target_samples(scenario);
    auto fs = random_net({10, 32, 8}, 7);

    std::vector<pda::ClassScore> scores;
    for (const auto& [cls, unused] : source) scores.push_back({cls, 0.6, 2});
    auto centers = openset::compute_centers(source, fs, scores);
    openset::AssignConfig cfg;
    for (auto _ : state) {
        auto split = openset::label_target(target, fs, centers, cfg);
        benchmark::DoNotOptimize(split.labelled.size());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(target.size()));
}
BENCHMARK(BM_LabelTarget);

static void BM_Completion(benchmark::State& state) {
    Rng rng(8);
    std::vector<Vec> dists;
    for (int i = 0; i < 64; ++i) {
        Vec p(7);
        for (auto& x : p) x = rng.uniform(0.0, 1.0);
        dists.push_back(std::move(p));
    }
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(crowd::completion(dists[i++ & 63]));
    }
}
BENCHMARK(BM_Completion);

static void BM_EmInfer(benchmark::State& state) {
    Rng rng(9);
    const int n_tasks = static_cast<int>(state.range(0));
    const int n_labels = 7;
    std::vector<crowd::EmTaskView> tasks(static_cast<std::size_t>(n_tasks));
    for (int t = 0; t < n_tasks; ++t) {
        int truth = rng.uniform_int(0, n_labels - 1);
        tasks[static_cast<std::size_t>(t)].task_id = t;
        tasks[static_cast<std::size_t>(t)].machine_label = truth;
        for (int w = 0; w < 5; ++w) {
            int ans = rng.uniform() < 0.7 ? truth : rng.uniform_int(0, n_labels - 1);
            tasks[static_cast<std::size_t>(t)].annotations.emplace_back(w % 30, ans);
        }
    }
    crowd::EmOptions opts;
    for (auto _ : state) {
        auto result = crowd::em_infer(tasks, n_labels, opts);
        benchmark::DoNotOptimize(result.labels.size());
    }
    state.SetItemsProcessed(state.iterations() * n_tasks);
}
BENCHMARK(BM_EmInfer)->Arg(100)->Arg(500);

static void BM_Simulation(benchmark::State& state) {
    std::vector<crowd::CrowdTask> tasks;
    for (int i = 0; i < 200; ++i) {
        crowd::CrowdTask t;
        t.task_id = i;
        t.truth_index = i % 5;
        if (i % 10 != 0) t.machine_label = i % 5;
        tasks.push_back(std::move(t));
    }
    Rng rng(10);
    auto workers = crowd::spawn_workers(30, {20, 60, 20}, 5, rng);
    crowd::EngineConfig cfg;
    for (auto _ : state) {
        auto report = crowd::run_simulation(tasks, workers, cfg, 5);
        benchmark::DoNotOptimize(report.accuracy);
    }
}
BENCHMARK(BM_Simulation);

BENCHMARK_MAIN();
