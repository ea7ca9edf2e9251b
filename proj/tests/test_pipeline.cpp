#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <set>

#include "oscrowd/json_io.hpp"
#include "oscrowd/pipeline.hpp"

using namespace oscrowd;
namespace fs = std::filesystem;

namespace {

pipeline::PipelineConfig fast_config(uint64_t seed, const std::string& out_dir) {
    pipeline::PipelineConfig cfg;
    cfg.seed = seed;
    cfg.out_dir = out_dir;
    cfg.pda.source_train.max_epochs = 120;
    cfg.pda.adv_train.max_epochs = 40;
    return cfg;
}

std::string tmp_dir(const std::string& name) {
    auto dir = fs::temp_directory_path() / "oscrowd_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir.string();
}

}  // namespace

TEST_CASE("run_pipeline produces a fully populated report and artifacts") {
    auto dir = tmp_dir("run_basic");
    auto report = pipeline::run_pipeline(fast_config(1, dir));

    CHECK(report.machine_precision >= 0.0);
    CHECK(report.machine_precision <= 1.0);
    CHECK(report.machine_recall > 0.0);
    CHECK(report.machine_recall <= 1.0);
    CHECK(report.pr_product == doctest::Approx(report.machine_precision * report.machine_recall));
    CHECK(report.final_accuracy > 0.0);
    CHECK(report.n_tasks == 500);
    CHECK(report.n_labelled + report.n_unknown == report.n_tasks);
    CHECK(report.annotations_used > 0);

    for (const auto& name : {report.scenario_file, report.pda_file, report.labels_file,
                             report.tasks_file, report.simulation_file})
        CHECK(fs::exists(fs::path(dir) / name));
    CHECK(fs::exists(fs::path(dir) / "run_report.json"));
}

TEST_CASE("a huge alpha labels every task") {
    auto dir = tmp_dir("run_alpha");
    auto cfg = fast_config(2, dir);
    cfg.assign.alpha = 1e6;
    auto report = pipeline::run_pipeline(cfg);
    CHECK(report.machine_recall == doctest::Approx(1.0));
    CHECK(report.n_unknown == 0);
}

TEST_CASE("same seed, byte-identical artifacts") {
    auto dir_a = tmp_dir("det_a");
    auto dir_b = tmp_dir("det_b");
    pipeline::run_pipeline(fast_config(3, dir_a));
    pipeline::run_pipeline(fast_config(3, dir_b));

    for (const auto& name : {"run_report.json", "simulation.json", "machine_labels.csv",
                             "scenario.json", "pda.json", "tasks.json"}) {
        auto a = io::read_text_file((fs::path(dir_a) / name).string());
        auto b = io::read_text_file((fs::path(dir_b) / name).string());
        CHECK(a == b);
    }
}

TEST_CASE("ablation table: seven rows, monotone recall, product column") {
    auto cfg = fast_config(4, tmp_dir("ablate"));
    std::vector<double> alphas = {0.4, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6};
    auto rows = pipeline::ablate_alpha(cfg, alphas);
    REQUIRE(rows.size() == 7);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].alpha == doctest::Approx(alphas[i]));
        CHECK(rows[i].pr_product == doctest::Approx(rows[i].precision * rows[i].recall));
        if (i > 0) CHECK(rows[i].recall >= rows[i - 1].recall);
    }
    CHECK_THROWS(pipeline::ablate_alpha(cfg, {1.0}));
}

TEST_CASE("single-candidate-class scenarios pin precision at 1.0") {
    // one source domain {0,1}, target only class 0: class 1 cannot survive
    // the relevance threshold, so every machine label is class 0 == truth
    synth::Scenario s;
    s.feature_dim = 4;
    s.seed = 5;
    Rng rng(500);
    for (int c = 0; c < 2; ++c) {
        Vec p(4);
        for (auto& x : p) x = rng.normal(0.0, 8.0);
        s.prototypes[c] = p;
    }
    synth::DomainSpec src;
    src.domain_id = 0;
    src.class_set = {0, 1};
    src.samples_per_class = 40;
    src.shift = Vec(4, 0.3);
    src.scale = 1.0;
    synth::DomainSpec tgt;
    tgt.domain_id = 1;
    tgt.class_set = {0};
    tgt.samples_per_class = 60;
    tgt.shift = Vec(4, -0.3);
    tgt.scale = 1.0;
    tgt.role = synth::DomainRole::Target;
    s.domains = {src, tgt};
    s.validate();

    auto dir = tmp_dir("single_class");
    auto scenario_path = (fs::path(dir) / "scenario.json").string();
    io::write_text_file(scenario_path, io::scenario_to_json(s));

    auto cfg = fast_config(5, dir);
    cfg.scenario_path = scenario_path;
    auto rows = pipeline::ablate_alpha(cfg, {0.4, 0.8, 1.2, 1.6});
    for (const auto& r : rows) CHECK(r.precision == doctest::Approx(1.0));
}

TEST_CASE("compare_baseline reports both methods on identical inputs") {
    auto cfg = fast_config(6, tmp_dir("compare"));
    auto result = pipeline::compare_baseline(cfg);
    CHECK(result.oscrowd_accuracy > 0.5);
    CHECK(result.wmv_accuracy > 0.5);
    CHECK(result.oscrowd_annotations > 0);
    CHECK(result.wmv_annotations == 500 * cfg.engine.annotation_ceiling);
}

TEST_CASE("machine label CSV carries unknown rows with empty distances") {
    openset::LabelSplit split;
    split.labelled.push_back({3, 2, 0.5});
    split.unknown.push_back({1, std::nullopt, std::nullopt});
    auto csv = io::machine_labels_csv(split);
    CHECK(csv == "task_id,label,weighted_distance\n1,unknown,\n3,2,0.5\n");
}

TEST_CASE("ablation CSV has a header row and LF endings") {
    std::vector<pipeline::AblationRow> rows = {{0.4, 1.0, 0.5, 0.5}, {0.8, 0.9, 0.75, 0.675}};
    auto csv = io::ablation_table_csv(rows);
    CHECK(csv.substr(0, 34) == "alpha,precision,recall,pr_product\n");
    CHECK(csv.find('\r') == std::string::npos);
    CHECK(csv.back() == '\n');
}

TEST_CASE("network JSON round trip preserves parameters exactly") {
    Rng rng(7);
    auto net = nn::MLPNet::make({3, 5, 2}, nn::Activation::Tanh, nn::Head::Softmax);
    net.init_params(rng);
    auto back = io::net_from_json(io::net_to_json(net));
    CHECK(back.same_parameters(net));
    CHECK(back.hidden == net.hidden);
    CHECK(back.head == net.head);
}

TEST_CASE("task set JSON round trip") {
    pipeline::TaskSet set;
    set.label_space = {0, 1, 2, 5};
    set.tasks.push_back({10, 0, 0});
    set.tasks.push_back({11, 2, std::nullopt});
    auto back = io::task_set_from_json(io::task_set_to_json(set));
    CHECK(back.label_space == set.label_space);
    REQUIRE(back.tasks.size() == 2);
    CHECK(back.tasks[1].machine_class == std::nullopt);
    CHECK(back.tasks[0].machine_class == std::optional<int>(0));

    auto crowd_tasks = pipeline::to_crowd_tasks(back);
    CHECK(crowd_tasks[0].machine_label == std::optional<int>(0));
    CHECK(crowd_tasks[1].is_unknown_pool());
    CHECK(crowd_tasks[1].truth_index == 2);
}

TEST_CASE("workers end up in the pools their types prescribe") {
    // statistical property over five seeds: >= 80% matched placements
    int matched = 0, total = 0;
    for (uint64_t seed = 1; seed <= 5; ++seed) {
        auto dir = tmp_dir("pools_" + std::to_string(seed));
        auto report = pipeline::run_pipeline(fast_config(seed, dir));
        auto sim = io::read_text_file((fs::path(dir) / "simulation.json").string());
        // count type/pool agreement straight from the report text
        auto count = [&](const std::string& type, const std::string& pool) {
            int n = 0;
            std::size_t pos = 0;
            std::string needle = "\"true_type\": \"" + type + "\",\n      \"final_pool\": \"" + pool + "\"";
            while ((pos = sim.find(needle, pos)) != std::string::npos) {
                ++n;
                pos += needle.size();
            }
            return n;
        };
        matched += count("expert", "W_e") + count("reliable", "W_r") + count("unreliable", "W_u");
        total += 30;
    }
    CHECK(static_cast<double>(matched) / total >= 0.8);
}
