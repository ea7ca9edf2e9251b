#include "oscrowd/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <stdexcept>

#include "oscrowd/json_io.hpp"

namespace oscrowd::pipeline {

namespace {

// Sub-stage seeds are all derived from the run seed so one value pins the
// whole pipeline.
pda::PdaConfig seeded_pda_config(const PipelineConfig& cfg) {
    pda::PdaConfig out = cfg.pda;
    out.source_train.seed = cfg.seed ^ 0xA11CEull;
    out.adv_train.seed = cfg.seed ^ 0xB0B5ull;
    return out;
}

struct StageError : std::runtime_error {
    StageError(const std::string& stage, const std::string& what)
        : std::runtime_error("[" + stage + "] " + what) {}
};

template <typename F>
auto stage(const std::string& name, F&& f) {
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

synth::Scenario load_or_generate_scenario(const PipelineConfig& cfg) {
    if (cfg.scenario_path.has_value())
        return io::scenario_from_json(io::read_text_file(*cfg.scenario_path));
    return synth::make_default_scenario(synth::parse_style(cfg.style), cfg.seed);
}

std::vector<crowd::Worker> spawn_pipeline_workers(const PipelineConfig& cfg, int n_labels) {
    Rng worker_rng(cfg.seed ^ 0x30Bull);
    return crowd::spawn_workers(cfg.worker_count, cfg.ratios, n_labels, worker_rng,
                                cfg.engine.constant_answer_fraction);
}

}  // namespace

std::vector<openset::ClassCenter> build_centers(const synth::Scenario& scenario,
                                                const pda::PdaResult& pda_result) {
    std::vector<synth::Sample> samples;
    for (const auto& d : scenario.domains) {
        if (d.role != synth::DomainRole::Source) continue;
        if (std::find(pda_result.surviving_domains.begin(), pda_result.surviving_domains.end(),
                      d.domain_id) == pda_result.surviving_domains.end())
            continue;
        auto s = synth::sample_domain(d, scenario);
        samples.insert(samples.end(), s.begin(), s.end());
    }
    auto by_class = synth::group_by_class(samples);

    std::map<int, std::vector<synth::Sample>> candidates;
    for (int c : pda_result.shared_classes) candidates[c] = by_class.at(c);
    std::vector<pda::ClassScore> candidate_scores;
    for (const auto& s : pda_result.round2)
        if (candidates.count(s.class_id)) candidate_scores.push_back(s);
    return openset::compute_centers(candidates, pda_result.source_extractor, candidate_scores);
}

TaskSet build_task_set(const synth::Scenario& scenario, const pda::PdaResult& pda_result,
                       const openset::LabelSplit& split) {
    TaskSet set;
    set.label_space = pda_result.surviving_classes;
    std::sort(set.label_space.begin(), set.label_space.end());

    std::map<int, int> truth_of;
    for (const auto& s : synth::target_samples(scenario)) truth_of[s.id] = s.true_class;

    auto add = [&](const openset::MachineLabel& m) {
        TaskEntry t;
        t.task_id = m.task_id;
        t.truth_class = truth_of.at(m.task_id);
        t.machine_class = m.label;
        set.tasks.push_back(t);
    };
    for (const auto& m : split.labelled) add(m);
    for (const auto& m : split.unknown) add(m);
    std::sort(set.tasks.begin(), set.tasks.end(),
              [](const TaskEntry& a, const TaskEntry& b) { return a.task_id < b.task_id; });
    return set;
}

std::vector<crowd::CrowdTask> to_crowd_tasks(const TaskSet& set) {
    std::map<int, int> index_of;
    for (std::size_t i = 0; i < set.label_space.size(); ++i)
        index_of[set.label_space[i]] = static_cast<int>(i);

    std::vector<crowd::CrowdTask> tasks;
    tasks.reserve(set.tasks.size());
    for (const auto& t : set.tasks) {
        crowd::CrowdTask ct;
        ct.task_id = t.task_id;
        auto truth_it = index_of.find(t.truth_class);
        ct.truth_index = truth_it == index_of.end() ? -1 : truth_it->second;
        if (t.machine_class.has_value()) {
            auto it = index_of.find(*t.machine_class);
            if (it == index_of.end())
                throw std::invalid_argument("to_crowd_tasks: machine label outside label space");
            ct.machine_label = it->second;
        }
        tasks.push_back(std::move(ct));
    }
    return tasks;
}

MachineMetrics machine_metrics(const synth::Scenario& scenario,
                               const openset::LabelSplit& split) {
    std::map<int, int> truth_of;
    for (const auto& s : synth::target_samples(scenario)) truth_of[s.id] = s.true_class;

    MachineMetrics m;
    m.n_labelled = static_cast<int>(split.labelled.size());
    m.n_unknown = static_cast<int>(split.unknown.size());
    for (const auto& label : split.labelled)
        if (label.label.has_value() && truth_of.at(label.task_id) == *label.label) ++m.n_correct;

    int total = m.n_labelled + m.n_unknown;
    // An empty labelled pool makes precision vacuous; report 1.0 so the
    // product column stays meaningful at tiny alpha.
    m.precision = m.n_labelled == 0
                      ? 1.0
                      : static_cast<double>(m.n_correct) / static_cast<double>(m.n_labelled);
    m.recall = total == 0 ? 0.0 : static_cast<double>(m.n_labelled) / static_cast<double>(total);
    return m;
}

RunReport run_pipeline(const PipelineConfig& cfg) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    auto path_of = [&](const std::string& name) { return (fs::path(cfg.out_dir) / name).string(); };

    RunReport report;
    report.scenario_file = "scenario.json";
    report.pda_file = "pda.json";
    report.labels_file = "machine_labels.csv";
    report.tasks_file = "tasks.json";
    report.simulation_file = "simulation.json";

    synth::Scenario scenario = stage("generate", [&] { return load_or_generate_scenario(cfg); });
    io::write_text_file(path_of(report.scenario_file), io::scenario_to_json(scenario));

    pda::PdaResult pda_result =
        stage("adapt", [&] { return pda::run_pda(scenario, seeded_pda_config(cfg)); });
    io::write_text_file(path_of(report.pda_file), io::pda_to_json(scenario, pda_result));

    openset::LabelSplit split = stage("assign", [&] {
        auto centers = build_centers(scenario, pda_result);
        return openset::label_target(synth::target_samples(scenario), pda_result.generator,
                                     centers, cfg.assign);
    });
    io::write_text_file(path_of(report.labels_file), io::machine_labels_csv(split));

    MachineMetrics metrics = machine_metrics(scenario, split);
    TaskSet task_set = build_task_set(scenario, pda_result, split);
    io::write_text_file(path_of(report.tasks_file), io::task_set_to_json(task_set));

    crowd::SimReport sim = stage("simulate", [&] {
        crowd::EngineConfig engine_cfg = cfg.engine;
        engine_cfg.seed = cfg.seed ^ 0xC0FFEEull;
        int n_labels = static_cast<int>(task_set.label_space.size());
        return crowd::run_simulation(to_crowd_tasks(task_set),
                                     spawn_pipeline_workers(cfg, n_labels), engine_cfg, n_labels);
    });
    io::write_text_file(path_of(report.simulation_file),
                        io::sim_report_to_json(sim, task_set.label_space));

    report.final_accuracy = sim.accuracy;
    report.machine_precision = metrics.precision;
    report.machine_recall = metrics.recall;
    report.pr_product = metrics.precision * metrics.recall;
    report.annotations_used = sim.annotations_used;
    report.n_tasks = static_cast<int>(task_set.tasks.size());
    report.n_labelled = metrics.n_labelled;
    report.n_unknown = metrics.n_unknown;
    report.all_completed = sim.all_completed;

    io::write_text_file(path_of("run_report.json"), io::run_report_to_json(report));
    return report;
}

std::vector<AblationRow> ablate_alpha(const PipelineConfig& cfg, std::vector<double> alphas) {
    if (alphas.size() < 2) throw std::invalid_argument("ablate_alpha: need at least two values");
    std::sort(alphas.begin(), alphas.end());

    synth::Scenario scenario = load_or_generate_scenario(cfg);
    pda::PdaResult pda_result = pda::run_pda(scenario, seeded_pda_config(cfg));
    auto centers = build_centers(scenario, pda_result);
    auto target = synth::target_samples(scenario);

    std::vector<AblationRow> rows;
    for (double alpha : alphas) {
        openset::AssignConfig assign_cfg;
        assign_cfg.alpha = alpha;
        auto split = openset::label_target(target, pda_result.generator, centers, assign_cfg);
        MachineMetrics m = machine_metrics(scenario, split);
        rows.push_back({alpha, m.precision, m.recall, m.precision * m.recall});
    }
    return rows;
}

CompareResult compare_baseline(const PipelineConfig& cfg) {
    synth::Scenario scenario = load_or_generate_scenario(cfg);
    pda::PdaResult pda_result = pda::run_pda(scenario, seeded_pda_config(cfg));
    auto centers = build_centers(scenario, pda_result);
    auto split = openset::label_target(synth::target_samples(scenario), pda_result.generator,
                                       centers, cfg.assign);
    TaskSet task_set = build_task_set(scenario, pda_result, split);

    int n_labels = static_cast<int>(task_set.label_space.size());
    crowd::EngineConfig engine_cfg = cfg.engine;
    engine_cfg.seed = cfg.seed ^ 0xC0FFEEull;
    auto workers = spawn_pipeline_workers(cfg, n_labels);

    auto oscrowd_report =
        crowd::run_simulation(to_crowd_tasks(task_set), workers, engine_cfg, n_labels);
    auto wmv_report = crowd::wmv_baseline(to_crowd_tasks(task_set), workers, engine_cfg, n_labels);

    CompareResult result;
    result.oscrowd_accuracy = oscrowd_report.accuracy;
    result.wmv_accuracy = wmv_report.accuracy;
    result.oscrowd_annotations = oscrowd_report.annotations_used;
    result.wmv_annotations = wmv_report.annotations_used;
    return result;
}

}  // namespace oscrowd::pipeline
