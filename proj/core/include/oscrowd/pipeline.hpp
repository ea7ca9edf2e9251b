#pragma once

#include <optional>
#include <string>
#include <vector>

#include "oscrowd/adapt.hpp"
#include "oscrowd/crowd.hpp"
#include "oscrowd/open_set.hpp"
#include "oscrowd/scenario.hpp"

namespace oscrowd::pipeline {

// Crowd tasks as persisted between the assignment and simulation stages.
// Classes are original ids; the engine's index space is derived from
// label_space (sorted surviving classes).
struct TaskEntry {
    int task_id = 0;
    int truth_class = 0;                 // hidden ground truth, evaluation only
    std::optional<int> machine_class;    // nullopt = unknown pool
};

struct TaskSet {
    std::vector<int> label_space;
    std::vector<TaskEntry> tasks;
};

TaskSet build_task_set(const synth::Scenario& scenario, const pda::PdaResult& pda_result,
                       const openset::LabelSplit& split);

std::vector<crowd::CrowdTask> to_crowd_tasks(const TaskSet& set);

// Class centers over the surviving source domains, restricted to the
// target-relevant classes.
std::vector<openset::ClassCenter> build_centers(const synth::Scenario& scenario,
                                                const pda::PdaResult& pda_result);

struct PipelineConfig {
    std::string style = "o31-like";
    uint64_t seed = 1;
    std::optional<std::string> scenario_path;  // load instead of generating
    pda::PdaConfig pda;
    openset::AssignConfig assign;
    crowd::EngineConfig engine;
    crowd::WorkerRatios ratios;
    int worker_count = 30;
    std::string out_dir = "out";
};

struct RunReport {
    // artifact file names, all relative to out_dir
    std::string scenario_file, pda_file, labels_file, tasks_file, simulation_file;
    double final_accuracy = 0.0;
    double machine_precision = 0.0;  // correct machine labels / |D_l|
    double machine_recall = 0.0;     // |D_l| / n_t
    double pr_product = 0.0;
    int annotations_used = 0;
    int n_tasks = 0;
    int n_labelled = 0;
    int n_unknown = 0;
    bool all_completed = false;
};

// generate -> adapt (two rounds) -> assign -> simulate -> report. Every
// stage artifact is persisted under cfg.out_dir; a fixed seed reproduces
// every byte.
RunReport run_pipeline(const PipelineConfig& cfg);

struct MachineMetrics {
    double precision = 0.0;
    double recall = 0.0;
    int n_labelled = 0;
    int n_unknown = 0;
    int n_correct = 0;
};

MachineMetrics machine_metrics(const synth::Scenario& scenario,
                               const openset::LabelSplit& split);

struct AblationRow {
    double alpha = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double pr_product = 0.0;
};

// One adaptation run shared across every alpha; only the assignment stage
// is swept.
std::vector<AblationRow> ablate_alpha(const PipelineConfig& cfg, std::vector<double> alphas);

struct CompareResult {
    double oscrowd_accuracy = 0.0;
    double wmv_accuracy = 0.0;
    int oscrowd_annotations = 0;
    int wmv_annotations = 0;
};

// Staged engine vs. the weighted-majority baseline on identical tasks,
// workers and seed.
CompareResult compare_baseline(const PipelineConfig& cfg);

}  // namespace oscrowd::pipeline
