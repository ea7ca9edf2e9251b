#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "oscrowd/matrix.hpp"
#include "oscrowd/rng.hpp"

namespace oscrowd::crowd {

enum class WorkerType { Expert, Reliable, Unreliable };
enum class Behavior { Honest, ConstantAnswer };
enum class Pool { Unplaced, Unreliable, Reliable, Expert };  // W_u / W_r / W_e

std::string pool_name(Pool p);
std::string worker_type_name(WorkerType t);

// Ground-truth worker model (R, A) plus the engine's running estimate.
struct Worker {
    int id = 0;
    WorkerType true_type = WorkerType::Reliable;
    int true_r = 1;       // conscientiousness
    double true_a = 0.5;  // generative accuracy
    Behavior behavior = Behavior::Honest;
    int constant_label = 0;  // only used by constant-answer workers

    int n_correct = 0;
    int n_total = 0;
    double a_est = 0.5;
    Pool pool = Pool::Unplaced;
};

struct WorkerRatios {
    int expert_pct = 20;
    int reliable_pct = 60;
    int unreliable_pct = 20;
};

struct Annotation {
    int task_id = 0;
    int worker_id = 0;
    int label = 0;  // label-space index
    int arrival_index = 0;
    // Set once the author is rated unreliable; excluded annotations never
    // re-enter aggregation, but still count toward the author's own record.
    bool excluded = false;
};

// One task as the engine sees it. Labels are indices into the engine's
// label space; truth_index is -1 when the hidden class is outside it.
struct CrowdTask {
    int task_id = 0;
    int truth_index = -1;
    std::optional<int> machine_label;  // nullopt = unknown pool D_u
    std::vector<Annotation> annotations;
    Vec aggregate;                     // last computed soft label average
    std::optional<int> consensus;
    double completion = 0.0;
    bool completed = false;
    std::optional<int> expert_label;
    std::vector<double> completion_trajectory;

    bool is_unknown_pool() const { return !machine_label.has_value(); }

    // Annotations that take part in aggregation; the ceiling applies here.
    int eligible_count() const {
        int n = 0;
        for (const auto& a : annotations)
            if (!a.excluded) ++n;
        return n;
    }
};

struct EngineConfig {
    double gamma = 0.75;               // completion threshold
    int annotation_ceiling = 5;
    int explore_min = 5;               // answers required before a worker is pooled
    int expert_min_answers = 50;       // evidence before the expert gate opens
    double expert_accuracy = 0.8;
    double reliable_accuracy = 0.4;
    double modal_answer_threshold = 0.8;  // above this the worker counts as constant
    int task_batch_size = 10;          // tasks handed to each arriving worker
    int em_period = 10;                // arrivals between batch updates
    int em_max_iters = 100;
    double em_tol = 1e-6;
    int arrival_cap_factor = 50;
    double constant_answer_fraction = 0.5;  // of unreliable workers
    uint64_t seed = 1;

    void validate() const;
};

// --- workers ---------------------------------------------------------------

// Exact type counts by largest remainder; accuracy drawn uniformly from the
// type's range (experts [0.8,1.0], reliable [0.4,0.8], unreliable [0.1,0.4]).
// constant_fraction of the unreliable workers always answer one fixed label.
std::vector<Worker> spawn_workers(int count, const WorkerRatios& ratios, int n_labels,
                                  Rng& rng, double constant_fraction = 0.5);

// Honest workers answer the truth with probability true_a and otherwise
// uniformly among the remaining labels; constant-answer workers always
// return their fixed label. truth_index -1 draws uniformly over everything.
int simulate_answer(const Worker& worker, int truth_index, int n_labels, Rng& rng);

double update_worker_accuracy(Worker& worker, int n_correct, int n_total);

Pool classify_worker(const Worker& worker, double modal_fraction, const EngineConfig& cfg);

// --- aggregation -----------------------------------------------------------

// Soft one-hot: the annotated entry keeps weight a_est, every other entry
// gets (1 - a_est) / n. Deliberately unnormalised; probabilities are only
// formed inside completion().
Vec soften(const Vec& one_hot, double a_est, int n_labels);
Vec soften_index(int label, double a_est, int n_labels);

// Mean of softened annotations; annotator accuracies looked up by id.
Vec aggregate(const std::vector<Annotation>& annotations,
              const std::unordered_map<int, double>& accuracy_of, int n_labels);

int argmax_label(const Vec& scores);

// 1 - H(p) / ln(n) after normalising the aggregate to a distribution.
double completion(const Vec& aggregate_vec);

// --- EM truth inference ------------------------------------------------------

struct EmTaskView {
    int task_id = 0;
    std::optional<int> machine_label;
    std::vector<std::pair<int, int>> annotations;  // (worker_id, label)
};

struct EmOptions {
    int max_iters = 100;
    double tol = 1e-6;
    double initial_accuracy = 0.5;
    bool seed_with_machine = true;  // cold start scores workers against machine labels
};

struct EmResult {
    std::vector<int> labels;  // aligned with the input task order
    std::unordered_map<int, double> accuracy;
    bool converged = false;
    int iterations = 0;
};

// Alternates consensus labels (softened-mean argmax) with worker-accuracy
// re-estimation until labels stop changing.
EmResult em_infer(const std::vector<EmTaskView>& tasks, int n_labels, const EmOptions& opts);

// --- simulation --------------------------------------------------------------

struct TaskReport {
    int task_id = 0;
    std::optional<int> final_label;  // label-space index
    int truth_index = -1;
    std::string source;  // consensus | expert | machine
    int annotation_count = 0;
    bool completed = false;
    std::vector<double> completion_trajectory;
};

struct WorkerReport {
    int worker_id = 0;
    std::string true_type;
    std::string final_pool;
    double a_est = 0.0;
    int n_total = 0;
};

struct SimReport {
    std::vector<TaskReport> tasks;
    std::vector<WorkerReport> workers;
    double accuracy = 0.0;
    int annotations_used = 0;
    int arrivals = 0;
    bool all_completed = false;
    double machine_precision = 0.0;  // correct machine labels / machine-labelled tasks
    double machine_recall = 0.0;     // machine-labelled tasks / all tasks
};

// Online loop: a uniformly random worker arrives, receives a batch by pool
// (explore / audit / low-completion / unknown-pool), answers, and every
// em_period arrivals the engine refreshes ability estimates against the
// reference labels, recomputes consensus and completion, marks finished
// tasks and re-pools workers. Worker ids must be 0..n-1.
SimReport run_simulation(std::vector<CrowdTask> tasks, std::vector<Worker> workers,
                         const EngineConfig& cfg, int n_labels);

// Baseline: exactly `annotation_ceiling` annotations per task from randomly
// arriving workers, no pooling or machine guidance, one EM pass at the end
// starting from uniform accuracy.
SimReport wmv_baseline(std::vector<CrowdTask> tasks, std::vector<Worker> workers,
                       const EngineConfig& cfg, int n_labels);

}  // namespace oscrowd::crowd
