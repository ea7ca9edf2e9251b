#include "oscrowd/crowd.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "oscrowd/crowd_engine_detail.hpp"

namespace oscrowd::crowd {

namespace {

// Machine-label quality over a task set; the truth index is -1 when the
// hidden class fell outside the label space, which can never match.
void fill_machine_metrics(const std::vector<CrowdTask>& tasks, SimReport& report) {
    int labelled = 0, correct = 0;
    for (const auto& t : tasks) {
        if (!t.machine_label.has_value()) continue;
        ++labelled;
        if (t.truth_index >= 0 && *t.machine_label == t.truth_index) ++correct;
    }
    report.machine_precision =
        labelled == 0 ? 1.0 : static_cast<double>(correct) / static_cast<double>(labelled);
    report.machine_recall =
        tasks.empty() ? 0.0 : static_cast<double>(labelled) / static_cast<double>(tasks.size());
}

}  // namespace

std::string pool_name(Pool p) {
    switch (p) {
        case Pool::Unplaced: return "unplaced";
        case Pool::Unreliable: return "W_u";
        case Pool::Reliable: return "W_r";
        case Pool::Expert: return "W_e";
    }
    return "?";
}

std::string worker_type_name(WorkerType t) {
    switch (t) {
        case WorkerType::Expert: return "expert";
        case WorkerType::Reliable: return "reliable";
        case WorkerType::Unreliable: return "unreliable";
    }
    return "?";
}

void EngineConfig::validate() const {
    if (gamma <= 0.0 || gamma >= 1.0)
        throw std::invalid_argument("EngineConfig: gamma must lie in (0,1)");
    if (!(0.0 < reliable_accuracy && reliable_accuracy < expert_accuracy &&
          expert_accuracy < 1.0))
        throw std::invalid_argument("EngineConfig: need 0 < reliable_A < expert_A < 1");
    if (annotation_ceiling < 1 || explore_min < 1 || expert_min_answers < 1 ||
        task_batch_size < 1 || em_period < 1 || em_max_iters < 1 || arrival_cap_factor < 1)
        throw std::invalid_argument("EngineConfig: counts must be >= 1");
}

std::vector<Worker> spawn_workers(int count, const WorkerRatios& ratios, int n_labels,
                                  Rng& rng, double constant_fraction) {
    if (ratios.expert_pct + ratios.reliable_pct + ratios.unreliable_pct != 100)
        throw std::invalid_argument("spawn_workers: ratios must sum to 100");
    if (count < 1) throw std::invalid_argument("spawn_workers: count must be >= 1");
    if (n_labels < 1) throw std::invalid_argument("spawn_workers: n_labels must be >= 1");

    // Largest-remainder rounding keeps the counts exact for the table splits.
    const int pct[3] = {ratios.expert_pct, ratios.reliable_pct, ratios.unreliable_pct};
    int n[3];
    int rem[3];
    int assigned = 0;
    for (int i = 0; i < 3; ++i) {
        n[i] = count * pct[i] / 100;
        rem[i] = count * pct[i] % 100;
        assigned += n[i];
    }
    while (assigned < count) {
        int best = 0;
        for (int i = 1; i < 3; ++i)
            if (rem[i] > rem[best]) best = i;
        ++n[best];
        rem[best] = -1;
        ++assigned;
    }

    std::vector<Worker> workers;
    workers.reserve(static_cast<std::size_t>(count));
    int id = 0;
    int unreliable_seen = 0;
    for (int type = 0; type < 3; ++type) {
        for (int i = 0; i < n[type]; ++i) {
            Worker w;
            w.id = id++;
            if (type == 0) {
                w.true_type = WorkerType::Expert;
                w.true_r = 1;
                w.true_a = rng.uniform(0.8, 1.0);
            } else if (type == 1) {
                w.true_type = WorkerType::Reliable;
                w.true_r = 1;
                w.true_a = rng.uniform(0.4, 0.8);
            } else {
                w.true_type = WorkerType::Unreliable;
                w.true_r = 0;
                w.true_a = rng.uniform(0.1, 0.4);
                // split between honest-but-poor and constant-answer behaviour
                if (static_cast<double>(unreliable_seen) <
                    (1.0 - constant_fraction) * static_cast<double>(n[2])) {
                    w.behavior = Behavior::Honest;
                } else {
                    w.behavior = Behavior::ConstantAnswer;
                    w.constant_label = rng.uniform_int(0, n_labels - 1);
                }
                ++unreliable_seen;
            }
            workers.push_back(w);
        }
    }
    return workers;
}

int simulate_answer(const Worker& worker, int truth_index, int n_labels, Rng& rng) {
    if (worker.behavior == Behavior::ConstantAnswer) return worker.constant_label;
    if (truth_index < 0) return rng.uniform_int(0, n_labels - 1);
    if (rng.uniform() < worker.true_a) return truth_index;
    if (n_labels == 1) return truth_index;
    int other = rng.uniform_int(0, n_labels - 2);
    return other >= truth_index ? other + 1 : other;
}

double update_worker_accuracy(Worker& worker, int n_correct, int n_total) {
    if (n_total <= 0) throw std::invalid_argument("update_worker_accuracy: no reference answers");
    if (n_correct < 0 || n_correct > n_total)
        throw std::invalid_argument("update_worker_accuracy: bad counters");
    worker.n_correct = n_correct;
    worker.n_total = n_total;
    worker.a_est = static_cast<double>(n_correct) / static_cast<double>(n_total);
    return worker.a_est;
}

Pool classify_worker(const Worker& worker, double modal_fraction, const EngineConfig& cfg) {
    if (worker.n_total < cfg.explore_min) return worker.pool;  // still exploring
    if (worker.a_est < cfg.reliable_accuracy || modal_fraction > cfg.modal_answer_threshold)
        return Pool::Unreliable;
    if (worker.a_est >= cfg.expert_accuracy && worker.n_total >= cfg.expert_min_answers)
        return Pool::Expert;
    return Pool::Reliable;
}

Vec soften_index(int label, double a_est, int n_labels) {
    if (label < 0 || label >= n_labels)
        throw std::invalid_argument("soften: label outside the label space");
    Vec out(static_cast<std::size_t>(n_labels),
            (1.0 - a_est) / static_cast<double>(n_labels));
    out[static_cast<std::size_t>(label)] = a_est;
    return out;
}

Vec soften(const Vec& one_hot, double a_est, int n_labels) {
    if (static_cast<int>(one_hot.size()) != n_labels)
        throw std::invalid_argument("soften: vector length vs label count");
    int hot = -1;
    for (std::size_t i = 0; i < one_hot.size(); ++i) {
        if (one_hot[i] == 1.0) {
            if (hot >= 0) throw std::invalid_argument("soften: more than one hot entry");
            hot = static_cast<int>(i);
        } else if (one_hot[i] != 0.0) {
            throw std::invalid_argument("soften: input must be one-hot");
        }
    }
    if (hot < 0) throw std::invalid_argument("soften: no hot entry");
    return soften_index(hot, a_est, n_labels);
}

Vec aggregate(const std::vector<Annotation>& annotations,
              const std::unordered_map<int, double>& accuracy_of, int n_labels) {
    if (annotations.empty()) throw std::invalid_argument("aggregate: no annotations");
    Vec sum(static_cast<std::size_t>(n_labels), 0.0);
    for (const auto& a : annotations) {
        auto it = accuracy_of.find(a.worker_id);
        double acc = it == accuracy_of.end() ? 0.5 : it->second;
        Vec soft = soften_index(a.label, acc, n_labels);
        for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += soft[i];
    }
    for (auto& x : sum) x /= static_cast<double>(annotations.size());
    return sum;
}

int argmax_label(const Vec& scores) {
    if (scores.empty()) throw std::invalid_argument("argmax_label: empty vector");
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i)
        if (scores[i] > scores[best]) best = i;
    return static_cast<int>(best);
}

double completion(const Vec& aggregate_vec) {
    if (aggregate_vec.empty()) throw std::invalid_argument("completion: empty vector");
    double sum = 0.0;
    for (double x : aggregate_vec) {
        if (x < 0.0) throw std::invalid_argument("completion: negative entry");
        sum += x;
    }
    if (sum <= 0.0) throw std::invalid_argument("completion: all-zero vector");
    if (aggregate_vec.size() == 1) return 1.0;  // single label: no uncertainty

    double entropy = 0.0;
    for (double x : aggregate_vec) {
        double p = x / sum;
        if (p > 0.0) entropy -= p * std::log(p);
    }
    return 1.0 - entropy / std::log(static_cast<double>(aggregate_vec.size()));
}

EmResult em_infer(const std::vector<EmTaskView>& tasks, int n_labels, const EmOptions& opts) {
    EmResult result;
    if (tasks.empty()) return result;

    for (const auto& t : tasks)
        if (t.annotations.empty())
            throw std::invalid_argument("em_infer: task " + std::to_string(t.task_id) +
                                        " has no annotations");

    std::vector<int> worker_ids;
    for (const auto& t : tasks)
        for (const auto& [w, label] : t.annotations) worker_ids.push_back(w);
    std::sort(worker_ids.begin(), worker_ids.end());
    worker_ids.erase(std::unique(worker_ids.begin(), worker_ids.end()), worker_ids.end());

    std::unordered_map<int, double> accuracy;
    for (int w : worker_ids) accuracy[w] = opts.initial_accuracy;

    auto score_workers = [&](const std::vector<std::optional<int>>& refs) {
        std::unordered_map<int, int> correct, total;
        for (std::size_t i = 0; i < tasks.size(); ++i) {
            if (!refs[i].has_value()) continue;
            for (const auto& [w, label] : tasks[i].annotations) {
                ++total[w];
                if (label == *refs[i]) ++correct[w];
            }
        }
        for (int w : worker_ids) {
            auto it = total.find(w);
            if (it != total.end() && it->second > 0)
                accuracy[w] = static_cast<double>(correct[w]) / static_cast<double>(it->second);
        }
    };

    if (opts.seed_with_machine) {
        std::vector<std::optional<int>> refs(tasks.size());
        for (std::size_t i = 0; i < tasks.size(); ++i) refs[i] = tasks[i].machine_label;
        score_workers(refs);
    }

    std::vector<int> labels(tasks.size(), -1);
    std::vector<int> prev;
    for (int iter = 0; iter < opts.max_iters; ++iter) {
        result.iterations = iter + 1;
        for (std::size_t i = 0; i < tasks.size(); ++i) {
            Vec sum(static_cast<std::size_t>(n_labels), 0.0);
            for (const auto& [w, label] : tasks[i].annotations) {
                Vec soft = soften_index(label, accuracy.at(w), n_labels);
                for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += soft[k];
            }
            labels[i] = argmax_label(sum);
        }
        if (!prev.empty() && labels == prev) {
            result.converged = true;
            break;
        }
        prev = labels;
        std::vector<std::optional<int>> refs(tasks.size());
        for (std::size_t i = 0; i < tasks.size(); ++i) refs[i] = labels[i];
        score_workers(refs);
    }

    result.labels = std::move(labels);
    result.accuracy = std::move(accuracy);
    return result;
}

// --- the online engine -------------------------------------------------------

std::vector<int> assign_batch(const Worker& worker, const std::vector<CrowdTask>& tasks,
                              const std::set<int>& answered_by_worker,
                              const EngineConfig& cfg) {
    auto not_answered = [&](const CrowdTask& t) {
        return answered_by_worker.find(t.task_id) == answered_by_worker.end();
    };
    auto open_labelled = [&](const CrowdTask& t) {
        return !t.is_unknown_pool() && !t.completed &&
               t.eligible_count() < cfg.annotation_ceiling;
    };

    std::vector<const CrowdTask*> pick;
    switch (worker.pool) {
        case Pool::Unplaced: {
            for (const auto& t : tasks)
                if (open_labelled(t) && not_answered(t)) pick.push_back(&t);
            std::stable_sort(pick.begin(), pick.end(), [](const CrowdTask* a, const CrowdTask* b) {
                if (a->eligible_count() != b->eligible_count())
                    return a->eligible_count() < b->eligible_count();
                return a->task_id < b->task_id;
            });
            // Interleave across machine labels. An explore batch drawn from a
            // single label would make an honest worker look like a
            // constant-answer spammer; the batch exists to rate the worker,
            // so its references must be diverse.
            std::map<int, std::vector<const CrowdTask*>> by_label;
            for (const auto* t : pick) by_label[t->machine_label.value_or(-1)].push_back(t);
            std::vector<const CrowdTask*> interleaved;
            for (std::size_t round = 0; interleaved.size() < pick.size(); ++round)
                for (auto& [label, group] : by_label)
                    if (round < group.size()) interleaved.push_back(group[round]);
            pick = std::move(interleaved);
            break;
        }
        case Pool::Reliable:
            for (const auto& t : tasks)
                if (open_labelled(t) && not_answered(t)) pick.push_back(&t);
            std::stable_sort(pick.begin(), pick.end(), [](const CrowdTask* a, const CrowdTask* b) {
                if (a->completion != b->completion) return a->completion < b->completion;
                return a->task_id < b->task_id;
            });
            break;
        case Pool::Unreliable:
            // Completed tasks only; the answers re-audit the worker and are
            // never aggregated.
            for (const auto& t : tasks)
                if (t.completed && (t.consensus.has_value() || t.expert_label.has_value() ||
                                    t.machine_label.has_value()) &&
                    not_answered(t))
                    pick.push_back(&t);
            std::stable_sort(pick.begin(), pick.end(), [](const CrowdTask* a, const CrowdTask* b) {
                return a->task_id < b->task_id;
            });
            break;
        case Pool::Expert:
            for (const auto& t : tasks)
                if (t.is_unknown_pool() && !t.expert_label.has_value() && !t.completed &&
                    not_answered(t))
                    pick.push_back(&t);
            std::stable_sort(pick.begin(), pick.end(), [](const CrowdTask* a, const CrowdTask* b) {
                return a->task_id < b->task_id;
            });
            // The online setting hands every arrival a batch; once the
            // unknown pool is exhausted, experts work the open labelled
            // tasks like any reliable worker.
            if (pick.empty()) {
                for (const auto& t : tasks)
                    if (open_labelled(t) && not_answered(t)) pick.push_back(&t);
                std::stable_sort(pick.begin(), pick.end(),
                                 [](const CrowdTask* a, const CrowdTask* b) {
                                     if (a->completion != b->completion)
                                         return a->completion < b->completion;
                                     return a->task_id < b->task_id;
                                 });
            }
            break;
    }

    std::vector<int> batch;
    for (const auto* t : pick) {
        if (static_cast<int>(batch.size()) == cfg.task_batch_size) break;
        batch.push_back(t->task_id);
    }
    return batch;
}

namespace {

class Engine {
public:
    Engine(std::vector<CrowdTask> tasks, std::vector<Worker> workers, const EngineConfig& cfg,
           int n_labels)
        : tasks_(std::move(tasks)),
          workers_(std::move(workers)),
          cfg_(cfg),
          n_labels_(n_labels),
          rng_(cfg.seed) {
        cfg_.validate();
        if (n_labels_ < 1) throw std::invalid_argument("run_simulation: n_labels must be >= 1");
        if (workers_.empty()) throw std::invalid_argument("run_simulation: no workers");
        for (std::size_t i = 0; i < workers_.size(); ++i)
            if (workers_[i].id != static_cast<int>(i))
                throw std::invalid_argument("run_simulation: worker ids must be 0..n-1");
        answered_.resize(workers_.size());
        given_labels_.resize(workers_.size());
        audit_correct_.assign(workers_.size(), 0);
        audit_total_.assign(workers_.size(), 0);
    }

    SimReport run() {
        const int cap = std::max(
            1, cfg_.arrival_cap_factor * static_cast<int>(tasks_.size()) / cfg_.task_batch_size);
        int arrivals = 0;
        while (open_count() > 0 && arrivals < cap) {
            Worker& w = workers_[static_cast<std::size_t>(
                rng_.uniform_int(0, static_cast<int>(workers_.size()) - 1))];
            handle_arrival(w);
            ++arrivals;
            if (arrivals % cfg_.em_period == 0) batch_update();
        }
        batch_update();  // settle labels and pools after the last arrival
        return build_report(arrivals);
    }

private:
    int open_count() const {
        int n = 0;
        for (const auto& t : tasks_)
            if (!t.completed) ++n;
        return n;
    }

    std::optional<int> final_reference(const CrowdTask& t) const {
        if (t.expert_label.has_value()) return t.expert_label;
        if (t.consensus.has_value()) return t.consensus;
        return t.machine_label;
    }

    void handle_arrival(Worker& w) {
        std::vector<int> batch =
            assign_batch(w, tasks_, answered_[static_cast<std::size_t>(w.id)], cfg_);
        for (int task_id : batch) {
            CrowdTask& task = tasks_[index_of(task_id)];
            int ans = simulate_answer(w, task.truth_index, n_labels_, rng_);
            answered_[static_cast<std::size_t>(w.id)].insert(task_id);
            given_labels_[static_cast<std::size_t>(w.id)].push_back(ans);
            ++annotations_used_;

            if (w.pool == Pool::Unreliable) {
                auto ref = final_reference(task);
                if (ref.has_value()) {
                    ++audit_total_[static_cast<std::size_t>(w.id)];
                    if (ans == *ref) ++audit_correct_[static_cast<std::size_t>(w.id)];
                }
            } else if (w.pool == Pool::Expert && task.is_unknown_pool()) {
                // One expert annotation settles an unknown-pool task.
                task.expert_label = ans;
                task.completed = true;
                task.completion = 1.0;
                task.completion_trajectory.push_back(1.0);
            } else {
                task.annotations.push_back({task.task_id, w.id, ans, annotation_seq_++});
            }
        }
    }

    // Eq-8 reference for a worker-ability update: the consensus once a task
    // is completed, the machine label while it is still open (cold start).
    // Scoring against the consensus of thin, still-open tasks would let a
    // lone annotation certify itself and inflate every estimate.
    std::optional<int> ability_reference(const CrowdTask& t) const {
        if (t.completed) {
            if (t.expert_label.has_value()) return t.expert_label;
            if (t.consensus.has_value()) return t.consensus;
        }
        return t.machine_label;
    }

    void batch_update() {
        refresh_worker_accuracy();

        // Annotations from workers currently rated unreliable drop out of
        // aggregation for good; routing then tops the task back up with
        // trusted votes (the ceiling counts aggregated annotations only).
        for (auto& t : tasks_)
            for (auto& a : t.annotations)
                if (!a.excluded &&
                    workers_[static_cast<std::size_t>(a.worker_id)].pool == Pool::Unreliable)
                    a.excluded = true;

        std::unordered_map<int, double> accuracy_of;
        for (const auto& w : workers_) accuracy_of[w.id] = w.a_est;

        for (auto& t : tasks_) {
            if (t.is_unknown_pool()) continue;
            std::vector<Annotation> eligible;
            for (const auto& a : t.annotations)
                if (!a.excluded) eligible.push_back(a);
            if (!eligible.empty()) {
                t.aggregate = aggregate(eligible, accuracy_of, n_labels_);
                t.consensus = argmax_label(t.aggregate);
                t.completion = completion(t.aggregate);
            }
            t.completion_trajectory.push_back(t.completion);
            if (!t.completed &&
                (t.completion >= cfg_.gamma ||
                 t.eligible_count() >= cfg_.annotation_ceiling))
                t.completed = true;
        }

        reclassify_workers();
    }

    void refresh_worker_accuracy() {
        for (auto& w : workers_) {
            int correct = audit_correct_[static_cast<std::size_t>(w.id)];
            int total = audit_total_[static_cast<std::size_t>(w.id)];
            for (const auto& t : tasks_) {
                std::optional<int> ref = ability_reference(t);
                if (!ref.has_value()) continue;
                for (const auto& a : t.annotations) {
                    if (a.worker_id != w.id) continue;
                    ++total;
                    if (a.label == *ref) ++correct;
                }
            }
            if (total > 0) update_worker_accuracy(w, correct, total);
        }
    }

    void reclassify_workers() {
        for (auto& w : workers_) {
            const auto& given = given_labels_[static_cast<std::size_t>(w.id)];
            double modal = 0.0;
            if (!given.empty()) {
                std::map<int, int> counts;
                for (int label : given) ++counts[label];
                int top = 0;
                for (const auto& [label, c] : counts) top = std::max(top, c);
                modal = static_cast<double>(top) / static_cast<double>(given.size());
            }
            w.pool = classify_worker(w, modal, cfg_);
        }
    }

    SimReport build_report(int arrivals) {
        SimReport report;
        int correct = 0;
        for (const auto& t : tasks_) {
            TaskReport tr;
            tr.task_id = t.task_id;
            tr.truth_index = t.truth_index;
            tr.annotation_count = t.eligible_count();
            tr.completed = t.completed;
            tr.completion_trajectory = t.completion_trajectory;
            if (t.is_unknown_pool()) {
                if (t.expert_label.has_value()) {
                    tr.final_label = t.expert_label;
                    tr.source = "expert";
                } else {
                    tr.source = "machine";  // unknown task never reached an expert
                }
            } else if (t.consensus.has_value()) {
                tr.final_label = t.consensus;
                tr.source = "consensus";
            } else {
                tr.final_label = t.machine_label;
                tr.source = "machine";
            }
            if (tr.final_label.has_value() && t.truth_index >= 0 &&
                *tr.final_label == t.truth_index)
                ++correct;
            report.tasks.push_back(std::move(tr));
        }
        for (const auto& w : workers_) {
            report.workers.push_back({w.id, worker_type_name(w.true_type), pool_name(w.pool),
                                      w.a_est, w.n_total});
        }
        report.accuracy =
            tasks_.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(tasks_.size());
        report.annotations_used = annotations_used_;
        report.arrivals = arrivals;
        report.all_completed = open_count() == 0;
        fill_machine_metrics(tasks_, report);
        return report;
    }

    std::size_t index_of(int task_id) {
        if (task_index_.empty())
            for (std::size_t i = 0; i < tasks_.size(); ++i) task_index_[tasks_[i].task_id] = i;
        return task_index_.at(task_id);
    }

    std::vector<CrowdTask> tasks_;
    std::vector<Worker> workers_;
    EngineConfig cfg_;
    int n_labels_;
    Rng rng_;
    std::vector<std::set<int>> answered_;
    std::vector<std::vector<int>> given_labels_;
    std::vector<int> audit_correct_;
    std::vector<int> audit_total_;
    std::unordered_map<int, std::size_t> task_index_;
    int annotations_used_ = 0;
    int annotation_seq_ = 0;
};

}  // namespace

SimReport run_simulation(std::vector<CrowdTask> tasks, std::vector<Worker> workers,
                         const EngineConfig& cfg, int n_labels) {
    Engine engine(std::move(tasks), std::move(workers), cfg, n_labels);
    return engine.run();
}

SimReport wmv_baseline(std::vector<CrowdTask> tasks, std::vector<Worker> workers,
                       const EngineConfig& cfg, int n_labels) {
    cfg.validate();
    if (n_labels < 1) throw std::invalid_argument("wmv_baseline: n_labels must be >= 1");
    if (workers.empty()) throw std::invalid_argument("wmv_baseline: no workers");
    for (std::size_t i = 0; i < workers.size(); ++i)
        if (workers[i].id != static_cast<int>(i))
            throw std::invalid_argument("wmv_baseline: worker ids must be 0..n-1");

    Rng rng(cfg.seed);
    std::vector<std::set<int>> answered(workers.size());
    std::unordered_map<int, std::size_t> index;
    for (std::size_t i = 0; i < tasks.size(); ++i) index[tasks[i].task_id] = i;

    const int cap = std::max(
        1, cfg.arrival_cap_factor * static_cast<int>(tasks.size()) / cfg.task_batch_size);
    int arrivals = 0;
    int annotation_seq = 0;
    auto needs_more = [&](const CrowdTask& t) {
        return static_cast<int>(t.annotations.size()) < cfg.annotation_ceiling;
    };

    while (arrivals < cap) {
        bool any_open = false;
        for (const auto& t : tasks)
            if (needs_more(t)) {
                any_open = true;
                break;
            }
        if (!any_open) break;

        Worker& w = workers[static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<int>(workers.size()) - 1))];
        std::vector<const CrowdTask*> open;
        for (const auto& t : tasks)
            if (needs_more(t) && !answered[static_cast<std::size_t>(w.id)].count(t.task_id))
                open.push_back(&t);
        std::stable_sort(open.begin(), open.end(), [](const CrowdTask* a, const CrowdTask* b) {
            if (a->annotations.size() != b->annotations.size())
                return a->annotations.size() < b->annotations.size();
            return a->task_id < b->task_id;
        });

        int take = std::min<int>(cfg.task_batch_size, static_cast<int>(open.size()));
        for (int i = 0; i < take; ++i) {
            CrowdTask& task = tasks[index.at(open[static_cast<std::size_t>(i)]->task_id)];
            int ans = simulate_answer(w, task.truth_index, n_labels, rng);
            answered[static_cast<std::size_t>(w.id)].insert(task.task_id);
            task.annotations.push_back({task.task_id, w.id, ans, annotation_seq++});
        }
        ++arrivals;
    }

    std::vector<EmTaskView> views;
    std::vector<std::size_t> view_index;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (tasks[i].annotations.empty()) continue;
        EmTaskView v;
        v.task_id = tasks[i].task_id;
        for (const auto& a : tasks[i].annotations) v.annotations.emplace_back(a.worker_id, a.label);
        views.push_back(std::move(v));
        view_index.push_back(i);
    }

    EmOptions opts;
    opts.max_iters = cfg.em_max_iters;
    opts.tol = cfg.em_tol;
    opts.initial_accuracy = 0.5;
    opts.seed_with_machine = false;
    EmResult em = em_infer(views, n_labels, opts);

    SimReport report;
    int annotations_used = 0;
    std::unordered_map<int, int> label_of;
    for (std::size_t k = 0; k < views.size(); ++k) label_of[views[k].task_id] = em.labels[k];

    int correct = 0;
    for (auto& t : tasks) {
        annotations_used += static_cast<int>(t.annotations.size());
        TaskReport tr;
        tr.task_id = t.task_id;
        tr.truth_index = t.truth_index;
        tr.annotation_count = static_cast<int>(t.annotations.size());
        tr.completed = static_cast<int>(t.annotations.size()) >= cfg.annotation_ceiling;
        auto it = label_of.find(t.task_id);
        if (it != label_of.end()) {
            tr.final_label = it->second;
            tr.source = "consensus";
        } else {
            tr.source = "machine";
        }
        if (tr.final_label.has_value() && t.truth_index >= 0 && *tr.final_label == t.truth_index)
            ++correct;
        report.tasks.push_back(std::move(tr));
    }
    for (auto& w : workers) {
        auto it = em.accuracy.find(w.id);
        if (it != em.accuracy.end()) w.a_est = it->second;
        report.workers.push_back(
            {w.id, worker_type_name(w.true_type), pool_name(w.pool), w.a_est, w.n_total});
    }
    report.accuracy =
        tasks.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(tasks.size());
    report.annotations_used = annotations_used;
    report.arrivals = arrivals;
    report.all_completed = true;
    for (const auto& t : tasks)
        if (static_cast<int>(t.annotations.size()) < cfg.annotation_ceiling)
            report.all_completed = false;
    fill_machine_metrics(tasks, report);
    return report;
}

}  // namespace oscrowd::crowd
