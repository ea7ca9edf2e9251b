// oscrowd CLI: open-set crowdsourcing pipeline driver.
//
// Subcommands mirror the pipeline stages (generate / adapt / assign /
// simulate) plus the end-to-end drivers (run / ablate / compare). A JSON
// config file can preset any option; explicit flags win.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "oscrowd/json_io.hpp"
#include "oscrowd/pipeline.hpp"

namespace {

namespace fs = std::filesystem;
using oscrowd::io::read_text_file;
using oscrowd::io::write_text_file;
using json = nlohmann::json;

struct CliOptions {
    oscrowd::pipeline::PipelineConfig pipeline;
    std::vector<double> alphas = {0.4, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6};
};

void apply_config_file(CliOptions& opts, const std::string& path) {
    json cfg = json::parse(read_text_file(path));
    auto& p = opts.pipeline;
    if (cfg.contains("style")) p.style = cfg["style"].get<std::string>();
    if (cfg.contains("seed")) p.seed = cfg["seed"].get<uint64_t>();
    if (cfg.contains("scenario")) p.scenario_path = cfg["scenario"].get<std::string>();
    if (cfg.contains("tau")) p.pda.tau = cfg["tau"].get<double>();
    if (cfg.contains("alpha")) p.assign.alpha = cfg["alpha"].get<double>();
    if (cfg.contains("gamma")) p.engine.gamma = cfg["gamma"].get<double>();
    if (cfg.contains("workers")) p.worker_count = cfg["workers"].get<int>();
    if (cfg.contains("out_dir")) p.out_dir = cfg["out_dir"].get<std::string>();
    if (cfg.contains("ratios")) {
        auto r = cfg["ratios"].get<std::vector<int>>();
        if (r.size() != 3) throw std::invalid_argument("config: ratios must have 3 entries");
        p.ratios = {r[0], r[1], r[2]};
    }
    if (cfg.contains("train")) {
        const auto& t = cfg["train"];
        auto apply = [&](oscrowd::nn::TrainConfig& tc) {
            if (t.contains("learning_rate")) tc.learning_rate = t["learning_rate"].get<double>();
            if (t.contains("batch_size")) tc.batch_size = t["batch_size"].get<int>();
            if (t.contains("disc_steps")) tc.disc_steps = t["disc_steps"].get<int>();
        };
        apply(p.pda.source_train);
        apply(p.pda.adv_train);
        if (t.contains("source_epochs"))
            p.pda.source_train.max_epochs = t["source_epochs"].get<int>();
        if (t.contains("adv_epochs")) p.pda.adv_train.max_epochs = t["adv_epochs"].get<int>();
    }
    if (cfg.contains("alphas")) opts.alphas = cfg["alphas"].get<std::vector<double>>();
}

oscrowd::crowd::WorkerRatios parse_ratios(const std::string& text) {
    int e = 0, r = 0, u = 0;
    if (std::sscanf(text.c_str(), "%d,%d,%d", &e, &r, &u) != 3)
        throw std::invalid_argument("ratios must look like 20,60,20");
    return {e, r, u};
}

int cmd_generate(const std::string& style, uint64_t seed, const std::string& out) {
    auto scenario = oscrowd::synth::make_default_scenario(oscrowd::synth::parse_style(style), seed);
    write_text_file(out, oscrowd::io::scenario_to_json(scenario));
    std::cout << "wrote " << out << "\n";
    return 0;
}

int cmd_adapt(const CliOptions& opts, const std::string& scenario_path, const std::string& out,
              std::optional<uint64_t> seed) {
    auto scenario = oscrowd::io::scenario_from_json(read_text_file(scenario_path));
    oscrowd::pda::PdaConfig cfg = opts.pipeline.pda;
    uint64_t base = seed.value_or(scenario.seed);
    cfg.source_train.seed = base ^ 0xA11CEull;
    cfg.adv_train.seed = base ^ 0xB0B5ull;
    auto result = oscrowd::pda::run_pda(scenario, cfg);
    write_text_file(out, oscrowd::io::pda_to_json(scenario, result));

    std::cout << "surviving domains:";
    for (int d : result.surviving_domains) std::cout << " " << d;
    std::cout << "\nround-2 scores:\n";
    for (const auto& s : result.round2)
        std::printf("  class %d: k_c = %.3f\n", s.class_id, s.k_c);
    std::cout << "wrote " << out << "\n";
    return 0;
}

int cmd_assign(const CliOptions& opts, const std::string& pda_path, const std::string& out,
               const std::string& tasks_out) {
    auto bundle = oscrowd::io::pda_from_json(read_text_file(pda_path));
    auto centers = oscrowd::pipeline::build_centers(bundle.scenario, bundle.result);
    auto split = oscrowd::openset::label_target(oscrowd::synth::target_samples(bundle.scenario),
                                                bundle.result.generator, centers,
                                                opts.pipeline.assign);
    write_text_file(out, oscrowd::io::machine_labels_csv(split));
    auto metrics = oscrowd::pipeline::machine_metrics(bundle.scenario, split);
    std::printf("labelled %d / %d tasks (p=%.3f, r=%.3f)\n", metrics.n_labelled,
                metrics.n_labelled + metrics.n_unknown, metrics.precision, metrics.recall);
    if (!tasks_out.empty()) {
        auto task_set =
            oscrowd::pipeline::build_task_set(bundle.scenario, bundle.result, split);
        write_text_file(tasks_out, oscrowd::io::task_set_to_json(task_set));
        std::cout << "wrote " << tasks_out << "\n";
    }
    std::cout << "wrote " << out << "\n";
    return 0;
}

int cmd_simulate(const CliOptions& opts, const std::string& tasks_path, uint64_t seed,
                 const std::string& out) {
    auto task_set = oscrowd::io::task_set_from_json(read_text_file(tasks_path));
    int n_labels = static_cast<int>(task_set.label_space.size());

    oscrowd::crowd::EngineConfig engine_cfg = opts.pipeline.engine;
    engine_cfg.seed = seed ^ 0xC0FFEEull;
    oscrowd::Rng worker_rng(seed ^ 0x30Bull);
    auto workers = oscrowd::crowd::spawn_workers(opts.pipeline.worker_count, opts.pipeline.ratios,
                                                 n_labels, worker_rng,
                                                 engine_cfg.constant_answer_fraction);
    auto report = oscrowd::crowd::run_simulation(oscrowd::pipeline::to_crowd_tasks(task_set),
                                                 std::move(workers), engine_cfg, n_labels);
    write_text_file(out, oscrowd::io::sim_report_to_json(report, task_set.label_space));
    std::printf("accuracy %.3f over %zu tasks (%d annotations, %d arrivals)\n", report.accuracy,
                report.tasks.size(), report.annotations_used, report.arrivals);
    std::cout << "wrote " << out << "\n";
    return 0;
}

int cmd_run(const CliOptions& opts) {
    auto report = oscrowd::pipeline::run_pipeline(opts.pipeline);
    std::printf("accuracy %.3f  machine p=%.3f r=%.3f p*r=%.3f  annotations %d\n",
                report.final_accuracy, report.machine_precision, report.machine_recall,
                report.pr_product, report.annotations_used);
    std::cout << "artifacts in " << opts.pipeline.out_dir << "\n";
    return 0;
}

int cmd_ablate(const CliOptions& opts, const std::string& out) {
    auto rows = oscrowd::pipeline::ablate_alpha(opts.pipeline, opts.alphas);
    write_text_file(out, oscrowd::io::ablation_table_csv(rows));
    fs::path json_path = fs::path(out).replace_extension(".json");
    write_text_file(json_path.string(), oscrowd::io::ablation_table_json(rows));
    std::printf("%8s %10s %10s %10s\n", "alpha", "p", "r", "p*r");
    for (const auto& r : rows)
        std::printf("%8.2f %10.3f %10.3f %10.3f\n", r.alpha, r.precision, r.recall, r.pr_product);
    std::cout << "wrote " << out << " and " << json_path.string() << "\n";
    return 0;
}

int cmd_compare(const CliOptions& opts, const std::string& out) {
    auto result = oscrowd::pipeline::compare_baseline(opts.pipeline);
    std::printf("oscrowd accuracy %.3f (%d annotations)\n", result.oscrowd_accuracy,
                result.oscrowd_annotations);
    std::printf("wmv     accuracy %.3f (%d annotations)\n", result.wmv_accuracy,
                result.wmv_annotations);
    if (!out.empty()) {
        write_text_file(out, oscrowd::io::compare_to_json(result));
        std::cout << "wrote " << out << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"open-set crowdsourcing engine"};
    app.require_subcommand(1);

    CliOptions opts;
    std::string config_path;
    std::string ratios_text;
    app.add_option("--config", config_path, "JSON config file applied before flags")
        ->check(CLI::ExistingFile);

    // generate
    auto* generate = app.add_subcommand("generate", "write a synthetic scenario");
    std::string gen_style = "o31-like", gen_out = "scenario.json";
    uint64_t gen_seed = 1;
    generate->add_option("--style", gen_style, "o31-like | oh-like");
    generate->add_option("--seed", gen_seed, "scenario seed")->required();
    generate->add_option("--out", gen_out, "output path");

    // adapt
    auto* adapt = app.add_subcommand("adapt", "two-round partial domain adaptation");
    std::string adapt_scenario, adapt_out = "pda.json";
    std::optional<uint64_t> adapt_seed;
    double adapt_tau = -1.0;
    adapt->add_option("--scenario", adapt_scenario, "scenario JSON")->required();
    adapt->add_option("--out", adapt_out, "output path");
    adapt->add_option("--tau", adapt_tau, "relevance threshold (default 0.5)");
    adapt->add_option("--seed", adapt_seed, "training seed (default: scenario seed)");

    // assign
    auto* assign = app.add_subcommand("assign", "open-set machine labelling");
    std::string assign_pda, assign_out = "machine_labels.csv", assign_tasks_out;
    double assign_alpha = -1.0;
    assign->add_option("--pda", assign_pda, "adaptation result JSON")->required();
    assign->add_option("--alpha", assign_alpha, "relaxation coefficient (default 1.2)");
    assign->add_option("--out", assign_out, "machine-label CSV path");
    assign->add_option("--tasks-out", assign_tasks_out, "also write a crowd task set JSON");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "online crowdsourcing simulation");
    std::string sim_tasks, sim_out = "simulation.json";
    uint64_t sim_seed = 0;
    int sim_workers = -1;
    double sim_gamma = -1.0;
    simulate->add_option("--tasks", sim_tasks, "task set JSON")->required();
    simulate->add_option("--ratios", ratios_text, "expert,reliable,unreliable percentages");
    simulate->add_option("--workers", sim_workers, "worker count (default 30)");
    simulate->add_option("--gamma", sim_gamma, "completion threshold (default 0.75)");
    simulate->add_option("--seed", sim_seed, "simulation seed")->required();
    simulate->add_option("--out", sim_out, "report path");

    // run
    auto* run = app.add_subcommand("run", "full pipeline: generate/adapt/assign/simulate");
    std::string run_style, run_out_dir, run_scenario;
    uint64_t run_seed = 0;
    int run_workers = -1;
    double run_alpha = -1.0, run_gamma = -1.0, run_tau = -1.0;
    run->add_option("--style", run_style, "o31-like | oh-like");
    run->add_option("--scenario", run_scenario, "existing scenario JSON instead of generating");
    run->add_option("--seed", run_seed, "pipeline seed")->required();
    run->add_option("--alpha", run_alpha, "relaxation coefficient");
    run->add_option("--gamma", run_gamma, "completion threshold");
    run->add_option("--tau", run_tau, "relevance threshold");
    run->add_option("--ratios", ratios_text, "worker ratios");
    run->add_option("--workers", run_workers, "worker count");
    run->add_option("--out-dir", run_out_dir, "artifact directory");

    // ablate
    auto* ablate = app.add_subcommand("ablate", "alpha sweep of machine-label precision/recall");
    std::string ablate_out = "ablation.csv", ablate_style;
    std::vector<double> ablate_alphas;
    uint64_t ablate_seed = 0;
    ablate->add_option("--style", ablate_style, "o31-like | oh-like");
    ablate->add_option("--seed", ablate_seed, "pipeline seed")->required();
    ablate->add_option("--alphas", ablate_alphas, "alpha values")->delimiter(',');
    ablate->add_option("--out", ablate_out, "CSV path (a .json twin is written too)");

    // compare
    auto* compare = app.add_subcommand("compare", "staged engine vs weighted-majority baseline");
    std::string compare_out, compare_style;
    uint64_t compare_seed = 0;
    int compare_workers = -1;
    compare->add_option("--style", compare_style, "o31-like | oh-like");
    compare->add_option("--seed", compare_seed, "pipeline seed")->required();
    compare->add_option("--ratios", ratios_text, "worker ratios");
    compare->add_option("--workers", compare_workers, "worker count");
    compare->add_option("--out", compare_out, "write the comparison JSON here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (!config_path.empty()) apply_config_file(opts, config_path);
        if (!ratios_text.empty()) opts.pipeline.ratios = parse_ratios(ratios_text);

        if (generate->parsed()) return cmd_generate(gen_style, gen_seed, gen_out);

        if (adapt->parsed()) {
            if (adapt_tau > 0.0) opts.pipeline.pda.tau = adapt_tau;
            return cmd_adapt(opts, adapt_scenario, adapt_out, adapt_seed);
        }
        if (assign->parsed()) {
            if (assign_alpha > 0.0) opts.pipeline.assign.alpha = assign_alpha;
            return cmd_assign(opts, assign_pda, assign_out, assign_tasks_out);
        }
        if (simulate->parsed()) {
            if (sim_workers > 0) opts.pipeline.worker_count = sim_workers;
            if (sim_gamma > 0.0) opts.pipeline.engine.gamma = sim_gamma;
            return cmd_simulate(opts, sim_tasks, sim_seed, sim_out);
        }
        if (run->parsed()) {
            if (!run_style.empty()) opts.pipeline.style = run_style;
            if (!run_scenario.empty()) opts.pipeline.scenario_path = run_scenario;
            opts.pipeline.seed = run_seed;
            if (run_alpha > 0.0) opts.pipeline.assign.alpha = run_alpha;
            if (run_gamma > 0.0) opts.pipeline.engine.gamma = run_gamma;
            if (run_tau > 0.0) opts.pipeline.pda.tau = run_tau;
            if (run_workers > 0) opts.pipeline.worker_count = run_workers;
            if (!run_out_dir.empty()) opts.pipeline.out_dir = run_out_dir;
            return cmd_run(opts);
        }
        if (ablate->parsed()) {
            if (!ablate_style.empty()) opts.pipeline.style = ablate_style;
            opts.pipeline.seed = ablate_seed;
            if (!ablate_alphas.empty()) opts.alphas = ablate_alphas;
            return cmd_ablate(opts, ablate_out);
        }
        if (compare->parsed()) {
            if (!compare_style.empty()) opts.pipeline.style = compare_style;
            opts.pipeline.seed = compare_seed;
            if (compare_workers > 0) opts.pipeline.worker_count = compare_workers;
            return cmd_compare(opts, compare_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
