#include "oscrowd/json_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace oscrowd::io {

using ordered_json = nlohmann::ordered_json;

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed for " + path);
}

// --- scenario ----------------------------------------------------------------

std::string scenario_to_json(const synth::Scenario& scenario) {
    ordered_json j;
    j["feature_dim"] = scenario.feature_dim;
    j["seed"] = scenario.seed;
    ordered_json protos = ordered_json::object();
    for (const auto& [class_id, proto] : scenario.prototypes)
        protos[std::to_string(class_id)] = proto;
    j["prototypes"] = std::move(protos);
    ordered_json domains = ordered_json::array();
    for (const auto& d : scenario.domains) {
        ordered_json dj;
        dj["domain_id"] = d.domain_id;
        dj["class_set"] = std::vector<int>(d.class_set.begin(), d.class_set.end());
        dj["samples_per_class"] = d.samples_per_class;
        dj["shift"] = d.shift;
        dj["scale"] = d.scale;
        dj["role"] = d.role == synth::DomainRole::Source ? "source" : "target";
        domains.push_back(std::move(dj));
    }
    j["domains"] = std::move(domains);
    return j.dump(2) + "\n";
}

synth::Scenario scenario_from_json(const std::string& text) {
    ordered_json j = ordered_json::parse(text);
    synth::Scenario s;
    s.feature_dim = j.at("feature_dim").get<int>();
    s.seed = j.at("seed").get<uint64_t>();
    for (const auto& [key, value] : j.at("prototypes").items())
        s.prototypes[std::stoi(key)] = value.get<Vec>();
    for (const auto& dj : j.at("domains")) {
        synth::DomainSpec d;
        d.domain_id = dj.at("domain_id").get<int>();
        for (int c : dj.at("class_set").get<std::vector<int>>()) d.class_set.insert(c);
        d.samples_per_class = dj.at("samples_per_class").get<int>();
        d.shift = dj.at("shift").get<Vec>();
        d.scale = dj.at("scale").get<double>();
        std::string role = dj.at("role").get<std::string>();
        if (role == "source")
            d.role = synth::DomainRole::Source;
        else if (role == "target")
            d.role = synth::DomainRole::Target;
        else
            throw std::invalid_argument("scenario_from_json: bad role " + role);
        s.domains.push_back(std::move(d));
    }
    s.validate();
    return s;
}

// --- networks ----------------------------------------------------------------

namespace {

ordered_json net_to_json_obj(const nn::MLPNet& net) {
    ordered_json j;
    j["layer_sizes"] = net.layer_sizes;
    j["hidden"] = net.hidden == nn::Activation::Tanh ? "tanh" : "relu";
    switch (net.head) {
        case nn::Head::Linear: j["head"] = "linear"; break;
        case nn::Head::Sigmoid: j["head"] = "sigmoid"; break;
        case nn::Head::Softmax: j["head"] = "softmax"; break;
    }
    ordered_json weights = ordered_json::array();
    for (const auto& w : net.weights) weights.push_back(w.data);  // row-major
    j["weights"] = std::move(weights);
    ordered_json biases = ordered_json::array();
    for (const auto& b : net.biases) biases.push_back(b);
    j["biases"] = std::move(biases);
    return j;
}

nn::MLPNet net_from_json_obj(const ordered_json& j) {
    auto sizes = j.at("layer_sizes").get<std::vector<int>>();
    std::string hidden = j.at("hidden").get<std::string>();
    std::string head = j.at("head").get<std::string>();
    nn::Activation act =
        hidden == "tanh" ? nn::Activation::Tanh : nn::Activation::Relu;
    nn::Head h;
    if (head == "linear")
        h = nn::Head::Linear;
    else if (head == "sigmoid")
        h = nn::Head::Sigmoid;
    else if (head == "softmax")
        h = nn::Head::Softmax;
    else
        throw std::invalid_argument("net_from_json: bad head " + head);

    nn::MLPNet net = nn::MLPNet::make(sizes, act, h);
    const auto& weights = j.at("weights");
    const auto& biases = j.at("biases");
    if (weights.size() != net.weights.size() || biases.size() != net.biases.size())
        throw std::invalid_argument("net_from_json: layer count mismatch");
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        auto flat = weights[l].get<std::vector<double>>();
        if (flat.size() != net.weights[l].data.size())
            throw std::invalid_argument("net_from_json: weight size mismatch");
        net.weights[l].data = std::move(flat);
        auto b = biases[l].get<std::vector<double>>();
        if (b.size() != net.biases[l].size())
            throw std::invalid_argument("net_from_json: bias size mismatch");
        net.biases[l] = std::move(b);
    }
    return net;
}

ordered_json scores_to_json(const std::vector<pda::ClassScore>& scores) {
    ordered_json out = ordered_json::array();
    for (const auto& s : scores) {
        ordered_json sj;
        sj["class_id"] = s.class_id;
        sj["k_c"] = s.k_c;
        sj["round"] = s.round;
        out.push_back(std::move(sj));
    }
    return out;
}

std::vector<pda::ClassScore> scores_from_json(const ordered_json& j) {
    std::vector<pda::ClassScore> out;
    for (const auto& sj : j)
        out.push_back({sj.at("class_id").get<int>(), sj.at("k_c").get<double>(),
                       sj.at("round").get<int>()});
    return out;
}

}  // namespace

std::string net_to_json(const nn::MLPNet& net) { return net_to_json_obj(net).dump(2) + "\n"; }

nn::MLPNet net_from_json(const std::string& text) {
    return net_from_json_obj(ordered_json::parse(text));
}

// --- adaptation result ---------------------------------------------------------

std::string pda_to_json(const synth::Scenario& scenario, const pda::PdaResult& result) {
    ordered_json j;
    j["scenario"] = ordered_json::parse(scenario_to_json(scenario));
    j["surviving_domains"] = result.surviving_domains;
    j["surviving_classes"] = result.surviving_classes;
    j["shared_classes"] = result.shared_classes;

    // Score table in the two-round layout; missing round-2 entries are null.
    std::set<int> all_classes;
    for (const auto& s : result.round1) all_classes.insert(s.class_id);
    for (const auto& s : result.round2) all_classes.insert(s.class_id);
    ordered_json table = ordered_json::array();
    for (int c : all_classes) {
        ordered_json row;
        row["class_id"] = c;
        auto r1 = result.score(1, c);
        auto r2 = result.score(2, c);
        row["k_c_round1"] = r1.has_value() ? ordered_json(*r1) : ordered_json(nullptr);
        row["k_c_round2"] = r2.has_value() ? ordered_json(*r2) : ordered_json(nullptr);
        table.push_back(std::move(row));
    }
    j["score_table"] = std::move(table);
    j["round1"] = scores_to_json(result.round1);
    j["round2"] = scores_to_json(result.round2);
    j["source_extractor"] = net_to_json_obj(result.source_extractor);
    j["generator"] = net_to_json_obj(result.generator);
    j["discriminator"] = net_to_json_obj(result.discriminator);
    j["classifier"] = net_to_json_obj(result.classifier);
    return j.dump(2) + "\n";
}

PdaBundle pda_from_json(const std::string& text) {
    ordered_json j = ordered_json::parse(text);
    PdaBundle bundle;
    bundle.scenario = scenario_from_json(j.at("scenario").dump());
    bundle.result.surviving_domains = j.at("surviving_domains").get<std::vector<int>>();
    bundle.result.surviving_classes = j.at("surviving_classes").get<std::vector<int>>();
    bundle.result.shared_classes = j.at("shared_classes").get<std::vector<int>>();
    bundle.result.round1 = scores_from_json(j.at("round1"));
    bundle.result.round2 = scores_from_json(j.at("round2"));
    bundle.result.source_extractor = net_from_json_obj(j.at("source_extractor"));
    bundle.result.generator = net_from_json_obj(j.at("generator"));
    bundle.result.discriminator = net_from_json_obj(j.at("discriminator"));
    bundle.result.classifier = net_from_json_obj(j.at("classifier"));
    return bundle;
}

// --- machine labels ------------------------------------------------------------

namespace {

std::string format_double(double x) {
    ordered_json j = x;
    return j.dump();
}

}  // namespace

std::string machine_labels_csv(const openset::LabelSplit& split) {
    std::vector<const openset::MachineLabel*> all;
    for (const auto& m : split.labelled) all.push_back(&m);
    for (const auto& m : split.unknown) all.push_back(&m);
    std::sort(all.begin(), all.end(), [](const openset::MachineLabel* a,
                                         const openset::MachineLabel* b) {
        return a->task_id < b->task_id;
    });

    std::string out = "task_id,label,weighted_distance\n";
    for (const auto* m : all) {
        out += std::to_string(m->task_id);
        out += ',';
        out += m->label.has_value() ? std::to_string(*m->label) : std::string("unknown");
        out += ',';
        if (m->weighted_distance.has_value()) out += format_double(*m->weighted_distance);
        out += '\n';
    }
    return out;
}

// --- task sets -------------------------------------------------------------------

std::string task_set_to_json(const pipeline::TaskSet& set) {
    ordered_json j;
    j["label_space"] = set.label_space;
    ordered_json tasks = ordered_json::array();
    for (const auto& t : set.tasks) {
        ordered_json tj;
        tj["task_id"] = t.task_id;
        tj["truth"] = t.truth_class;
        tj["machine_label"] =
            t.machine_class.has_value() ? ordered_json(*t.machine_class) : ordered_json(nullptr);
        tasks.push_back(std::move(tj));
    }
    j["tasks"] = std::move(tasks);
    return j.dump(2) + "\n";
}

pipeline::TaskSet task_set_from_json(const std::string& text) {
    ordered_json j = ordered_json::parse(text);
    pipeline::TaskSet set;
    set.label_space = j.at("label_space").get<std::vector<int>>();
    for (const auto& tj : j.at("tasks")) {
        pipeline::TaskEntry t;
        t.task_id = tj.at("task_id").get<int>();
        t.truth_class = tj.at("truth").get<int>();
        if (!tj.at("machine_label").is_null()) t.machine_class = tj.at("machine_label").get<int>();
        set.tasks.push_back(t);
    }
    return set;
}

// --- reports ---------------------------------------------------------------------

std::string sim_report_to_json(const crowd::SimReport& report,
                               const std::vector<int>& label_space) {
    auto to_class = [&](const std::optional<int>& idx) -> ordered_json {
        if (!idx.has_value() || *idx < 0 || *idx >= static_cast<int>(label_space.size()))
            return nullptr;
        return label_space[static_cast<std::size_t>(*idx)];
    };

    ordered_json j;
    j["label_space"] = label_space;
    j["summary"] = {{"accuracy", report.accuracy},
                    {"annotations_used", report.annotations_used},
                    {"arrivals", report.arrivals},
                    {"all_completed", report.all_completed},
                    {"machine_precision", report.machine_precision},
                    {"machine_recall", report.machine_recall}};
    ordered_json tasks = ordered_json::array();
    for (const auto& t : report.tasks) {
        ordered_json tj;
        tj["task_id"] = t.task_id;
        tj["final_label"] = to_class(t.final_label);
        tj["truth"] = to_class(t.truth_index >= 0 ? std::optional<int>(t.truth_index)
                                                  : std::optional<int>());
        tj["source"] = t.source;
        tj["annotation_count"] = t.annotation_count;
        tj["completed"] = t.completed;
        tj["completion_trajectory"] = t.completion_trajectory;
        tasks.push_back(std::move(tj));
    }
    j["tasks"] = std::move(tasks);
    ordered_json workers = ordered_json::array();
    for (const auto& w : report.workers) {
        ordered_json wj;
        wj["worker_id"] = w.worker_id;
        wj["true_type"] = w.true_type;
        wj["final_pool"] = w.final_pool;
        wj["a_est"] = w.a_est;
        wj["n_total"] = w.n_total;
        workers.push_back(std::move(wj));
    }
    j["workers"] = std::move(workers);
    return j.dump(2) + "\n";
}

std::string run_report_to_json(const pipeline::RunReport& report) {
    ordered_json j;
    j["artifacts"] = {{"scenario", report.scenario_file},
                      {"pda", report.pda_file},
                      {"machine_labels", report.labels_file},
                      {"tasks", report.tasks_file},
                      {"simulation", report.simulation_file}};
    j["summary"] = {{"final_accuracy", report.final_accuracy},
                    {"machine_precision", report.machine_precision},
                    {"machine_recall", report.machine_recall},
                    {"pr_product", report.pr_product},
                    {"annotations_used", report.annotations_used},
                    {"n_tasks", report.n_tasks},
                    {"n_labelled", report.n_labelled},
                    {"n_unknown", report.n_unknown},
                    {"all_completed", report.all_completed}};
    return j.dump(2) + "\n";
}

std::string ablation_table_csv(const std::vector<pipeline::AblationRow>& rows) {
    std::string out = "alpha,precision,recall,pr_product\n";
    for (const auto& r : rows) {
        out += format_double(r.alpha);
        out += ',';
        out += format_double(r.precision);
        out += ',';
        out += format_double(r.recall);
        out += ',';
        out += format_double(r.pr_product);
        out += '\n';
    }
    return out;
}

std::string ablation_table_json(const std::vector<pipeline::AblationRow>& rows) {
    ordered_json j = ordered_json::array();
    for (const auto& r : rows) {
        ordered_json rj;
        rj["alpha"] = r.alpha;
        rj["precision"] = r.precision;
        rj["recall"] = r.recall;
        rj["pr_product"] = r.pr_product;
        j.push_back(std::move(rj));
    }
    return j.dump(2) + "\n";
}

std::string compare_to_json(const pipeline::CompareResult& result) {
    ordered_json j;
    j["oscrowd"] = {{"accuracy", result.oscrowd_accuracy},
                    {"annotations", result.oscrowd_annotations}};
    j["wmv"] = {{"accuracy", result.wmv_accuracy}, {"annotations", result.wmv_annotations}};
    return j.dump(2) + "\n";
}

}  // namespace oscrowd::io
