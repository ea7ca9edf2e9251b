#include "oscrowd/open_set.hpp"

#include <stdexcept>

#include "oscrowd/train.hpp"

namespace oscrowd::openset {

void AssignConfig::validate() const {
    if (alpha <= 0.0) throw std::invalid_argument("AssignConfig: alpha must be positive");
}

std::vector<ClassCenter> compute_centers(
    const std::map<int, std::vector<synth::Sample>>& source_by_class,
    const nn::MLPNet& source_extractor, const std::vector<pda::ClassScore>& scores) {
    std::map<int, double> score_of;
    for (const auto& s : scores) score_of[s.class_id] = s.k_c;

    std::vector<ClassCenter> centers;
    for (const auto& [class_id, samples] : source_by_class) {
        if (samples.empty())
            throw std::invalid_argument("compute_centers: class " + std::to_string(class_id) +
                                        " has no samples");
        auto it = score_of.find(class_id);
        if (it == score_of.end())
            throw std::invalid_argument("compute_centers: class " + std::to_string(class_id) +
                                        " has no score");

        Matrix features = nn::features_of(source_extractor, samples);

        ClassCenter c;
        c.class_id = class_id;
        c.k_c = it->second;
        c.center.assign(features.cols, 0.0);
        for (std::size_t r = 0; r < features.rows; ++r)
            for (std::size_t k = 0; k < features.cols; ++k) c.center[k] += features(r, k);
        for (auto& x : c.center) x /= static_cast<double>(features.rows);

        c.max_dist = 0.0;
        for (std::size_t r = 0; r < features.rows; ++r)
            c.max_dist = std::max(c.max_dist, squared_distance(features.row(r), c.center));
        centers.push_back(std::move(c));
    }
    return centers;
}

double weighted_distance(const Vec& feature, const ClassCenter& center) {
    if (center.k_c <= 0.0)
        throw std::invalid_argument("weighted_distance: k_c must be positive");
    return squared_distance(center.center, feature) / center.k_c;
}

MachineLabel assign(int task_id, const Vec& feature, const std::vector<ClassCenter>& centers,
                    const AssignConfig& cfg) {
    cfg.validate();
    if (centers.empty()) throw std::invalid_argument("assign: no class centers");

    MachineLabel result;
    result.task_id = task_id;
    bool found = false;
    double best = 0.0;
    int best_class = 0;
    for (const auto& c : centers) {
        double d = weighted_distance(feature, c);
        if (d > cfg.alpha * c.max_dist) continue;  // infeasible
        if (!found || d < best || (d == best && c.class_id < best_class)) {
            found = true;
            best = d;
            best_class = c.class_id;
        }
    }
    if (found) {
        result.label = best_class;
        result.weighted_distance = best;
    }
    return result;
}

LabelSplit label_target(const std::vector<synth::Sample>& target, const nn::MLPNet& generator,
                        const std::vector<ClassCenter>& centers, const AssignConfig& cfg) {
    cfg.validate();
    LabelSplit split;
    if (target.empty()) return split;

    Matrix features = nn::features_of(generator, target);
    for (std::size_t r = 0; r < features.rows; ++r) {
        MachineLabel label = assign(target[r].id, features.row(r), centers, cfg);
        if (label.is_unknown())
            split.unknown.push_back(std::move(label));
        else
            split.labelled.push_back(std::move(label));
    }
    return split;
}

}  // namespace oscrowd::openset
