#pragma once

#include <map>
#include <optional>
#include <vector>

#include "oscrowd/adapt.hpp"
#include "oscrowd/net.hpp"
#include "oscrowd/scenario.hpp"

namespace oscrowd::openset {

struct ClassCenter {
    int class_id = 0;
    Vec center;            // mean feature vector of the class's source samples
    double max_dist = 0.0; // max squared distance of the class's own samples to the center
    double k_c = 0.0;      // existence probability from the adaptation stage
};

struct MachineLabel {
    int task_id = 0;
    std::optional<int> label;              // nullopt = unknown
    std::optional<double> weighted_distance;

    bool is_unknown() const { return !label.has_value(); }
};

struct AssignConfig {
    double alpha = 1.2;  // relaxation coefficient widening the feasible region

    void validate() const;
};

// Centers for the candidate classes (one score entry per class; classes
// below the relevance threshold must be filtered out upstream).
std::vector<ClassCenter> compute_centers(
    const std::map<int, std::vector<synth::Sample>>& source_by_class,
    const nn::MLPNet& source_extractor, const std::vector<pda::ClassScore>& scores);

// (1 / k_c) * ||center - x||^2
double weighted_distance(const Vec& feature, const ClassCenter& center);

// Feasible classes satisfy weighted_distance <= alpha * max_dist; the
// closest feasible class wins (ties to the lowest class id), otherwise the
// sample is unknown.
MachineLabel assign(int task_id, const Vec& feature, const std::vector<ClassCenter>& centers,
                    const AssignConfig& cfg);

struct LabelSplit {
    std::vector<MachineLabel> labelled;  // D_l
    std::vector<MachineLabel> unknown;   // D_u

    std::size_t total() const { return labelled.size() + unknown.size(); }
};

// Featurise target tasks with the adapted generator and split them into
// machine-labelled and unknown pools.
LabelSplit label_target(const std::vector<synth::Sample>& target, const nn::MLPNet& generator,
                        const std::vector<ClassCenter>& centers, const AssignConfig& cfg);

}  // namespace oscrowd::openset
