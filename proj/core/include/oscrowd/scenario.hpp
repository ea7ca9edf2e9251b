#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "oscrowd/matrix.hpp"

namespace oscrowd::synth {

enum class DomainRole { Source, Target };

// One data point. true_class is visible to evaluation code only; inference
// paths must not read it.
struct Sample {
    int id = 0;
    Vec features;
    int true_class = 0;
    int domain_id = 0;
};

struct DomainSpec {
    int domain_id = 0;
    std::set<int> class_set;
    int samples_per_class = 0;
    Vec shift;            // additive mean offset applied on top of the prototype
    double scale = 1.0;   // isotropic standard deviation multiplier
    DomainRole role = DomainRole::Source;
};

enum class ScenarioStyle { O31Like, OHLike };

struct Scenario {
    int feature_dim = 0;
    std::map<int, Vec> prototypes;  // class id -> mean vector
    std::vector<DomainSpec> domains;
    uint64_t seed = 0;

    const DomainSpec& target_domain() const;
    std::vector<const DomainSpec*> source_domains() const;
    std::set<int> source_class_union() const;
    std::set<int> target_class_set() const;
    void validate() const;
};

ScenarioStyle parse_style(const std::string& name);
std::string style_name(ScenarioStyle style);

// Default synthetic compositions. o31-like: four source domains over two
// shift profiles, {7,8} sharing nothing with the target. oh-like: four
// source domains over three shift profiles. Prototypes are regenerated
// until every pair is at least 4 cluster radii apart.
Scenario make_default_scenario(ScenarioStyle style, uint64_t seed);

// Draw samples_per_class points per class from an isotropic normal around
// prototype(c) + shift with deviation scale. Sample ids are unique within
// the scenario (domain-indexed blocks).
std::vector<Sample> sample_domain(const DomainSpec& spec, const Scenario& scenario);

std::vector<Sample> all_source_samples(const Scenario& scenario);
std::vector<Sample> target_samples(const Scenario& scenario);

std::map<int, std::vector<Sample>> group_by_class(const std::vector<Sample>& samples);

}  // namespace oscrowd::synth
