#include "oscrowd/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "oscrowd/rng.hpp"

namespace oscrowd::synth {

const DomainSpec& Scenario::target_domain() const {
    for (const auto& d : domains)
        if (d.role == DomainRole::Target) return d;
    throw std::runtime_error("scenario has no target domain");
}

std::vector<const DomainSpec*> Scenario::source_domains() const {
    std::vector<const DomainSpec*> out;
    for (const auto& d : domains)
        if (d.role == DomainRole::Source) out.push_back(&d);
    return out;
}

std::set<int> Scenario::source_class_union() const {
    std::set<int> out;
    for (const auto& d : domains)
        if (d.role == DomainRole::Source)
            out.insert(d.class_set.begin(), d.class_set.end());
    return out;
}

std::set<int> Scenario::target_class_set() const { return target_domain().class_set; }

void Scenario::validate() const {
    if (feature_dim <= 0) throw std::invalid_argument("scenario: feature_dim must be positive");
    int n_targets = 0;
    for (const auto& d : domains) {
        if (d.samples_per_class < 1)
            throw std::invalid_argument("scenario: samples_per_class must be >= 1");
        if (d.scale <= 0.0) throw std::invalid_argument("scenario: scale must be positive");
        if (d.shift.size() != static_cast<std::size_t>(feature_dim))
            throw std::invalid_argument("scenario: shift dimension mismatch");
        if (d.role == DomainRole::Target) ++n_targets;
        for (int c : d.class_set)
            if (!prototypes.count(c))
                throw std::invalid_argument("scenario: class " + std::to_string(c) +
                                            " has no prototype");
    }
    if (n_targets != 1) throw std::invalid_argument("scenario: exactly one target domain required");

    const auto src = source_class_union();
    for (int c : target_class_set())
        if (!src.count(c))
            throw std::invalid_argument("scenario: target class " + std::to_string(c) +
                                        " not covered by any source domain");
}

ScenarioStyle parse_style(const std::string& name) {
    if (name == "o31-like") return ScenarioStyle::O31Like;
    if (name == "oh-like") return ScenarioStyle::OHLike;
    throw std::invalid_argument("unknown scenario style: " + name);
}

std::string style_name(ScenarioStyle style) {
    return style == ScenarioStyle::O31Like ? "o31-like" : "oh-like";
}

namespace {

constexpr int kFeatureDim = 10;
constexpr int kSourceSamplesPerClass = 30;
constexpr int kTargetSamplesPerClass = 100;
constexpr double kPrototypeDrawScale = 5.0;
constexpr double kSeparationFactor = 4.0;

Vec draw_vector(Rng& rng, int dim, double scale) {
    Vec v(static_cast<std::size_t>(dim));
    for (auto& x : v) x = rng.normal(0.0, scale);
    return v;
}

// Minimum pairwise prototype distance must be at least kSeparationFactor
// times the largest cluster radius (scale * sqrt(d)). Violating prototypes
// are redrawn, so the invariant holds by construction.
std::map<int, Vec> draw_prototypes(Rng& rng, const std::vector<int>& classes, int dim,
                                   double max_scale) {
    const double min_dist = kSeparationFactor * max_scale * std::sqrt(static_cast<double>(dim));
    std::map<int, Vec> protos;
    for (int c : classes) {
        for (int attempt = 0; attempt < 1000; ++attempt) {
            Vec candidate = draw_vector(rng, dim, kPrototypeDrawScale);
            bool ok = true;
            for (const auto& [other, p] : protos) {
                if (std::sqrt(squared_distance(candidate, p)) < min_dist) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                protos[c] = std::move(candidate);
                break;
            }
        }
        if (!protos.count(c))
            throw std::runtime_error("prototype placement failed; separation too strict");
    }
    return protos;
}

struct ShiftProfile {
    Vec shift;
    double scale;
};

}  // namespace

Scenario make_default_scenario(ScenarioStyle style, uint64_t seed) {
    Scenario s;
    s.feature_dim = kFeatureDim;
    s.seed = seed;

    Rng rng = Rng(seed).fork(0xD0);

    // Source domains grouped by shift profile; the target draws its own.
    std::vector<std::vector<std::set<int>>> profile_domains;
    if (style == ScenarioStyle::O31Like) {
        profile_domains = {{{0, 1}, {2, 5}}, {{3, 4, 6}, {7, 8}}};
    } else {
        profile_domains = {{{0, 1, 5}}, {{2, 3}}, {{4, 6}, {7, 8}}};
    }
    const std::set<int> target_classes = {0, 1, 2, 3, 4};

    std::vector<ShiftProfile> profiles;
    for (std::size_t i = 0; i < profile_domains.size(); ++i) {
        ShiftProfile p;
        p.shift = draw_vector(rng, kFeatureDim, 0.9);
        p.scale = rng.uniform(0.9, 1.2);
        profiles.push_back(std::move(p));
    }
    ShiftProfile target_profile;
    target_profile.shift = draw_vector(rng, kFeatureDim, 0.9);
    target_profile.scale = rng.uniform(0.9, 1.2);

    double max_scale = target_profile.scale;
    for (const auto& p : profiles) max_scale = std::max(max_scale, p.scale);

    std::vector<int> all_classes;
    for (int c = 0; c <= 8; ++c) all_classes.push_back(c);
    s.prototypes = draw_prototypes(rng, all_classes, kFeatureDim, max_scale);

    int domain_id = 0;
    for (std::size_t pi = 0; pi < profile_domains.size(); ++pi) {
        for (const auto& classes : profile_domains[pi]) {
            DomainSpec d;
            d.domain_id = domain_id++;
            d.class_set = classes;
            d.samples_per_class = kSourceSamplesPerClass;
            d.shift = profiles[pi].shift;
            d.scale = profiles[pi].scale;
            d.role = DomainRole::Source;
            s.domains.push_back(std::move(d));
        }
    }

    DomainSpec target;
    target.domain_id = domain_id;
    target.class_set = target_classes;
    target.samples_per_class = kTargetSamplesPerClass;
    target.shift = target_profile.shift;
    target.scale = target_profile.scale;
    target.role = DomainRole::Target;
    s.domains.push_back(std::move(target));

    s.validate();
    return s;
}

std::vector<Sample> sample_domain(const DomainSpec& spec, const Scenario& scenario) {
    for (int c : spec.class_set)
        if (!scenario.prototypes.count(c))
            throw std::invalid_argument("sample_domain: unknown class id " + std::to_string(c));

    // Substream per domain; ids live in a domain-indexed block so they are
    // unique across the whole scenario.
    Rng rng = Rng(scenario.seed).fork(0x5A00 + static_cast<uint64_t>(spec.domain_id));
    constexpr int kIdBlock = 1000000;

    std::vector<Sample> out;
    int local_id = 0;
    for (int c : spec.class_set) {
        const Vec& proto = scenario.prototypes.at(c);
        for (int i = 0; i < spec.samples_per_class; ++i) {
            Sample sample;
            sample.id = spec.domain_id * kIdBlock + local_id++;
            sample.domain_id = spec.domain_id;
            sample.true_class = c;
            sample.features.resize(proto.size());
            for (std::size_t k = 0; k < proto.size(); ++k)
                sample.features[k] = proto[k] + spec.shift[k] + rng.normal(0.0, spec.scale);
            out.push_back(std::move(sample));
        }
    }
    return out;
}

std::vector<Sample> all_source_samples(const Scenario& scenario) {
    std::vector<Sample> out;
    for (const auto& d : scenario.domains) {
        if (d.role != DomainRole::Source) continue;
        auto samples = sample_domain(d, scenario);
        out.insert(out.end(), samples.begin(), samples.end());
    }
    return out;
}

std::vector<Sample> target_samples(const Scenario& scenario) {
    return sample_domain(scenario.target_domain(), scenario);
}

std::map<int, std::vector<Sample>> group_by_class(const std::vector<Sample>& samples) {
    std::map<int, std::vector<Sample>> out;
    for (const auto& s : samples) out[s.true_class].push_back(s);
    return out;
}

}  // namespace oscrowd::synth
