#pragma once

#include <utility>
#include <vector>

#include "oscrowd/matrix.hpp"
#include "oscrowd/rng.hpp"

namespace oscrowd::nn {

// Discrete two-marginal distribution used for analytic checks of the
// adversarial objective: an ideal discriminator and the Jensen-Shannon
// form of the optimum can be evaluated exactly on a finite support.
struct ToyDistribution {
    Vec support;  // point values; only the masses matter to the math
    Vec p_source;
    Vec p_target;

    void validate() const;
    static ToyDistribution random(Rng& rng, int n_points);
};

// D*(z) = p_s(z) / (p_s(z) + p_t(z)) per support point. Points where both
// masses are zero are skipped.
Vec optimal_discriminator(const ToyDistribution& dist);

struct JsCheck {
    double lhs;  // adversarial objective evaluated at the ideal discriminator
    double rhs;  // 2 * JS(p_s || p_t) - 2 ln 2
};

JsCheck js_objective_check(const ToyDistribution& dist);

double js_divergence(const Vec& p, const Vec& q);

}  // namespace oscrowd::nn
