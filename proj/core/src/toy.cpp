#include "oscrowd/toy.hpp"

#include <cmath>
#include <stdexcept>

namespace oscrowd::nn {

namespace {

constexpr double kSumTol = 1e-12;
constexpr double kLn2 = 0.69314718055994530942;

double xlogy(double x, double y) { return x == 0.0 ? 0.0 : x * std::log(y); }

}  // namespace

void ToyDistribution::validate() const {
    if (support.size() != p_source.size() || support.size() != p_target.size())
        throw std::invalid_argument("ToyDistribution: size mismatch");
    double ss = 0.0, st = 0.0;
    for (std::size_t i = 0; i < support.size(); ++i) {
        if (p_source[i] < 0.0 || p_target[i] < 0.0)
            throw std::invalid_argument("ToyDistribution: negative mass");
        ss += p_source[i];
        st += p_target[i];
    }
    if (std::abs(ss - 1.0) > kSumTol || std::abs(st - 1.0) > kSumTol)
        throw std::invalid_argument("ToyDistribution: masses must sum to 1");
}

ToyDistribution ToyDistribution::random(Rng& rng, int n_points) {
    ToyDistribution d;
    d.support.resize(static_cast<std::size_t>(n_points));
    d.p_source.resize(static_cast<std::size_t>(n_points));
    d.p_target.resize(static_cast<std::size_t>(n_points));
    double ss = 0.0, st = 0.0;
    for (int i = 0; i < n_points; ++i) {
        d.support[static_cast<std::size_t>(i)] = static_cast<double>(i);
        double a = rng.uniform(0.01, 1.0);
        double b = rng.uniform(0.01, 1.0);
        d.p_source[static_cast<std::size_t>(i)] = a;
        d.p_target[static_cast<std::size_t>(i)] = b;
        ss += a;
        st += b;
    }
    for (auto& x : d.p_source) x /= ss;
    for (auto& x : d.p_target) x /= st;

    // Renormalise the residue onto the first point so the sums are exact.
    double rs = 0.0, rt = 0.0;
    for (std::size_t i = 1; i < d.p_source.size(); ++i) {
        rs += d.p_source[i];
        rt += d.p_target[i];
    }
    d.p_source[0] = 1.0 - rs;
    d.p_target[0] = 1.0 - rt;
    return d;
}

Vec optimal_discriminator(const ToyDistribution& dist) {
    dist.validate();
    Vec out;
    for (std::size_t i = 0; i < dist.support.size(); ++i) {
        double ps = dist.p_source[i], pt = dist.p_target[i];
        if (ps == 0.0 && pt == 0.0) continue;
        out.push_back(ps / (ps + pt));
    }
    return out;
}

double js_divergence(const Vec& p, const Vec& q) {
    if (p.size() != q.size()) throw std::invalid_argument("js_divergence: size mismatch");
    double kl_pm = 0.0, kl_qm = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        double m = 0.5 * (p[i] + q[i]);
        if (m == 0.0) continue;
        kl_pm += xlogy(p[i], p[i] / m);
        kl_qm += xlogy(q[i], q[i] / m);
    }
    return 0.5 * (kl_pm + kl_qm);
}

JsCheck js_objective_check(const ToyDistribution& dist) {
    dist.validate();
    double lhs = 0.0;
    for (std::size_t i = 0; i < dist.support.size(); ++i) {
        double ps = dist.p_source[i], pt = dist.p_target[i];
        if (ps == 0.0 && pt == 0.0) continue;
        double d_star = ps / (ps + pt);
        lhs += xlogy(ps, d_star) + xlogy(pt, 1.0 - d_star);
    }
    double rhs = 2.0 * js_divergence(dist.p_source, dist.p_target) - 2.0 * kLn2;
    return {lhs, rhs};
}

}  // namespace oscrowd::nn
