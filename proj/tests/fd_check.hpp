#pragma once

// Central finite-difference gradient oracle shared by the unit tests and
// the acceptance suite. Stays independent of backward(): losses are
// evaluated through forward passes only.

#include <cmath>
#include <functional>

#include "oscrowd/net.hpp"

namespace fd {

using oscrowd::Matrix;
using oscrowd::Vec;
namespace nn = oscrowd::nn;

using LossFn = std::function<double(const nn::MLPNet&)>;

struct FdReport {
    double max_rel_err = 0.0;
    int entries = 0;
};

// Relative error of analytic vs central-difference gradients over every
// parameter; entries with |analytic| and |fd| below tiny are compared
// absolutely.
inline FdReport compare_gradients(nn::MLPNet net, const LossFn& loss,
                                  const nn::Gradients& analytic, double step = 1e-5,
                                  double tiny = 1e-8) {
    FdReport report;
    auto probe = [&](double& param, double analytic_g) {
        double saved = param;
        param = saved + step;
        double up = loss(net);
        param = saved - step;
        double down = loss(net);
        param = saved;
        double fd_g = (up - down) / (2.0 * step);
        double err;
        if (std::abs(analytic_g) < tiny && std::abs(fd_g) < tiny)
            err = std::abs(analytic_g - fd_g);
        else
            err = std::abs(analytic_g - fd_g) /
                  std::max(std::abs(analytic_g), std::abs(fd_g));
        report.max_rel_err = std::max(report.max_rel_err, err);
        ++report.entries;
    };

    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        for (std::size_t i = 0; i < net.weights[l].data.size(); ++i)
            probe(net.weights[l].data[i], analytic.weights[l].data[i]);
        for (std::size_t i = 0; i < net.biases[l].size(); ++i)
            probe(net.biases[l][i], analytic.biases[l][i]);
    }
    return report;
}

}  // namespace fd
