#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ruin/sim.hpp"

namespace ruin {

struct TailFit {
    double beta_hat = 0.0;
    double beta_stderr = 0.0;
    double logC_hat = 0.0;
    double r_squared = 0.0;
    std::vector<double> u_used;
    double beta_predicted = 0.0;
};

// Weighted least squares of log psi_hat on log u:
//   log psi = logC - beta log u,  weights 1/var(log psi) = (psi/stderr)^2.
// Points below the noise floor psi_hat >= 5 stderr are dropped.
inline TailFit tail_fit(const std::vector<RuinEstimate>& estimates, double beta_predicted) {
    std::vector<double> x, y, w;
    TailFit fit;
    fit.beta_predicted = beta_predicted;
    for (const auto& e : estimates) {
        if (e.psi_hat <= 0.0 || e.psi_hat < 5.0 * e.stderr_) continue;
        x.push_back(std::log(e.u));
        y.push_back(std::log(e.psi_hat));
        const double rel = e.stderr_ > 0.0 ? e.stderr_ / e.psi_hat : 1e-12;
        w.push_back(1.0 / (rel * rel));
        fit.u_used.push_back(e.u);
    }
    if (x.size() < 3)
        throw std::invalid_argument("tail_fit: need at least 3 estimates above the noise floor");

    double sw = 0.0, swx = 0.0, swy = 0.0, swxx = 0.0, swxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sw += w[i];
        swx += w[i] * x[i];
        swy += w[i] * y[i];
        swxx += w[i] * x[i] * x[i];
        swxy += w[i] * x[i] * y[i];
    }
    const double det = sw * swxx - swx * swx;
    if (det <= 0.0) throw std::runtime_error("tail_fit: degenerate design (identical u values?)");
    const double slope = (sw * swxy - swx * swy) / det;
    const double intercept = (swxx * swy - swx * swxy) / det;
    fit.beta_hat = -slope;
    fit.logC_hat = intercept;
    // slope variance from the WLS covariance with weights as inverse variances
    fit.beta_stderr = std::sqrt(sw / det);

    double ss_res = 0.0, ss_tot = 0.0;
    const double ybar = swy / sw;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double pred = intercept + slope * x[i];
        ss_res += w[i] * (y[i] - pred) * (y[i] - pred);
        ss_tot += w[i] * (y[i] - ybar) * (y[i] - ybar);
    }
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

}  // namespace ruin
