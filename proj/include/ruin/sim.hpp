#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "ruin/rational_density.hpp"
#include "ruin/rng.hpp"

namespace ruin {

struct ModelParams {
    double a = 0.0;       // risky-asset drift
    double sigma = 0.0;   // volatility; 0 only for the classical-oracle mode
    double c = 0.0;       // premium drift rate, nonzero
    double lambda1 = 0.0; // claim (downward jump) intensity
    double lambda2 = 0.0; // random-premium (upward jump) intensity
    RationalDensitySpec law1;
    RationalDensitySpec law2;

    void check() const {
        if (sigma < 0.0) throw std::invalid_argument("ModelParams: sigma must be >= 0");
        if (!(lambda1 > 0.0) || !(lambda2 > 0.0))
            throw std::invalid_argument("ModelParams: lambda1, lambda2 must be positive");
        if (c == 0.0) throw std::invalid_argument("ModelParams: c must be nonzero");
        require_valid(law1);
        require_valid(law2);
    }
};

struct SimConfig {
    double horizon = 100.0;
    double substep = 1e-2;
    std::uint64_t n_paths = 10000;
    std::uint64_t seed = 1;
    double ruin_floor = 0.0;
    bool bridge_correction = false;  // heuristic GBM-factor crossing check, needs ruin_floor > 0

    void check() const {
        if (!(horizon > 0.0) || !(substep > 0.0) || substep > horizon || n_paths < 1)
            throw std::invalid_argument("SimConfig: need 0 < substep <= horizon, n_paths >= 1");
    }
};

struct PathOutcome {
    std::optional<double> ruined_at;
    double terminal_value = 0.0;
    bool overflowed = false;  // aborted at X > 1e300, counted as non-ruined
};

struct RuinEstimate {
    double u = 0.0;
    double psi_hat = 0.0;
    double stderr_ = 0.0;
    std::uint64_t n_paths = 0;
    double horizon = 0.0;
    double fraction_censored = 0.0;  // alive (not ruined, not overflow-aborted) at horizon
    std::uint64_t n_overflowed = 0;
};

struct GateReport {
    double beta = 0.0;
    bool beta_in_range = false;       // beta in (0,1)
    bool moment_gate = false;         // exists beta' with E xi1^{beta'} < 1
    double beta_prime_witness = 0.0;  // valid iff moment_gate
    double witness_moment = 0.0;
    bool passed() const { return beta_in_range && moment_gate; }
};

// Tabulated inverse CDF: the augmented companion system is marched once on a
// fine x-grid, then draws are monotone-cubic interpolation in F. Draws beyond
// the table's F range fall back to the exact quantile solve.
class JumpSampler {
public:
    explicit JumpSampler(const RationalDensitySpec& spec, int grid_points = 1 << 16)
        : spec_(spec) {
        double x_hi = 1.0 / std::max(detail::min_abs_real_root(spec), 1e-12);
        while (1.0 - cdf(spec, x_hi) > 1e-13 && x_hi < 64.0 * density_support_cutoff(spec))
            x_hi *= 1.5;
        const double dx = x_hi / grid_points;
        const int n = spec.order;
        Eigen::VectorXd y(n + 1);
        y(0) = 0.0;
        for (int k = 0; k < n; ++k) y(k + 1) = spec.boundary_values[static_cast<std::size_t>(k)];
        const Eigen::MatrixXd E = (detail::augmented_matrix(spec) * dx).exp();
        x_.resize(static_cast<std::size_t>(grid_points) + 1);
        F_.resize(x_.size());
        f_.resize(x_.size());
        for (std::size_t k = 0; k < x_.size(); ++k) {
            x_[k] = dx * static_cast<double>(k);
            F_[k] = y(0);
            f_[k] = y(1);
            y = E * y;
        }
        // enforce monotone, clipped table
        for (std::size_t k = 1; k < F_.size(); ++k) F_[k] = std::max(F_[k], F_[k - 1]);
        F_max_ = F_.back();
    }

    double draw(RngStream& rng) const { return inverse(rng.uniform()); }

    double inverse(double u) const {
        if (u <= F_[1] || u >= F_max_) return quantile(spec_, u);
        const auto it = std::upper_bound(F_.begin(), F_.end(), u);
        const std::size_t k = static_cast<std::size_t>(it - F_.begin()) - 1;
        const double dF = F_[k + 1] - F_[k];
        if (dF <= 0.0) return x_[k];
        // cubic Hermite for x(F) on the cell, slopes 1/f at the endpoints
        const double t = (u - F_[k]) / dF;
        const double d0 = f_[k] > 0.0 ? dF / f_[k] : 0.0;
        const double d1 = f_[k + 1] > 0.0 ? dF / f_[k + 1] : 0.0;
        const double h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
        const double h10 = t * (1.0 - t) * (1.0 - t);
        const double h01 = t * t * (3.0 - 2.0 * t);
        const double h11 = t * t * (t - 1.0);
        return h00 * x_[k] + h10 * d0 + h01 * x_[k + 1] + h11 * d1;
    }

private:
    RationalDensitySpec spec_;
    std::vector<double> x_, F_, f_;
    double F_max_ = 1.0;
};

// Signed jump: negative size is a claim (subtracts from the reserve).
struct JumpEvent {
    double dt = std::numeric_limits<double>::infinity();
    double size = 0.0;
};

// Superposed Poisson clock at rate lambda1 + lambda2; each event is an upward
// xi^2 with probability lambda2/(lambda1+lambda2), else a downward xi^1.
class PoissonJumpSource {
public:
    PoissonJumpSource(double lambda1, double lambda2, const JumpSampler& claims,
                      const JumpSampler& premiums, RngStream& rng)
        : rate_(lambda1 + lambda2), p_up_(lambda2 / (lambda1 + lambda2)),
          claims_(&claims), premiums_(&premiums), rng_(&rng) {}

    JumpEvent next() {
        JumpEvent ev;
        ev.dt = rng_->exponential(rate_);
        if (rng_->uniform() < p_up_)
            ev.size = premiums_->draw(*rng_);
        else
            ev.size = -claims_->draw(*rng_);
        return ev;
    }

private:
    double rate_;
    double p_up_;
    const JumpSampler* claims_;
    const JumpSampler* premiums_;
    RngStream* rng_;
};

// Fixed event list; exhausting it means no further jumps. Test fixture hook.
class ScriptedJumpSource {
public:
    explicit ScriptedJumpSource(std::vector<JumpEvent> events) : events_(std::move(events)) {}
    JumpEvent next() {
        if (idx_ >= events_.size()) return JumpEvent{};
        return events_[idx_++];
    }

private:
    std::vector<JumpEvent> events_;
    std::size_t idx_ = 0;
};

inline constexpr double kOverflowCutoff = 1e300;

// Between jumps the linear SDE is solved exactly in the GBM factor on substeps
// of length <= h; the premium integral c * int e^{R} gets the trapezoid factor
// (1 + G)/2 per substep. Ruin is checked at substep boundaries and jump epochs.
template <class JumpSource>
PathOutcome simulate_path_with(double a, double sigma, double c, double u,
                               const SimConfig& config, JumpSource& jumps, RngStream& rng) {
    const double floor = config.ruin_floor;
    const double T = config.horizon;
    double X = u;
    double t = 0.0;
    PathOutcome out;
    if (X < floor) {
        out.ruined_at = 0.0;
        out.terminal_value = X;
        return out;
    }
    const bool deterministic_flow = sigma == 0.0;
    JumpEvent ev = jumps.next();
    double next_jump = ev.dt;
    while (t < T) {
        const double flow_end = std::min(next_jump, T);
        while (t < flow_end) {
            double delta = std::min(config.substep, flow_end - t);
            if (deterministic_flow && a == 0.0) delta = flow_end - t;  // exact, no diffusion
            double G;
            if (deterministic_flow) {
                G = std::exp(a * delta);
            } else {
                G = std::exp((a - 0.5 * sigma * sigma) * delta +
                             sigma * std::sqrt(delta) * rng.normal());
            }
            const double X_prev = X;
            X = X * G + c * delta * 0.5 * (1.0 + G);
            t += delta;
            if (X < floor) {
                out.ruined_at = t;
                out.terminal_value = X;
                return out;
            }
            if (config.bridge_correction && !deterministic_flow && floor > 0.0 &&
                X_prev > floor && X > floor) {
                // Heuristic: GBM log-bridge crossing probability for the
                // leading factor, ignoring the premium flow inside the step.
                const double l0 = std::log(X_prev / floor), l1 = std::log(X / floor);
                const double p = std::exp(-2.0 * l0 * l1 / (sigma * sigma * delta));
                if (rng.uniform() < p) {
                    out.ruined_at = t;
                    out.terminal_value = floor;
                    return out;
                }
            }
            if (X > kOverflowCutoff) {
                out.overflowed = true;
                out.terminal_value = X;
                return out;
            }
        }
        if (next_jump <= T) {
            X += ev.size;
            if (X < floor) {
                out.ruined_at = next_jump;
                out.terminal_value = X;
                return out;
            }
            ev = jumps.next();
            next_jump += ev.dt;
        } else {
            break;
        }
    }
    out.terminal_value = X;
    return out;
}

// Immutable per-scenario simulator; samplers are built once and shared.
class Simulator {
public:
    explicit Simulator(ModelParams params) : params_(std::move(params)) {
        params_.check();
        claims_ = std::make_shared<JumpSampler>(params_.law1);
        premiums_ = std::make_shared<JumpSampler>(params_.law2);
    }

    const ModelParams& params() const { return params_; }

    PathOutcome simulate_path(double u, const SimConfig& config, RngStream& rng) const {
        PoissonJumpSource jumps(params_.lambda1, params_.lambda2, *claims_, *premiums_, rng);
        return simulate_path_with(params_.a, params_.sigma, params_.c, u, config, jumps, rng);
    }

    RuinEstimate estimate_ruin(double u, const SimConfig& config, unsigned n_threads = 1) const {
        config.check();
        if (!(u > 0.0)) throw std::invalid_argument("estimate_ruin: u must be positive");
        n_threads = std::max(1u, n_threads);
        const std::uint64_t n = config.n_paths;
        std::vector<std::uint64_t> ruined(n_threads, 0), overflowed(n_threads, 0);
        auto worker = [&](unsigned w) {
            std::uint64_t r = 0, o = 0;
            for (std::uint64_t i = w; i < n; i += n_threads) {
                RngStream rng(config.seed, i);
                const PathOutcome out = simulate_path(u, config, rng);
                if (out.ruined_at) ++r;
                if (out.overflowed) ++o;
            }
            ruined[w] = r;
            overflowed[w] = o;
        };
        if (n_threads == 1) {
            worker(0);
        } else {
            std::vector<std::thread> pool;
            for (unsigned w = 0; w < n_threads; ++w) pool.emplace_back(worker, w);
            for (auto& th : pool) th.join();
        }
        std::uint64_t total_ruined = 0, total_overflowed = 0;
        for (unsigned w = 0; w < n_threads; ++w) {
            total_ruined += ruined[w];
            total_overflowed += overflowed[w];
        }
        RuinEstimate est;
        est.u = u;
        est.n_paths = n;
        est.horizon = config.horizon;
        est.psi_hat = static_cast<double>(total_ruined) / static_cast<double>(n);
        est.stderr_ = std::sqrt(est.psi_hat * (1.0 - est.psi_hat) / static_cast<double>(n));
        est.n_overflowed = total_overflowed;
        est.fraction_censored =
            static_cast<double>(n - total_ruined - total_overflowed) / static_cast<double>(n);
        return est;
    }

private:
    ModelParams params_;
    std::shared_ptr<const JumpSampler> claims_;
    std::shared_ptr<const JumpSampler> premiums_;
};

inline PathOutcome simulate_path(const ModelParams& params, double u, const SimConfig& config,
                                 RngStream& rng) {
    return Simulator(params).simulate_path(u, config, rng);
}

inline RuinEstimate estimate_ruin(const ModelParams& params, double u, const SimConfig& config,
                                  unsigned n_threads = 1) {
    return Simulator(params).estimate_ruin(u, config, n_threads);
}

// beta = 2a/sigma^2 - 1 plus the fractional-moment gate for the claims law.
inline GateReport check_theorem_preconditions(const ModelParams& params) {
    if (!(params.sigma > 0.0))
        throw std::invalid_argument("check_theorem_preconditions: sigma must be positive");
    GateReport rep;
    rep.beta = 2.0 * params.a / (params.sigma * params.sigma) - 1.0;
    rep.beta_in_range = rep.beta > 0.0 && rep.beta < 1.0;
    if (rep.beta <= 0.0) return rep;
    const double hi = std::min(rep.beta, 1.0);
    for (int i = 1; i <= 19; ++i) {
        const double bp = hi * static_cast<double>(i) / 20.0;
        const double m = fractional_moment(params.law1, bp);
        if (m < 1.0) {
            rep.moment_gate = true;
            rep.beta_prime_witness = bp;
            rep.witness_moment = m;
            break;
        }
    }
    return rep;
}

}  // namespace ruin
