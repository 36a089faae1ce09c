#include <doctest.h>

#include <cmath>

#include "ruin/sim.hpp"

using namespace ruin;

namespace {

ModelParams exp_exp_params(double a, double sigma, double c, double l1, double l2,
                           double mu1 = 1.0, double mu2 = 1.0) {
    ModelParams p;
    p.a = a;
    p.sigma = sigma;
    p.c = c;
    p.lambda1 = l1;
    p.lambda2 = l2;
    p.law1 = make_exponential(mu1);
    p.law2 = make_exponential(mu2);
    return p;
}

// Brute-force Euler-Maruyama oracle for the between-jump flow, step h/16.
// Independent of the exact-GBM-factor scheme under test.
template <class JumpSource>
PathOutcome euler_path(double a, double sigma, double c, double u, const SimConfig& config,
                       JumpSource& jumps, RngStream& rng) {
    const double h = config.substep / 16.0;
    double X = u, t = 0.0;
    PathOutcome out;
    JumpEvent ev = jumps.next();
    double next_jump = ev.dt;
    while (t < config.horizon) {
        const double flow_end = std::min(next_jump, config.horizon);
        while (t < flow_end) {
            const double delta = std::min(h, flow_end - t);
            const double dW = sigma > 0.0 ? std::sqrt(delta) * rng.normal() : 0.0;
            X += X * (a * delta + sigma * dW) + c * delta;
            t += delta;
            if (X < config.ruin_floor) {
                out.ruined_at = t;
                out.terminal_value = X;
                return out;
            }
            if (X > kOverflowCutoff) {
                out.overflowed = true;
                out.terminal_value = X;
                return out;
            }
        }
        if (next_jump <= config.horizon) {
            X += ev.size;
            if (X < config.ruin_floor) {
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

}  // namespace

TEST_CASE("pure drift: no jumps, sigma=0, a=0 gives X_T = u + cT") {
    SimConfig cfg;
    cfg.horizon = 3.0;
    cfg.substep = 0.1;
    ScriptedJumpSource none({});
    RngStream rng(1, 0);
    const auto out = simulate_path_with(0.0, 0.0, 1.0, 5.0, cfg, none, rng);
    CHECK_FALSE(out.ruined_at.has_value());
    CHECK(out.terminal_value == doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("forced single claim ruins at the jump instant") {
    SimConfig cfg;
    cfg.horizon = 3.0;
    cfg.substep = 0.1;
    const double u = 5.0;
    // X(1^-) = u + 1 under unit drift; claim of u + 2 sends X(1) to -1 < 0
    ScriptedJumpSource one_claim({{1.0, -(u + 2.0)}});
    RngStream rng(1, 0);
    const auto out = simulate_path_with(0.0, 0.0, 1.0, u, cfg, one_claim, rng);
    REQUIRE(out.ruined_at.has_value());
    CHECK(*out.ruined_at == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(out.terminal_value == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("hitting exactly the floor is not ruin (strict inequality)") {
    SimConfig cfg;
    cfg.horizon = 2.0;
    cfg.substep = 0.1;
    ScriptedJumpSource exact({{1.0, -6.0}});  // X(1^-) = 6, jump to exactly 0
    RngStream rng(1, 0);
    const auto out = simulate_path_with(0.0, 0.0, 1.0, 5.0, cfg, exact, rng);
    CHECK_FALSE(out.ruined_at.has_value());
}

TEST_CASE("estimate_ruin: determinism, trivial limits, thread independence") {
    auto params = exp_exp_params(0.03, 0.2, 1.0, 1.0, 1.0);
    SimConfig cfg;
    cfg.horizon = 10.0;
    cfg.substep = 0.05;
    cfg.n_paths = 2000;
    cfg.seed = 99;
    Simulator sim(params);

    const auto e1 = sim.estimate_ruin(2.0, cfg);
    const auto e2 = sim.estimate_ruin(2.0, cfg);
    CHECK(e1.psi_hat == e2.psi_hat);
    CHECK(e1.stderr_ == e2.stderr_);

    const auto e4 = sim.estimate_ruin(2.0, cfg, 4);
    CHECK(e4.psi_hat == e1.psi_hat);  // counter-based streams, schedule-free

    CHECK(e1.stderr_ ==
          doctest::Approx(std::sqrt(e1.psi_hat * (1.0 - e1.psi_hat) / cfg.n_paths)));
    CHECK(e1.psi_hat + e1.fraction_censored <= 1.0 + 1e-15);

    const auto huge = sim.estimate_ruin(1e8, cfg);
    CHECK(huge.psi_hat == doctest::Approx(0.0));
}

TEST_CASE("classical Cramer-Lundberg oracle: sigma=0, a=0") {
    // Psi(u) = (lambda/(c mu)) e^{-(mu - lambda/c) u} for Exp(mu) claims
    auto params = exp_exp_params(0.0, 0.0, 1.0, 0.5, 1e-12);
    SimConfig cfg;
    cfg.horizon = 400.0;
    cfg.substep = 0.5;
    cfg.n_paths = 20000;
    cfg.seed = 7;
    Simulator sim(params);
    for (double u : {1.0, 2.0, 5.0}) {
        const auto est = sim.estimate_ruin(u, cfg);
        const double exact = 0.5 * std::exp(-0.5 * u);
        CHECK(std::abs(est.psi_hat - exact) <= 3.0 * est.stderr_ + 1e-12);
    }
}

TEST_CASE("scheme consistency: exact-GBM-factor vs fine Euler-Maruyama") {
    auto params = exp_exp_params(0.03, 0.2, 1.0, 1.0, 1.0);
    Simulator sim(params);
    SimConfig cfg;
    cfg.horizon = 20.0;
    cfg.substep = 0.02;
    cfg.n_paths = 8000;
    cfg.seed = 31;

    const auto exact_est = sim.estimate_ruin(3.0, cfg);

    const JumpSampler claims(params.law1), premiums(params.law2);
    std::uint64_t ruined = 0;
    for (std::uint64_t i = 0; i < cfg.n_paths; ++i) {
        RngStream rng(cfg.seed + 1, i);
        PoissonJumpSource jumps(params.lambda1, params.lambda2, claims, premiums, rng);
        if (euler_path(params.a, params.sigma, params.c, 3.0, cfg, jumps, rng).ruined_at)
            ++ruined;
    }
    const double psi_em = static_cast<double>(ruined) / static_cast<double>(cfg.n_paths);
    const double se_em = std::sqrt(psi_em * (1.0 - psi_em) / static_cast<double>(cfg.n_paths));
    const double joint = std::sqrt(se_em * se_em + exact_est.stderr_ * exact_est.stderr_);
    CHECK(std::abs(psi_em - exact_est.psi_hat) <= 3.0 * joint);
}

TEST_CASE("pathwise monotonicity in u with common random numbers") {
    auto params = exp_exp_params(0.03, 0.2, 1.0, 1.0, 1.0);
    Simulator sim(params);
    SimConfig cfg;
    cfg.horizon = 10.0;
    cfg.substep = 0.05;
    cfg.seed = 5;
    int violations = 0;
    for (std::uint64_t i = 0; i < 1000; ++i) {
        RngStream r1(cfg.seed, i), r2(cfg.seed, i);
        const bool ruin_low = sim.simulate_path(1.0, cfg, r1).ruined_at.has_value();
        const bool ruin_high = sim.simulate_path(4.0, cfg, r2).ruined_at.has_value();
        if (ruin_high && !ruin_low) ++violations;
    }
    CHECK(violations == 0);
}

TEST_CASE("theorem precondition gate") {
    auto p1 = exp_exp_params(0.03, 0.2, 1.0, 1.0, 1.0, 2.0, 1.0);
    const auto g1 = check_theorem_preconditions(p1);
    CHECK(g1.beta == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(g1.beta_in_range);
    CHECK(g1.moment_gate);
    CHECK(g1.witness_moment < 1.0);

    auto p2 = exp_exp_params(0.05, 0.2, 1.0, 1.0, 1.0);
    const auto g2 = check_theorem_preconditions(p2);
    CHECK(g2.beta == doctest::Approx(1.5).epsilon(1e-14));
    CHECK_FALSE(g2.beta_in_range);

    // Exp(2) claims, beta = 0.5: witness exists, e.g. E xi^{0.25} < 1
    const double m = fractional_moment(make_exponential(2.0), 0.25);
    CHECK(m == doctest::Approx(std::tgamma(1.25) / std::pow(2.0, 0.25)).epsilon(1e-8));
    CHECK(m < 1.0);
}

TEST_CASE("jump sampler table agrees with the exact quantile solve") {
    for (const auto& spec : {make_exponential(1.0), make_erlang(2, 1.0),
                             make_hyperexponential({0.3, 0.7}, {0.5, 3.0})}) {
        const JumpSampler sampler(spec);
        for (double u : {0.001, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 0.9999}) {
            const double exact = quantile(spec, u);
            CHECK(sampler.inverse(u) == doctest::Approx(exact).epsilon(1e-7));
        }
    }
}
