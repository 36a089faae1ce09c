// Acceptance suite: one pass/fail line per criterion, nonzero exit on failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "ruin/config.hpp"
#include "ruin/laplace_frobenius.hpp"
#include "ruin/rational_density.hpp"
#include "ruin/reduction.hpp"
#include "ruin/sim.hpp"
#include "ruin/tailfit.hpp"

using namespace ruin;

namespace {

int failures = 0;

void report(const char* name, bool pass, const std::string& detail = {}) {
    std::printf("%-6s %s%s%s\n", name, pass ? "PASS" : "FAIL", detail.empty() ? "" : "  ",
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

double elapsed_s(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

RationalDensitySpec random_spec(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.3, 3.0);
    if (rng() % 2 == 0 || n == 1) {
        if (n == 1) return make_exponential(unif(rng));
        return make_erlang(n, unif(rng));
    }
    std::vector<double> p(static_cast<std::size_t>(n)), mu(static_cast<std::size_t>(n));
    double sum = 0.0;
    for (auto& x : p) sum += (x = unif(rng));
    for (auto& x : p) x /= sum;
    double m = unif(rng);
    for (auto& x : mu) x = (m += unif(rng));
    return make_hyperexponential(p, mu);
}

ModelParams ac3_params() {
    ModelParams p;
    p.a = 0.03;
    p.sigma = 0.2;
    p.c = 1.0;
    p.lambda1 = 1.0;
    p.lambda2 = 1.0;
    p.law1 = make_exponential(1.0);
    p.law2 = make_exponential(1.0);
    return p;
}

// AC-1: structural identities, exact to 1e-12, on 50 randomized parameter sets
void ac1() {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    std::string why;
    std::mt19937_64 rng(20250826);
    std::uniform_real_distribution<double> unif(0.1, 2.0);
    std::uniform_real_distribution<double> beta_draw(0.07, 0.93);
    for (int trial = 0; trial < 50 && ok; ++trial) {
        ModelParams p;
        p.sigma = unif(rng);
        const double beta = beta_draw(rng);
        p.a = 0.5 * p.sigma * p.sigma * (beta + 1.0);
        p.c = (rng() % 2 ? 1.0 : -1.0) * unif(rng);
        p.lambda1 = unif(rng);
        p.lambda2 = unif(rng);
        const int n = 1 + static_cast<int>(rng() % 3);
        p.law1 = random_spec(n, rng);
        p.law2 = random_spec(n, rng);

        ReducedODE red;
        LaplaceODE lode;
        try {
            red = build_reduced_ode(p);  // asserts q0 = 0, b/c top identities
            lode = build_laplace_ode(red);
        } catch (const std::exception& e) {
            ok = false;
            why = e.what();
            break;
        }
        double scale = 1.0;
        for (const auto& q : red.coeffs)
            scale = std::max({scale, std::abs(q.a), std::abs(q.b), std::abs(q.c)});
        const auto& q0 = red.coeffs[0];
        const auto& qt = red.coeffs[static_cast<std::size_t>(red.order)];
        const auto& qt1 = red.coeffs[static_cast<std::size_t>(red.order - 1)];
        const double a1n = p.law1.ode_coeffs.back(), a2n = p.law2.ode_coeffs.back();
        const double sgn = (p.law2.order % 2 == 0) ? 1.0 : -1.0;
        const double tol = 1e-12 * scale;
        ok = ok && std::abs(q0.a) <= tol && std::abs(q0.b) <= tol && std::abs(q0.c) <= tol;
        ok = ok && std::abs(qt.b) <= tol && std::abs(qt.c) <= tol;
        ok = ok && std::abs(qt1.c - p.c * a1n * a2n * sgn) <= tol;
        ok = ok && lode.p(0.0) == 0.0 && lode.p.coeff(1) != 0.0;
        const double want_l0 = 2.0 - 2.0 * p.a / (p.sigma * p.sigma);
        ok = ok && std::abs(lode.l.coeff(0) / lode.p.coeff(1) - want_l0) <= 1e-12 * scale;
        // lim s^2 r/p = s r(0)/p'(0) -> 0 exactly, given the structure above
        ok = ok && std::isfinite(lode.r(0.0));
        try {
            const auto [r1, r2] = indicial_roots(lode);
            ok = ok && r1 == 0.0 && std::abs(r2 - beta) <= 1e-12;
        } catch (const std::exception& e) {
            ok = false;
            why = e.what();
        }
        if (!ok && why.empty()) why = "identity out of tolerance at trial " + std::to_string(trial);
    }
    const double dt = elapsed_s(t0);
    ok = ok && dt < 10.0;
    report("AC-1", ok, why.empty() ? "50 parameter sets, " + std::to_string(dt) + " s" : why);
}

// AC-2: reduction identity and Propositions on test functions by quadrature
void ac2() {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    std::string why;
    const std::vector<double> u_pts{0.5, 1.0, 2.0, 5.0};
    const auto g = exponential_test_function(1.0);

    // decay rate of both laws exceeds the test function's, so I_1 converges
    std::vector<std::pair<RationalDensitySpec, RationalDensitySpec>> law_pairs = {
        {make_exponential(2.0), make_exponential(2.0)},
        {make_erlang(2, 2.0), make_erlang(2, 2.0)},
        {make_erlang(2, 2.0), make_exponential(2.0)}};
    for (const auto& [law1, law2] : law_pairs) {
        ModelParams p = ac3_params();
        p.law1 = law1;
        p.law2 = law2;
        try {
            const auto rep = verify_identity_on_testfn(p, g, u_pts);
            if (rep.max_relative > 1e-6) {
                ok = false;
                why = "identity residual " + std::to_string(rep.max_relative);
            }
        } catch (const std::exception& e) {
            ok = false;
            why = e.what();
        }
    }

    // Propositions 1 and 2 for Erlang(2): quadrature + 8th-order differences
    const auto law = make_erlang(2, 2.0);
    const AdaptiveSimpson quad(1e-11, 1e-15);
    const double r = detail::min_abs_real_root(law);
    for (int prop = 1; prop <= 2 && ok; ++prop) {
        const double y_max = prop == 1 ? 45.0 / (r - 1.0) + 10.0 : 45.0 / (r + 1.0) + 10.0;
        auto I = [&](double u) {
            return quad.integrate(
                [&](double y) { return g.deriv(prop == 1 ? u - y : u + y, 0) * density(law, y); },
                0.0, y_max);
        };
        for (double u : u_pts) {
            KahanSum lhs;
            for (int j = 0; j <= law.order; ++j) {
                const double sgn = (prop == 2 && j % 2 == 1) ? -1.0 : 1.0;
                lhs.add(sgn * law.ode_coeffs[static_cast<std::size_t>(j)] *
                        (j == 0 ? I(u) : central_diff(I, u, j, 0.05)));
            }
            KahanSum rhs;
            for (int k = 0; k < law.order; ++k)
                rhs.add(g.deriv(u, k) *
                        (prop == 1 ? proposition1_rhs(law, k) : proposition2_rhs(law, k)));
            if (std::abs(lhs.value() - rhs.value()) > 1e-7) {
                ok = false;
                why = "proposition " + std::to_string(prop) + " residual at u=" +
                      std::to_string(u);
            }
        }
    }
    const double dt = elapsed_s(t0);
    ok = ok && dt < 30.0;
    report("AC-2", ok, why.empty() ? std::to_string(dt) + " s" : why);
}

// AC-3: statistical reproduction of the power-law tail exponent beta = 0.5
void ac3(unsigned threads) {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    std::string why;
    const auto params = ac3_params();
    const auto gate = check_theorem_preconditions(params);
    if (!gate.passed()) {
        report("AC-3", false, "theorem gate unexpectedly failed");
        return;
    }

    // The asymptotic power law only sets in around u ~ 2e2 for these
    // parameters, and ruin from that far above the barrier takes until
    // t ~ 1e3, hence the late u grid and long horizon.
    SimConfig cfg;
    cfg.horizon = 2000.0;  // run to 2T, read off T = 1000 and 2T = 2000
    cfg.substep = 0.5;
    cfg.n_paths = 200000;
    cfg.seed = 1;
    const double T = 1000.0;

    Simulator sim(params);
    std::vector<RuinEstimate> at_T;
    double max_shift_in_se = 0.0;
    double u = 162.0;
    for (int k = 0; k < 8; ++k, u *= 1.5) {
        std::uint64_t ruined_T = 0, ruined_2T = 0;
        const auto worker_count = std::max(1u, threads);
        std::vector<std::uint64_t> rT(worker_count, 0), r2T(worker_count, 0);
        auto work = [&](unsigned w) {
            for (std::uint64_t i = w; i < cfg.n_paths; i += worker_count) {
                RngStream rng(cfg.seed, i);
                const auto out = sim.simulate_path(u, cfg, rng);
                if (out.ruined_at) {
                    ++r2T[w];
                    if (*out.ruined_at <= T) ++rT[w];
                }
            }
        };
        if (worker_count == 1) {
            work(0);
        } else {
            std::vector<std::thread> pool;
            for (unsigned w = 0; w < worker_count; ++w) pool.emplace_back(work, w);
            for (auto& th : pool) th.join();
        }
        for (unsigned w = 0; w < worker_count; ++w) {
            ruined_T += rT[w];
            ruined_2T += r2T[w];
        }
        RuinEstimate est;
        est.u = u;
        est.n_paths = cfg.n_paths;
        est.horizon = T;
        est.psi_hat = static_cast<double>(ruined_T) / static_cast<double>(cfg.n_paths);
        est.stderr_ = std::sqrt(est.psi_hat * (1.0 - est.psi_hat) /
                                static_cast<double>(cfg.n_paths));
        at_T.push_back(est);
        const double psi_2T = static_cast<double>(ruined_2T) / static_cast<double>(cfg.n_paths);
        if (est.stderr_ > 0.0)
            max_shift_in_se = std::max(max_shift_in_se, (psi_2T - est.psi_hat) / est.stderr_);
        std::printf("  u=%-8g psi_T=%.5f psi_2T=%.5f stderr=%.5f\n", u, est.psi_hat, psi_2T,
                    est.stderr_);
        std::fflush(stdout);
    }

    TailFit fit;
    try {
        fit = tail_fit(at_T, gate.beta);
    } catch (const std::exception& e) {
        report("AC-3", false, e.what());
        return;
    }
    std::printf("  beta_hat=%.4f beta_stderr=%.4f r2=%.4f horizon shift max=%.2f se\n",
                fit.beta_hat, fit.beta_stderr, fit.r_squared, max_shift_in_se);
    if (!(fit.beta_hat >= 0.35 && fit.beta_hat <= 0.65)) {
        ok = false;
        why = "beta_hat " + std::to_string(fit.beta_hat) + " outside [0.35, 0.65]";
    }
    if (fit.beta_stderr >= 0.08) {
        ok = false;
        why = "beta_stderr " + std::to_string(fit.beta_stderr);
    }
    if (max_shift_in_se >= 2.0) {
        ok = false;
        why = "horizon doubling moved psi_hat by " + std::to_string(max_shift_in_se) + " se";
    }
    report("AC-3", ok, why.empty() ? std::to_string(elapsed_s(t0)) + " s" : why);
}

// AC-4: classical Cramer-Lundberg closed form as oracle
void ac4() {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    std::string why;
    ModelParams p;
    p.a = 0.0;
    p.sigma = 0.0;
    p.c = 1.0;
    p.lambda1 = 0.5;
    p.lambda2 = 1e-12;
    p.law1 = make_exponential(1.0);
    p.law2 = make_exponential(1.0);
    SimConfig cfg;
    cfg.horizon = 400.0;
    cfg.substep = 0.5;
    cfg.n_paths = 100000;
    cfg.seed = 4;
    Simulator sim(p);
    for (double u : {1.0, 2.0, 5.0}) {
        const auto est = sim.estimate_ruin(u, cfg);
        const double exact = 0.5 * std::exp(-0.5 * u);
        const double gap = std::abs(est.psi_hat - exact);
        std::printf("  u=%g psi_hat=%.5f exact=%.5f (%.2f se)\n", u, est.psi_hat, exact,
                    est.stderr_ > 0 ? gap / est.stderr_ : 0.0);
        if (gap > 3.0 * est.stderr_) {
            ok = false;
            why = "u=" + std::to_string(u) + " off by " + std::to_string(gap);
        }
    }
    report("AC-4", ok, why.empty() ? std::to_string(elapsed_s(t0)) + " s" : why);
}

// AC-5: Frobenius residual slope for the AC-3 parameter set
void ac5() {
    bool ok = true;
    std::string why;
    try {
        const auto lode = build_laplace_ode(build_reduced_ode(ac3_params()));
        const auto [rho1, rho2] = indicial_roots(lode);
        const auto sol = frobenius_series(lode, rho2, 20);
        const double r_lo = std::abs(truncation_residual(lode, sol, 1e-3));
        const double r_hi = std::abs(truncation_residual(lode, sol, 1e-1));
        const double slope =
            (std::log(r_hi) - std::log(r_lo)) / (std::log(1e-1) - std::log(1e-3));
        ok = slope >= 18.0;
        why = "log-log residual slope " + std::to_string(slope);
    } catch (const std::exception& e) {
        ok = false;
        why = e.what();
    }
    report("AC-5", ok, why);
}

// AC-6: distribution-law suite (ODE residual, transform vs quadrature, KS)
void ac6() {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    std::string why;
    const std::vector<RationalDensitySpec> laws = {
        make_exponential(1.0), make_erlang(2, 1.0),
        make_hyperexponential({0.3, 0.7}, {0.5, 3.0})};
    const AdaptiveSimpson quad(1e-11, 1e-15);
    for (const auto& law : laws) {
        if (!validate(law).passed()) {
            ok = false;
            why = "validation failed";
            break;
        }
        double max_f = 0.0;
        for (double x = 0.0; x < 12.0; x += 0.05) max_f = std::max(max_f, density(law, x));
        for (double x = 0.5; x < 10.0 && ok; x += 0.75) {
            KahanSum res;
            for (int j = 0; j <= law.order; ++j)
                res.add(law.ode_coeffs[static_cast<std::size_t>(j)] *
                        (j == 0 ? density(law, x)
                                : central_diff([&](double t) { return density(law, t); }, x, j,
                                               0.02)));
            if (std::abs(res.value()) > 1e-8 * max_f) {
                ok = false;
                why = "ODE residual " + std::to_string(res.value());
            }
        }
        const auto lt = laplace_transform(law);
        const double x_max = density_support_cutoff(law);
        for (double s : {0.1, 0.5, 1.0, 2.0, 5.0}) {
            const double numeric = quad.integrate(
                [&](double x) { return std::exp(-s * x) * density(law, x); }, 0.0, x_max);
            if (std::abs(lt(s) - numeric) > 1e-8 * std::abs(numeric)) {
                ok = false;
                why = "transform mismatch at s=" + std::to_string(s);
            }
        }
        // KS at significance 0.001
        const int n = 100000;
        RngStream rng(6, 0);
        const JumpSampler sampler(law);
        std::vector<double> xs(static_cast<std::size_t>(n));
        for (auto& x : xs) x = sampler.draw(rng);
        std::sort(xs.begin(), xs.end());
        double d = 0.0;
        for (int i = 0; i < n; ++i) {
            const double F = cdf(law, xs[static_cast<std::size_t>(i)]);
            d = std::max(d, std::abs(F - static_cast<double>(i) / n));
            d = std::max(d, std::abs(F - static_cast<double>(i + 1) / n));
        }
        const double crit = 1.9495 / std::sqrt(static_cast<double>(n));
        if (d >= crit) {
            ok = false;
            why = "KS statistic " + std::to_string(d) + " >= " + std::to_string(crit);
        }
    }
    report("AC-6", ok, why.empty() ? std::to_string(elapsed_s(t0)) + " s" : why);
}

}  // namespace

int main(int argc, char** argv) {
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    if (argc > 1) threads = static_cast<unsigned>(std::stoul(argv[1]));
    ac1();
    ac2();
    ac4();
    ac5();
    ac6();
    ac3(threads);
    return failures == 0 ? 0 : 1;
}
