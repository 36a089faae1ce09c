#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "ruin/poly.hpp"
#include "ruin/reduction.hpp"

namespace ruin {

// Second-order ODE p Ghat'' + l Ghat' + r Ghat = v in the transform variable,
// with s = 0 a regular singular point. The right-hand side v is not
// constructed; only its degree (2n) is recorded.
struct LaplaceODE {
    Poly p;  // zero constant term, p'(0) = a_2 != 0
    Poly l;
    Poly r;
    int v_degree = 0;
    double rho1 = 0.0;
    double rho2 = 0.0;
    double l0_limit = 0.0;  // lim s l/p = 2 - 2a/sigma^2

    double indicial(double z) const {
        return p.coeff(1) * z * (z - 1.0) + l.coeff(0) * z;
    }
};

inline LaplaceODE build_laplace_ode(const ReducedODE& red) {
    const int n = red.common_order;
    const int top = 2 * n + 2;
    auto a = [&](int j) { return j <= top ? red.coeffs[static_cast<std::size_t>(j)].a : 0.0; };
    auto b = [&](int j) { return j <= top ? red.coeffs[static_cast<std::size_t>(j)].b : 0.0; };
    auto c = [&](int j) { return j <= top ? red.coeffs[static_cast<std::size_t>(j)].c : 0.0; };

    Poly p = Poly::zero(static_cast<std::size_t>(2 * n + 1));
    for (int i = 1; i <= 2 * n + 1; ++i) p.at(static_cast<std::size_t>(i)) = a(i + 1);

    Poly l = Poly::zero(static_cast<std::size_t>(2 * n + 1));
    for (int i = 0; i <= 2 * n; ++i)
        l.at(static_cast<std::size_t>(i)) = 2.0 * (i + 1) * a(i + 2) - b(i + 1);
    l.at(static_cast<std::size_t>(2 * n + 1)) = -b(top);

    Poly r = Poly::zero(static_cast<std::size_t>(2 * n + 1));
    for (int i = 0; i <= 2 * n - 1; ++i)
        r.at(static_cast<std::size_t>(i)) =
            (i + 1) * (i + 2) * a(i + 3) - 2.0 * (i + 1) * b(i + 1) + c(i + 1);
    if (2 * n >= 1) r.at(static_cast<std::size_t>(2 * n)) = -2.0 * (2 * n + 1) * b(top);
    r.at(static_cast<std::size_t>(2 * n + 1)) = c(top - 1);

    LaplaceODE lode;
    lode.p = std::move(p);
    lode.l = std::move(l);
    lode.r = std::move(r);
    lode.v_degree = 2 * n;

    const double a2 = lode.p.coeff(1);
    if (a2 == 0.0)
        throw std::runtime_error("build_laplace_ode: p'(0) vanishes, s=0 not regular singular");
    lode.l0_limit = lode.l.coeff(0) / a2;
    const auto& src = red.source;
    const double expected = 2.0 - 2.0 * src.a / (src.sigma * src.sigma);
    if (std::abs(lode.l0_limit - expected) > 1e-10 * std::max(1.0, std::abs(expected)))
        throw std::runtime_error("build_laplace_ode: lim s l/p != 2 - 2a/sigma^2");
    lode.rho1 = 0.0;
    lode.rho2 = 1.0 - lode.l0_limit;
    return lode;
}

// Roots of the indicial equation rho(rho-1) + l0_limit rho = 0.
// The resonant case (rho2 a nonnegative integer, logarithmic solutions) is out
// of scope and rejected.
inline std::pair<double, double> indicial_roots(const LaplaceODE& lode) {
    const double two_a_over_s2 = 2.0 - lode.l0_limit;
    if (!(two_a_over_s2 < 2.0))
        throw std::invalid_argument("indicial_roots: requires 2a/sigma^2 < 2");
    const double rho2 = two_a_over_s2 - 1.0;
    if (rho2 >= -1e-9 && std::abs(rho2 - std::round(rho2)) < 1e-9)
        throw std::domain_error("indicial_roots: resonant case rho2 in {0,1,2,...} unsupported");
    return {0.0, rho2};
}

struct FrobeniusSolution {
    double rho = 0.0;
    std::vector<double> gamma;  // gamma(0..N), gamma(0) = 1
    double radius_hint = 0.0;   // distance from 0 to the nearest nonzero root of p
    double max_recurrence_residual = 0.0;

    double value(double s) const {
        double acc = 0.0;
        for (std::size_t m = gamma.size(); m-- > 0;) acc = acc * s + gamma[m];
        return std::pow(s, rho) * acc;
    }
    double deriv1(double s) const {
        double acc = 0.0;
        for (std::size_t m = gamma.size(); m-- > 0;)
            acc = acc * s + gamma[m] * (rho + static_cast<double>(m));
        return std::pow(s, rho - 1.0) * acc;
    }
    double deriv2(double s) const {
        double acc = 0.0;
        for (std::size_t m = gamma.size(); m-- > 0;) {
            const double e = rho + static_cast<double>(m);
            acc = acc * s + gamma[m] * e * (e - 1.0);
        }
        return std::pow(s, rho - 2.0) * acc;
    }
};

// Frobenius series s^rho sum gamma_m s^m solving the homogeneous equation.
// Substituting and collecting s^{rho+t-1} gives, with p_i, l_i, r_i the
// polynomial coefficients,
//   sum_{m<=t} gamma_m [p_{t+1-m} e_m (e_m - 1) + l_{t-m} e_m]
//   + sum_{m<=t-1} gamma_m r_{t-1-m} = 0,   e_m = rho + m,
// so gamma_t is divided out by the indicial polynomial at rho + t.
inline FrobeniusSolution frobenius_series(const LaplaceODE& lode, double rho, int N) {
    if (N < 8) throw std::invalid_argument("frobenius_series: truncation order N must be >= 8");
    if (std::abs(lode.indicial(rho)) > 1e-9 * std::max(1.0, std::abs(lode.p.coeff(1))))
        throw std::invalid_argument("frobenius_series: rho is not an indicial root");
    FrobeniusSolution sol;
    sol.rho = rho;
    sol.gamma.assign(static_cast<std::size_t>(N) + 1, 0.0);
    sol.gamma[0] = 1.0;
    const double p1 = lode.p.coeff(1);
    for (int t = 1; t <= N; ++t) {
        KahanSum acc;
        for (int m = 0; m < t; ++m) {
            const double e = rho + m;
            const double gm = sol.gamma[static_cast<std::size_t>(m)];
            acc.add(gm * (lode.p.coeff(static_cast<std::size_t>(t + 1 - m)) * e * (e - 1.0) +
                          lode.l.coeff(static_cast<std::size_t>(t - m)) * e));
            acc.add(gm * lode.r.coeff(static_cast<std::size_t>(t - 1 - m)));
        }
        const double divisor = lode.indicial(rho + t);
        if (std::abs(divisor) < 1e-12 * std::abs(p1) * t * t)
            throw std::domain_error("frobenius_series: near-resonant divisor");
        sol.gamma[static_cast<std::size_t>(t)] = -acc.value() / divisor;

        // residual of the order-t equation after the division
        KahanSum res;
        for (int m = 0; m <= t; ++m) {
            const double e = rho + m;
            const double gm = sol.gamma[static_cast<std::size_t>(m)];
            res.add(gm * (lode.p.coeff(static_cast<std::size_t>(t + 1 - m)) * e * (e - 1.0) +
                          lode.l.coeff(static_cast<std::size_t>(t - m)) * e));
            if (m <= t - 1) res.add(gm * lode.r.coeff(static_cast<std::size_t>(t - 1 - m)));
        }
        const double scale = std::max(std::abs(acc.value()), std::abs(divisor));
        if (scale > 0.0)
            sol.max_recurrence_residual =
                std::max(sol.max_recurrence_residual, std::abs(res.value()) / scale);
    }

    double radius = std::numeric_limits<double>::infinity();
    Poly p_over_s(std::vector<double>(lode.p.coeffs().begin() + 1, lode.p.coeffs().end()));
    for (const auto& root : p_over_s.roots()) {
        const double mag = std::abs(root);
        if (mag > 0.0) radius = std::min(radius, mag);
    }
    sol.radius_hint = radius;
    return sol;
}

// Residual of the truncated series in the homogeneous equation at s.
inline double homogeneous_residual(const LaplaceODE& lode, const FrobeniusSolution& sol,
                                   double s) {
    return lode.p(s) * sol.deriv2(s) + lode.l(s) * sol.deriv1(s) + lode.r(s) * sol.value(s);
}

// Same residual, evaluated from the recurrence tail instead of by direct
// substitution. The collected coefficients of s^{rho+t-1} vanish for t <= N
// by construction, so the residual is exactly the finitely many orders t > N
// still fed by the retained gammas. Direct substitution computes the same
// quantity, but underflows into rounding noise long before the truncation
// term does, which makes it useless for measuring the decay order.
inline double truncation_residual(const LaplaceODE& lode, const FrobeniusSolution& sol,
                                  double s) {
    const int N = static_cast<int>(sol.gamma.size()) - 1;
    const int deg = static_cast<int>(std::max(
        {lode.p.degree() > 0 ? lode.p.degree() - 1 : 0, lode.l.degree(), lode.r.degree() + 1}));
    KahanSum acc;
    for (int t = N + 1; t <= N + deg; ++t) {
        KahanSum e_t;
        for (int m = 0; m <= N; ++m) {
            const double e = sol.rho + m;
            const double gm = sol.gamma[static_cast<std::size_t>(m)];
            e_t.add(gm * (lode.p.coeff(static_cast<std::size_t>(t + 1 - m)) * e * (e - 1.0) +
                          lode.l.coeff(static_cast<std::size_t>(t - m)) * e));
            e_t.add(gm * lode.r.coeff(static_cast<std::size_t>(t - 1 - m)));
        }
        acc.add(e_t.value() * std::pow(s, static_cast<double>(t)));
    }
    return std::pow(s, sol.rho - 1.0) * acc.value();
}

// Power-law exponent of the ruin probability, available once the theorem's
// preconditions hold. The multiplicative constant is not computed.
inline double predicted_tail(const ModelParams& params) {
    const GateReport gate = check_theorem_preconditions(params);
    if (!gate.passed())
        throw std::domain_error(
            "predicted_tail: theorem preconditions fail (beta not in (0,1) or no "
            "fractional-moment witness)");
    return gate.beta;
}

}  // namespace ruin
