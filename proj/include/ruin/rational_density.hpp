#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "ruin/poly.hpp"
#include "ruin/quadrature.hpp"
#include "ruin/rng.hpp"

namespace ruin {

// Jump-size law whose density f solves  sum_j ode_coeffs[j] f^(j)(x) = 0
// with boundary data f^(k)(0+) = boundary_values[k], k = 0..n-1.
struct RationalDensitySpec {
    int order = 0;                        // n
    std::vector<double> ode_coeffs;       // alpha^0 .. alpha^n, ascending
    std::vector<double> boundary_values;  // f^0 .. f^{n-1}

    double alpha(std::size_t j) const {
        return j < ode_coeffs.size() ? ode_coeffs[j] : 0.0;
    }
    double boundary(std::size_t k) const {
        return k < boundary_values.size() ? boundary_values[k] : 0.0;
    }
};

struct ValidationCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationCheck> checks;
    bool passed() const {
        for (const auto& c : checks)
            if (!c.passed) return false;
        return true;
    }
};

struct RationalFunction {
    Poly numerator;
    Poly denominator;

    double operator()(double s) const { return numerator(s) / denominator(s); }
};

namespace detail {

inline Poly characteristic_poly(const RationalDensitySpec& spec) {
    return Poly(spec.ode_coeffs);
}

// Companion matrix of the monic operator, state (f, f', ..., f^(n-1)).
inline Eigen::MatrixXd companion_matrix(const RationalDensitySpec& spec) {
    const int n = spec.order;
    const double lead = spec.ode_coeffs[static_cast<std::size_t>(n)];
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i + 1 < n; ++i) A(i, i + 1) = 1.0;
    for (int j = 0; j < n; ++j)
        A(n - 1, j) = -spec.ode_coeffs[static_cast<std::size_t>(j)] / lead;
    return A;
}

// Companion system augmented with an integrator row: state (F, f, ..., f^(n-1)).
inline Eigen::MatrixXd augmented_matrix(const RationalDensitySpec& spec) {
    const int n = spec.order;
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n + 1, n + 1);
    B(0, 1) = 1.0;
    B.block(1, 1, n, n) = companion_matrix(spec);
    return B;
}

inline Eigen::VectorXd boundary_vector(const RationalDensitySpec& spec) {
    Eigen::VectorXd v(spec.order);
    for (int k = 0; k < spec.order; ++k) v(k) = spec.boundary_values[static_cast<std::size_t>(k)];
    return v;
}

// Slowest decay rate: min |Re lambda| over the roots of P.
inline double min_abs_real_root(const RationalDensitySpec& spec) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& r : characteristic_poly(spec).roots())
        m = std::min(m, std::abs(r.real()));
    return m;
}

inline double max_real_root(const RationalDensitySpec& spec) {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& r : characteristic_poly(spec).roots()) m = std::max(m, r.real());
    return m;
}

}  // namespace detail

// Upper end of the numeric validation / quadrature window.
inline double density_support_cutoff(const RationalDensitySpec& spec) {
    const double rate = detail::min_abs_real_root(spec);
    return 50.0 / std::max(rate, 1e-12);
}

inline double density(const RationalDensitySpec& spec, double x) {
    if (x < 0.0) throw std::invalid_argument("density: x must be nonnegative");
    if (x == 0.0) return spec.boundary_values[0];
    const Eigen::MatrixXd E = (detail::companion_matrix(spec) * x).exp();
    return (E * detail::boundary_vector(spec))(0);
}

inline double cdf(const RationalDensitySpec& spec, double x) {
    if (x < 0.0) throw std::invalid_argument("cdf: x must be nonnegative");
    if (x == 0.0) return 0.0;
    const int n = spec.order;
    Eigen::VectorXd y0(n + 1);
    y0(0) = 0.0;
    y0.tail(n) = detail::boundary_vector(spec);
    const Eigen::MatrixXd E = (detail::augmented_matrix(spec) * x).exp();
    return (E * y0)(0);
}

// Laplace transform of f: transforms the density ODE term by term with the
// derivative rule, yielding a proper rational fraction with denominator P(s).
inline RationalFunction laplace_transform(const RationalDensitySpec& spec) {
    const int n = spec.order;
    std::vector<double> num(static_cast<std::size_t>(n), 0.0);
    // coeff of s^j: sum_{k=j+1}^{n} alpha^k f^{k-1-j}
    for (int j = 0; j < n; ++j) {
        KahanSum acc;
        for (int k = j + 1; k <= n; ++k)
            acc.add(spec.alpha(static_cast<std::size_t>(k)) *
                    spec.boundary(static_cast<std::size_t>(k - 1 - j)));
        num[static_cast<std::size_t>(j)] = acc.value();
    }
    return RationalFunction{Poly(std::move(num)), detail::characteristic_poly(spec)};
}

inline ValidationReport validate(const RationalDensitySpec& spec) {
    ValidationReport rep;
    auto push = [&rep](std::string name, bool ok, std::string detail = {}) {
        rep.checks.push_back({std::move(name), ok, std::move(detail)});
    };

    const int n = spec.order;
    const bool shape_ok = n >= 1 &&
                          spec.ode_coeffs.size() == static_cast<std::size_t>(n) + 1 &&
                          spec.boundary_values.size() == static_cast<std::size_t>(n);
    push("shape", shape_ok,
         shape_ok ? "" : "order/coefficient/boundary lengths inconsistent");
    if (!shape_ok) return rep;

    push("alpha0_nonzero", spec.ode_coeffs[0] != 0.0);
    push("alphaN_nonzero", spec.ode_coeffs[static_cast<std::size_t>(n)] != 0.0);
    if (!rep.passed()) return rep;

    // Normalization: sum alpha^{i+1} f^i = alpha^0  <=>  fhat(0) = 1.
    KahanSum norm;
    for (int i = 0; i < n; ++i)
        norm.add(spec.alpha(static_cast<std::size_t>(i + 1)) *
                 spec.boundary(static_cast<std::size_t>(i)));
    const double scale = std::max(std::abs(spec.ode_coeffs[0]), 1.0);
    push("normalization", std::abs(norm.value() - spec.ode_coeffs[0]) <= 1e-12 * scale,
         "sum alpha^{i+1} f^i = " + std::to_string(norm.value()) +
             ", alpha^0 = " + std::to_string(spec.ode_coeffs[0]));

    // Integrability: roots of P in the open left half-plane.
    const double max_re = detail::max_real_root(spec);
    push("roots_left_half_plane", max_re < 0.0,
         "max Re(root) = " + std::to_string(max_re));
    if (!rep.passed()) return rep;

    // Nonnegativity scan on a hybrid linear+geometric grid.
    const double x_max = density_support_cutoff(spec);
    double fmax = 0.0, fmin = 0.0;
    const int pts = 2048;
    const Eigen::MatrixXd A = detail::companion_matrix(spec);
    const Eigen::VectorXd f0 = detail::boundary_vector(spec);
    const int half = pts / 2;
    for (int i = 0; i <= pts; ++i) {
        double x;
        if (i <= half) {
            x = x_max * 0.1 * i / half;  // linear sweep over the head
        } else {
            const double t = static_cast<double>(i - half) / half;
            x = x_max * 0.1 * std::pow(10.0, t);  // geometric sweep to x_max
        }
        const double f = x == 0.0 ? f0(0) : ((A * x).exp() * f0)(0);
        fmax = std::max(fmax, f);
        fmin = std::min(fmin, f);
    }
    push("nonnegative_density", fmin >= -1e-10 * std::max(fmax, 1.0),
         "min f on grid = " + std::to_string(fmin));
    return rep;
}

inline void require_valid(const RationalDensitySpec& spec) {
    const auto rep = validate(spec);
    if (rep.passed()) return;
    std::string what = "invalid density spec:";
    for (const auto& c : rep.checks)
        if (!c.passed) what += " [" + c.name + (c.detail.empty() ? "" : ": " + c.detail) + "]";
    throw std::invalid_argument(what);
}

// Inverse-CDF draw: bracketing bisection, then Newton polish to 1e-12 in F.
inline double quantile(const RationalDensitySpec& spec, double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) throw std::invalid_argument("quantile: u must lie in [0, 1)");
    double lo = 0.0, hi = 1.0 / std::max(detail::min_abs_real_root(spec), 1e-12);
    const double cutoff = density_support_cutoff(spec);
    while (cdf(spec, hi) < u) {
        hi *= 2.0;
        if (hi > 64.0 * cutoff)
            throw std::runtime_error("quantile: failed to bracket (density not integrable?)");
    }
    for (int i = 0; i < 40 && hi - lo > 1e-14 * (1.0 + hi); ++i) {
        const double mid = 0.5 * (lo + hi);
        (cdf(spec, mid) < u ? lo : hi) = mid;
    }
    double x = 0.5 * (lo + hi);
    for (int i = 0; i < 60; ++i) {
        const double err = cdf(spec, x) - u;
        if (std::abs(err) <= 1e-12) break;
        const double f = density(spec, x);
        double step = f > 0.0 ? err / f : 0.0;
        if (step == 0.0) break;
        double xn = x - step;
        if (xn <= lo || xn >= hi) xn = 0.5 * (lo + hi);  // fall back into bracket
        (cdf(spec, xn) < u ? lo : hi) = xn;
        x = xn;
    }
    return x;
}

inline double sample(const RationalDensitySpec& spec, RngStream& rng) {
    return quantile(spec, rng.uniform());
}

// E xi^{beta_prime} for beta_prime in (0,1); theorem-applicability gate.
inline double fractional_moment(const RationalDensitySpec& spec, double beta_prime) {
    if (!(beta_prime > 0.0 && beta_prime < 1.0))
        throw std::invalid_argument("fractional_moment: beta_prime must lie in (0,1)");
    // Truncate where the remaining tail contributes < 1e-10 of the head.
    double x_max = 1.0;
    while (std::pow(x_max, beta_prime) * (1.0 - cdf(spec, x_max)) > 1e-13 &&
           x_max < 64.0 * density_support_cutoff(spec))
        x_max *= 2.0;

    const AdaptiveSimpson quad(1e-10, 1e-14);
    // Head: substitute x = t^2 to tame the x^{beta'} cusp at 0.
    const double head = quad.integrate(
        [&](double t) {
            const double x = t * t;
            return 2.0 * t * std::pow(x, beta_prime) * density(spec, x);
        },
        0.0, 1.0);
    const double tail = quad.integrate(
        [&](double x) { return std::pow(x, beta_prime) * density(spec, x); }, 1.0, x_max);
    return head + tail;
}

// ---- named presets ----

inline RationalDensitySpec make_exponential(double mu) {
    if (!(mu > 0.0)) throw std::invalid_argument("exp preset: mu must be positive");
    return RationalDensitySpec{1, {mu, 1.0}, {mu}};
}

inline RationalDensitySpec make_erlang(int k, double mu) {
    if (k < 1 || !(mu > 0.0)) throw std::invalid_argument("erlang preset: need k >= 1, mu > 0");
    // P(s) = (s + mu)^k, f^(j)(0) = 0 for j < k-1, f^(k-1)(0) = mu^k.
    Poly p({1.0});
    for (int i = 0; i < k; ++i) p = p * Poly({mu, 1.0});
    std::vector<double> f(static_cast<std::size_t>(k), 0.0);
    f[static_cast<std::size_t>(k - 1)] = std::pow(mu, k);
    return RationalDensitySpec{k, p.coeffs(), std::move(f)};
}

inline RationalDensitySpec make_hyperexponential(const std::vector<double>& p,
                                                 const std::vector<double>& mu) {
    if (p.size() != mu.size() || p.empty())
        throw std::invalid_argument("hyperexp preset: p and mu must be nonempty, equal length");
    double psum = 0.0;
    for (double pi : p) psum += pi;
    if (std::abs(psum - 1.0) > 1e-12)
        throw std::invalid_argument("hyperexp preset: weights must sum to 1");
    const int n = static_cast<int>(p.size());
    Poly P({1.0});
    for (double m : mu) P = P * Poly({m, 1.0});
    std::vector<double> f(static_cast<std::size_t>(n), 0.0);
    for (int j = 0; j < n; ++j) {
        KahanSum acc;
        for (int i = 0; i < n; ++i)
            acc.add(p[static_cast<std::size_t>(i)] * mu[static_cast<std::size_t>(i)] *
                    std::pow(-mu[static_cast<std::size_t>(i)], j));
        f[static_cast<std::size_t>(j)] = acc.value();
    }
    return RationalDensitySpec{n, P.coeffs(), std::move(f)};
}

}  // namespace ruin
