#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace ruin {

// Adaptive Simpson integration on [a, b] with absolute/relative tolerance.
// A minimum recursion depth forces initial bisections so a peak sitting
// between the first coarse samples is not silently missed; the maximum depth
// is capped and exceeding it raises (quadrature non-convergence).
class AdaptiveSimpson {
public:
    AdaptiveSimpson(double rel_tol = 1e-10, double abs_tol = 1e-14, int max_depth = 48,
                    int min_depth = 6)
        : rel_tol_(rel_tol), abs_tol_(abs_tol), max_depth_(max_depth), min_depth_(min_depth) {}

    template <class F>
    double integrate(F&& f, double a, double b) const {
        if (!(b > a)) return 0.0;
        const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
        const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        return recurse(f, a, b, fa, fm, fb, whole, max_depth_, max_depth_ - min_depth_);
    }

private:
    template <class F>
    double recurse(F&& f, double a, double b, double fa, double fm, double fb,
                   double whole, int depth, int accept_below) const {
        const double m = 0.5 * (a + b);
        const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
        const double flm = f(lm), frm = f(rm);
        const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        const double delta = left + right - whole;
        const double tol = std::max(abs_tol_, rel_tol_ * std::abs(left + right));
        if (depth <= accept_below && std::abs(delta) <= 15.0 * tol)
            return left + right + delta / 15.0;
        if (depth <= 0)
            throw std::runtime_error("adaptive quadrature failed to converge");
        return recurse(f, a, m, fa, flm, fm, left, depth - 1, accept_below) +
               recurse(f, m, b, fm, frm, fb, right, depth - 1, accept_below);
    }

    double rel_tol_;
    double abs_tol_;
    int max_depth_;
    int min_depth_;
};

// Finite-difference weights on an arbitrary stencil (Fornberg's recursion).
// Returns w such that f^(m)(x0) ~ sum_i w[i] f(x[i]).
inline std::vector<double> fd_weights(double x0, const std::vector<double>& x, int m) {
    const int n = static_cast<int>(x.size()) - 1;
    if (m > n) throw std::invalid_argument("fd_weights: stencil too small for order");
    std::vector<std::vector<double>> c(
        static_cast<std::size_t>(n + 1), std::vector<double>(static_cast<std::size_t>(m + 1), 0.0));
    double c1 = 1.0;
    double c4 = x[0] - x0;
    c[0][0] = 1.0;
    for (int i = 1; i <= n; ++i) {
        const int mn = std::min(i, m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[static_cast<std::size_t>(i)] - x0;
        for (int j = 0; j < i; ++j) {
            const double c3 = x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(j)];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    c[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] =
                        c1 * (k * c[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(k - 1)] -
                              c5 * c[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(k)]) / c2;
                c[static_cast<std::size_t>(i)][0] =
                    -c1 * c5 * c[static_cast<std::size_t>(i - 1)][0] / c2;
            }
            for (int k = mn; k >= 1; --k)
                c[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] =
                    (c4 * c[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] -
                     k * c[static_cast<std::size_t>(j)][static_cast<std::size_t>(k - 1)]) / c3;
            c[static_cast<std::size_t>(j)][0] =
                c4 * c[static_cast<std::size_t>(j)][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) w[i] = c[i][static_cast<std::size_t>(m)];
    return w;
}

// Central finite difference of order `deriv` with an 8th-order stencil.
template <class F>
double central_diff(F&& f, double x0, int deriv, double h) {
    const int half = 4 + (deriv + 1) / 2;
    std::vector<double> nodes;
    nodes.reserve(static_cast<std::size_t>(2 * half + 1));
    for (int i = -half; i <= half; ++i) nodes.push_back(x0 + i * h);
    const auto w = fd_weights(x0, nodes, deriv);
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) acc += w[i] * f(nodes[i]);
    return acc;
}

}  // namespace ruin
