#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace ruin {

// Dense real polynomial, coefficients in ascending degree: c[0] + c[1] s + ...
class Poly {
public:
    Poly() : coeffs_{0.0} {}
    explicit Poly(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
        if (coeffs_.empty()) coeffs_.push_back(0.0);
    }

    static Poly zero(std::size_t degree_hint = 0) {
        return Poly(std::vector<double>(degree_hint + 1, 0.0));
    }

    const std::vector<double>& coeffs() const { return coeffs_; }
    double coeff(std::size_t i) const { return i < coeffs_.size() ? coeffs_[i] : 0.0; }
    double& at(std::size_t i) {
        if (i >= coeffs_.size()) coeffs_.resize(i + 1, 0.0);
        return coeffs_[i];
    }

    // Degree of the trimmed polynomial (0 for the zero polynomial).
    std::size_t degree(double tol = 0.0) const {
        for (std::size_t i = coeffs_.size(); i-- > 1;)
            if (std::abs(coeffs_[i]) > tol) return i;
        return 0;
    }

    bool is_zero(double tol = 0.0) const {
        return std::all_of(coeffs_.begin(), coeffs_.end(),
                           [tol](double c) { return std::abs(c) <= tol; });
    }

    double operator()(double s) const {
        double acc = 0.0;
        for (std::size_t i = coeffs_.size(); i-- > 0;) acc = acc * s + coeffs_[i];
        return acc;
    }

    std::complex<double> operator()(std::complex<double> s) const {
        std::complex<double> acc = 0.0;
        for (std::size_t i = coeffs_.size(); i-- > 0;) acc = acc * s + coeffs_[i];
        return acc;
    }

    Poly derivative() const {
        if (coeffs_.size() <= 1) return Poly();
        std::vector<double> d(coeffs_.size() - 1);
        for (std::size_t i = 1; i < coeffs_.size(); ++i)
            d[i - 1] = coeffs_[i] * static_cast<double>(i);
        return Poly(std::move(d));
    }

    friend Poly operator*(const Poly& a, const Poly& b) {
        std::vector<double> c(a.coeffs_.size() + b.coeffs_.size() - 1, 0.0);
        for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
            for (std::size_t j = 0; j < b.coeffs_.size(); ++j)
                c[i + j] += a.coeffs_[i] * b.coeffs_[j];
        return Poly(std::move(c));
    }

    friend Poly operator*(double k, const Poly& p) {
        std::vector<double> c = p.coeffs_;
        for (double& x : c) x *= k;
        return Poly(std::move(c));
    }

    friend Poly operator+(const Poly& a, const Poly& b) {
        std::vector<double> c(std::max(a.coeffs_.size(), b.coeffs_.size()), 0.0);
        for (std::size_t i = 0; i < c.size(); ++i) c[i] = a.coeff(i) + b.coeff(i);
        return Poly(std::move(c));
    }

    // Roots via the companion-matrix eigenvalues of the trimmed polynomial.
    std::vector<std::complex<double>> roots() const {
        const std::size_t n = degree();
        if (n == 0) return {};
        Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                                     static_cast<Eigen::Index>(n));
        const double lead = coeffs_[n];
        for (std::size_t i = 1; i < n; ++i) comp(static_cast<Eigen::Index>(i),
                                                static_cast<Eigen::Index>(i - 1)) = 1.0;
        for (std::size_t i = 0; i < n; ++i)
            comp(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n - 1)) =
                -coeffs_[i] / lead;
        Eigen::EigenSolver<Eigen::MatrixXd> es(comp, /*computeEigenvectors=*/false);
        std::vector<std::complex<double>> out(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = es.eigenvalues()(static_cast<Eigen::Index>(i));
        return out;
    }

private:
    std::vector<double> coeffs_;
};

// Kahan-compensated accumulator for coefficient collection.
class KahanSum {
public:
    void add(double x) {
        const double y = x - comp_;
        const double t = sum_ + y;
        comp_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

}  // namespace ruin
