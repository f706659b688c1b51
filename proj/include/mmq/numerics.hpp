#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "errors.hpp"

namespace mmq {

using cplx = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846264338327950288;

// value = mantissa * exp(log_scale)
struct Scaled {
    double mantissa = 0.0;
    double log_scale = 0.0;

    double log_abs() const { return std::log(std::abs(mantissa)) + log_scale; }
    double value() const {
        const double la = log_abs();
        if (la > 709.0) throw OverflowError("scaled value exceeds double range");
        return mantissa * std::exp(log_scale);
    }
};

inline Scaled scaled_sum(const Scaled& a, const Scaled& b) {
    if (a.mantissa == 0.0) return b;
    if (b.mantissa == 0.0) return a;
    const double L = std::max(a.log_scale, b.log_scale);
    return {a.mantissa * std::exp(a.log_scale - L) + b.mantissa * std::exp(b.log_scale - L), L};
}

namespace num {

// bracketed root, throws SearchError when f(a), f(b) share a sign
template <class F>
double find_root(F f, double a, double b, double xtol = 1e-15, int max_iter = 200) {
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0) == (fb > 0)) throw SearchError("root not bracketed");
    std::uintmax_t it = static_cast<std::uintmax_t>(max_iter);
    auto tol = [xtol](double u, double v) { return std::abs(u - v) <= xtol * std::max(1.0, std::abs(u)); };
    auto r = boost::math::tools::toms748_solve(f, a, b, fa, fb, tol, it);
    return 0.5 * (r.first + r.second);
}

// local minimum on [a, b]; returns (argmin, min)
template <class F>
std::pair<double, double> find_min(F f, double a, double b, int bits = 50) {
    std::uintmax_t it = 500;
    return boost::math::tools::brent_find_minima(f, a, b, bits, it);
}

// adaptive Gauss-Kronrod; err receives the estimate
template <class F>
double integrate(F f, double a, double b, double rel_tol = 1e-12, double* err = nullptr, unsigned depth = 20) {
    double e = 0.0;
    double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, depth, rel_tol, &e);
    if (err) *err = e;
    return v;
}

// generalized Gauss-Laguerre rule for weight u^alpha e^{-u} (Golub-Welsch)
inline std::pair<std::vector<double>, std::vector<double>> gauss_laguerre(int n, double alpha) {
    Eigen::VectorXd diag(n), sub(n - 1);
    for (int k = 0; k < n; ++k) diag(k) = 2.0 * k + alpha + 1.0;
    for (int k = 1; k < n; ++k) sub(k - 1) = std::sqrt(k * (k + alpha));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    const double mu0 = std::tgamma(alpha + 1.0);
    std::vector<double> x(n), w(n);
    for (int k = 0; k < n; ++k) {
        x[k] = es.eigenvalues()(k);
        const double v0 = es.eigenvectors()(0, k);
        w[k] = mu0 * v0 * v0;
    }
    return {x, w};
}

// Gauss-Legendre rule on [-1, 1] (Newton on P_n)
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
    std::vector<double> x(n), w(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    return {x, w};
}

// centered first difference
template <class F>
double diff(F f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

} // namespace num
} // namespace mmq
