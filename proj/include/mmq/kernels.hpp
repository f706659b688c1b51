#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "airy.hpp"
#include "numerics.hpp"

namespace mmq {

enum class Abscissa {
    Fixed,   // Re lambda = re_offset
    Saddle,  // Re lambda chosen to minimise int |f|, crossing poles with residues if that helps
};

struct BromwichSpec {
    double re_offset = 1.0;
    double half_length = 30.0;
    int n_nodes = 4000;
    Abscissa abscissa = Abscissa::Fixed;
    double tail_tol = 1e-12;

    void validate() const {
        if (abscissa == Abscissa::Fixed && !(re_offset > 0.0)) throw DomainError("re_offset must be positive");
        if (n_nodes < 3) throw DomainError("n_nodes must be >= 3");
        if (!(half_length > 0.0)) throw DomainError("half_length must be positive");
    }
};

struct ContourResult {
    Scaled value;
    double abscissa = 0.0;
    int poles_crossed = 0;
    double tail_bound = 0.0;
    double condition = 1.0;  // int|f| / |int f|
};

namespace detail {

inline cplx log_ai(cplx z) {
    const auto s = airy_scaled(z);
    return std::log(s.ai) + s.log_scale;
}

struct LineSum {
    Scaled value;
    double abs_log = 0.0;  // log of (1/pi) int |f|
    double tail = 0.0;
};

// (1/pi) int_0^H Re f(c+iy) dy by the trapezoid rule, f = exp(logf)
template <class LogF>
LineSum line_trapezoid(const LogF& logf, double c, double H, int N) {
    const double h = H / N;
    std::vector<cplx> lf(N + 1);
    double ref = -std::numeric_limits<double>::infinity();
    for (int k = 0; k <= N; ++k) {
        lf[k] = logf(cplx(c, k * h));
        if (std::isfinite(lf[k].real())) ref = std::max(ref, lf[k].real());
    }
    if (!std::isfinite(ref)) throw NumericalError("contour integrand vanishes on the line", 0.0);
    double s = 0.0, sa = 0.0;
    for (int k = 0; k <= N; ++k) {
        if (!std::isfinite(lf[k].real())) continue;
        const double wk = (k == 0 || k == N) ? 0.5 : 1.0;
        const cplx f = std::exp(lf[k] - ref);
        s += wk * f.real();
        sa += wk * std::abs(f);
    }
    LineSum out;
    out.value = {s * h / pi, ref};
    out.abs_log = std::log(sa * h / pi) + ref;
    out.tail = std::exp(lf[N].real() - ref) / std::max(std::abs(s) * h / pi, 1e-300);
    return out;
}

template <class LogF>
LineSum line_integral(const LogF& logf, double c, const BromwichSpec& spec, bool extend) {
    double H = spec.half_length;
    int N = spec.n_nodes;
    LineSum r = line_trapezoid(logf, c, H, N);
    for (int grow = 0; extend && r.tail > spec.tail_tol && grow < 3; ++grow) {
        H *= 1.5;
        N = static_cast<int>(N * 1.5);
        r = line_trapezoid(logf, c, H, N);
    }
    if (r.tail > spec.tail_tol)
        throw AccuracyError("Bromwich truncation tail " + std::to_string(r.tail) + " above tolerance", r.tail);
    return r;
}

// log (1/pi) int_0^H |f| on a coarse grid, used to place the contour
template <class LogF>
double abs_objective(const LogF& logf, double c, double H) {
    const int n = 48;
    const double h = H / n;
    double ref = -std::numeric_limits<double>::infinity();
    std::vector<double> v(n + 1);
    for (int k = 0; k <= n; ++k) {
        v[k] = logf(cplx(c, k * h)).real();
        if (std::isfinite(v[k])) ref = std::max(ref, v[k]);
    }
    if (!std::isfinite(ref)) return std::numeric_limits<double>::infinity();
    double s = 0.0;
    for (int k = 0; k <= n; ++k)
        if (std::isfinite(v[k])) s += ((k == 0 || k == n) ? 0.5 : 1.0) * std::exp(v[k] - ref);
    return std::log(s * h / pi) + ref;
}

// minimise the objective on (lo, hi); hi may be +inf
template <class Obj>
double place_abscissa(const Obj& obj, double lo, double hi) {
    std::vector<double> cs;
    if (std::isinf(hi)) {
        for (int k = 0; k <= 24; ++k) cs.push_back(lo + 0.05 * std::pow(10.0, 4.0 * k / 24.0));
    } else {
        for (int k = 1; k < 16; ++k) cs.push_back(lo + (hi - lo) * k / 16.0);
    }
    std::size_t best = 0;
    double fbest = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < cs.size(); ++k) {
        const double f = obj(cs[k]);
        if (f < fbest) { fbest = f; best = k; }
    }
    const double a = best == 0 ? (std::isinf(hi) ? lo + 0.02 : lo + 0.5 * (cs[0] - lo)) : cs[best - 1];
    const double b = best + 1 < cs.size() ? cs[best + 1] : (std::isinf(hi) ? 2.0 * cs[best] - lo : 0.5 * (cs[best] + hi));
    return num::find_min(obj, a, b, 20).first;
}

// Bromwich integral (1/2 pi i) int f over a vertical line right of all poles.
// poles(k), k = 1, 2, ... are the real double poles in decreasing order; residue(k) their residues.
template <class LogF, class PoleF, class ResF>
ContourResult bromwich(const LogF& logf, const PoleF& poles, const ResF& residue, const BromwichSpec& spec) {
    spec.validate();
    ContourResult res;
    if (spec.abscissa == Abscissa::Fixed) {
        const auto r = line_integral(logf, spec.re_offset, spec, false);
        res.value = r.value;
        res.abscissa = spec.re_offset;
        res.tail_bound = r.tail;
        res.condition = std::exp(r.abs_log - r.value.log_abs());
        return res;
    }
    const double H = spec.half_length;
    auto obj = [&](double c) { return abs_objective(logf, c, H); };
    Scaled acc{0.0, 0.0};
    double acc_abs = -std::numeric_limits<double>::infinity();
    bool have = false;
    for (int k = 0; k < 5; ++k) {
        const double lo = poles(k + 1);
        const double hi = k == 0 ? std::numeric_limits<double>::infinity() : poles(k);
        if (k > 0) {
            const Scaled rk = residue(k);
            acc = scaled_sum(acc, rk);
            acc_abs = std::max(acc_abs, rk.log_abs());
        }
        const double c = place_abscissa(obj, lo, hi);
        LineSum r;
        try {
            r = line_integral(logf, c, spec, true);
        } catch (const AccuracyError&) {
            if (have) break;
            throw;
        }
        const Scaled total = scaled_sum(acc, r.value);
        const double cond = std::exp(std::max(r.abs_log, acc_abs) - total.log_abs());
        if (!have || cond < res.condition) {
            res.value = total;
            res.abscissa = c;
            res.poles_crossed = k;
            res.tail_bound = r.tail;
            res.condition = cond;
            have = true;
        }
        if (res.condition < 1e3) break;
    }
    return res;
}

} // namespace detail

inline BromwichSpec saddle_spec(double half_length = 20.0, int n_nodes = 800) {
    BromwichSpec s;
    s.half_length = half_length;
    s.n_nodes = n_nodes;
    s.abscissa = Abscissa::Saddle;
    return s;
}

// wp(Omega) = (1/2 pi i) int e^{-lambda Omega} / Ai(2^{1/3} lambda)^2 d lambda
inline ContourResult wp_kernel_scaled(double Omega, const BromwichSpec& spec = {}) {
    const double c13 = std::cbrt(2.0);
    auto logf = [=](cplx lam) { return -lam * Omega - 2.0 * detail::log_ai(c13 * lam); };
    auto poles = [=](int k) { return airy_zero(k) / c13; };
    auto residue = [=](int k) {
        const double a = airy_zero(k);
        const double ap = airy_ai_prime(a);
        const double lp = a / c13;
        return Scaled{-Omega / (c13 * c13 * ap * ap), -lp * Omega};
    };
    return detail::bromwich(logf, poles, residue, spec);
}

inline double wp_kernel(double Omega, const BromwichSpec& spec = {}) { return wp_kernel_scaled(Omega, spec).value.value(); }

struct CornerConstants {
    double k, m, C;  // exponent rate, shift rate, prefactor
};

inline CornerConstants corner_constants(double D) {
    return {std::pow(2.0, -2.0 / 3.0) * std::pow(D, -1.0 / 3.0), std::pow(2.0, -1.0 / 3.0) * std::pow(D, -2.0 / 3.0),
            1.0 / (std::sqrt(2.0 * pi) * std::cbrt(2.0) * std::pow(D, 2.0 / 3.0))};
}

// L_C(mu, gamma) of the corner layer, including its 1/(sqrt(2 pi) 2^{1/3} D^{2/3}) prefactor
inline ContourResult corner_kernel_scaled(double mu, double gamma, double D, const BromwichSpec& spec = {}) {
    if (!(mu >= 0.0)) throw DomainError("corner_kernel requires mu >= 0");
    if (!(D > 0.0)) throw DomainError("D must be positive");
    const auto cc = corner_constants(D);
    const double kg = cc.k * gamma, shift = cc.m * mu;
    auto logf = [=](cplx lam) { return kg * lam + detail::log_ai(lam + shift) - 2.0 * detail::log_ai(lam); };
    auto poles = [](int k) { return airy_zero(k); };
    auto residue = [=](int k) {
        const double a = airy_zero(k);
        const double ap = airy_ai_prime(a);
        const auto s = airy_scaled(cplx(a + shift, 0.0));
        return Scaled{(kg * s.ai.real() + s.aip.real()) / (ap * ap), kg * a + s.log_scale};
    };
    auto r = detail::bromwich(logf, poles, residue, spec);
    r.value.log_scale += std::log(cc.C);
    return r;
}

inline double corner_kernel(double mu, double gamma, double D, const BromwichSpec& spec = {}) {
    return corner_kernel_scaled(mu, gamma, D, spec).value.value();
}

// Lambda(gamma) by the rho-form: 2^{1/3} D^{2/3} (1/2 pi i) int_Br Ai(lambda)^{-2} int_lambda^{inf} e^{k gamma rho} Ai(rho) d rho d lambda
inline ContourResult lambda_integral_scaled(double gamma, double D, const BromwichSpec& spec = {}) {
    if (!(D > 0.0)) throw DomainError("D must be positive");
    const double kg = corner_constants(D).k * gamma;
    static const auto gl = num::gauss_legendre(20);
    auto logf = [=](cplx lam) {
        const auto a0 = airy_scaled(lam);
        // int_0^inf e^{kg u} Ai(lam+u)/Ai(lam) du on unit panels
        cplx acc = 0.0;
        double peak = 0.0;
        for (int p = 0; p < 400; ++p) {
            cplx panel = 0.0;
            double pmax = 0.0;
            for (std::size_t i = 0; i < gl.first.size(); ++i) {
                const double u = p + 0.5 * (gl.first[i] + 1.0);
                const auto au = airy_scaled(lam + u);
                const cplx v = au.ai / a0.ai * std::exp(kg * u + au.log_scale - a0.log_scale);
                panel += 0.5 * gl.second[i] * v;
                pmax = std::max(pmax, std::abs(v));
            }
            acc += panel;
            peak = std::max(peak, pmax);
            if (p >= 2 && pmax < 1e-18 * std::max(peak, std::abs(acc))) break;
        }
        return kg * lam - std::log(a0.ai) - a0.log_scale + std::log(acc);
    };
    auto poles = [](int k) { return airy_zero(k); };
    auto residue = [](int) -> Scaled { throw UsageError("lambda_integral does not cross poles"); };
    BromwichSpec s = spec;
    s.abscissa = Abscissa::Fixed;
    auto r = detail::bromwich(logf, poles, residue, s);
    r.value.log_scale += std::log(std::cbrt(2.0) * std::pow(D, 2.0 / 3.0));
    return r;
}

inline double lambda_integral(double gamma, double D, const BromwichSpec& spec = {}) {
    return lambda_integral_scaled(gamma, D, spec).value.value();
}

} // namespace mmq
