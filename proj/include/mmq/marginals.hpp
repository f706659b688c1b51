#pragma once

#include <boost/math/tools/roots.hpp>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "core_model.hpp"
#include "errors.hpp"
#include "kernels.hpp"
#include "layer_eval.hpp"
#include "layers.hpp"
#include "numerics.hpp"

namespace mmq {

inline double x1_of_eta(double eta, double D) {
    if (!(eta >= 0.0 && eta < 1.0 / (D + 1.0))) throw DomainError("x1_of_eta requires 0 <= eta < 1/(D+1)");
    return -2.0 * eta - (2.0 * D * eta - D + 2.0 * eta - 2.0) / D * std::log((1.0 - eta) / (1.0 - (D + 1.0) * eta));
}

// the saddle curve in the variable L = ln[(1 - (D+1)E)/(1 - E)] <= 0
struct SaddlePoint {
    double E;
    double L;
};

namespace detail {

inline double E_of_L(double L, double D) { return -std::expm1(L) / (D - std::expm1(L)); }

inline double x_of_L(double L, double D) {
    const double E = E_of_L(L, D);
    return -2.0 * E + (2.0 * (D + 1.0) * E - D - 2.0) * L / D;
}

} // namespace detail

inline SaddlePoint saddle_of_x(double x, double D) {
    if (!(x >= 0.0)) throw DomainError("E_of_x requires x >= 0");
    if (x == 0.0) return {0.0, 0.0};
    auto f = [&](double L) { return detail::x_of_L(L, D) - x; };
    double lo = -std::max(1.0, 2.0 * x);
    while (f(lo) < 0.0) lo *= 2.0;
    std::uintmax_t it = 200;
    auto r = boost::math::tools::toms748_solve(f, lo, 0.0, boost::math::tools::eps_tolerance<double>(52), it);
    const double L = 0.5 * (r.first + r.second);
    return {detail::E_of_L(L, D), L};
}

inline double E_of_x(double x, double D) { return saddle_of_x(x, D).E; }

// residual of the defining relation -2E + (2(D+1)E - D - 2) ln[...] / D = x
inline double E_residual(double x, double E, double D) {
    return -2.0 * E + (2.0 * (D + 1.0) * E - D - 2.0) / D * std::log((1.0 - (D + 1.0) * E) / (1.0 - E)) - x;
}

struct MarginalSample {
    double x = 0.0;
    double E = 0.0;
    double psi1 = 0.0;
    double delta = 0.0;
    LayerEval split;  // nu = -1, phase_1 = psi1, amplitude = (1-E)^2/sqrt(delta)
    double log_value(double eps) const { return split.log_value(eps); }
};

struct MarginalCurve {
    std::vector<MarginalSample> samples;
    double eps = 0.0;
    double D = 0.0;
};

inline double psi1_of_x(double x, double D) {
    const auto sp = saddle_of_x(x, D);
    const double E = sp.E;
    return E * (1.0 - E) / D + (D + 1.0) / (D * D) * (1.0 - E) * (1.0 - E) * sp.L;
}

inline MarginalSample M_of_x(double x, const ModelParams& params) {
    params.validate();
    const double D = params.D;
    const auto sp = saddle_of_x(x, D);
    const double E = sp.E, oe = 1.0 - E;
    MarginalSample m;
    m.x = x;
    m.E = E;
    m.psi1 = E * oe / D + (D + 1.0) / (D * D) * oe * oe * sp.L;
    // 1 - (D+1)E = (1-E) e^L
    m.delta = 2.0 * oe * oe * std::exp(sp.L) * (x + 2.0 * E) * (D + 1.0) * D / (2.0 * (D + 1.0) * E - D - 2.0) +
              D * (D + 2.0 * E - 2.0 * (D + 1.0) * E * E);
    m.split.nu = {-1, 1};
    m.split.phase_1 = m.psi1;
    m.split.amplitude = oe * oe / std::sqrt(m.delta);
    m.split.tag = classify_point({x, E}, params);
    return m;
}

inline MarginalCurve marginal_curve(const std::vector<double>& xs, const ModelParams& params) {
    MarginalCurve c;
    c.eps = params.eps;
    c.D = params.D;
    for (double x : xs) c.samples.push_back(M_of_x(x, params));
    return c;
}

// natural logs of the two limiting forms
inline double log_M_small_x(double x, const ModelParams& p) {
    const double D = p.D;
    if (!(x >= 0.0 && x < D)) throw DomainError("log_M_small_x requires 0 <= x < D");
    return -std::log(p.eps) - std::log(D) + std::log1p(-x / D) + (-x / D + x * x / (2.0 * D * D)) / p.eps;
}

inline double log_M_large_x(double x, const ModelParams& p) {
    const double D = p.D, d1 = 1.0 + D;
    return -std::log(p.eps) + std::log(D / (d1 * d1) + (2.0 * D + 1.0) / (D * d1 * d1) * std::exp(-x - 2.0 / d1)) -
           (x / d1 + 1.0 / (d1 * d1)) / p.eps;
}

// int_0^inf M(x) dx
inline double M_normalization(const ModelParams& params, double rel_tol = 1e-10) {
    auto f = [&](double x) { return std::exp(M_of_x(x, params).log_value(params.eps)); };
    double total = 0.0, a = 0.0, w = 10.0 * params.eps;
    for (int k = 0; k < 60; ++k) {
        const double part = num::integrate(f, a, a + w, rel_tol);
        total += part;
        if (part < 1e-16 * total) break;
        a += w;
        w *= 2.0;
    }
    return total;
}

struct MarginalOptions {
    LayerOptions layers;
    BromwichSpec lambda_spec = [] {
        BromwichSpec s;
        s.half_length = 20.0;
        s.n_nodes = 400;
        return s;
    }();
    double rel_tol = 1e-8;
    unsigned max_depth = 6;  // integrand noise at small eps stalls deeper bisection
};

struct EtaMarginal {
    double ratio = 0.0;
    std::string method;
    std::vector<std::string> diagnostics;
};

// [int_0^inf F(x, eta) dx] / [(2 pi eps)^{-1/2} exp(-eta^2/(2 eps))]
inline EtaMarginal eta_marginal(double eta, const ModelParams& params, const MarginalOptions& opt = {}) {
    params.validate();
    const double eps = params.eps, D = params.D, e13 = std::cbrt(eps);
    const auto& th = opt.layers.thresholds;
    EtaMarginal out;
    if (std::abs(eta - 1.0) <= th.band * e13) {
        const double g = (eta - 1.0) / e13;
        const auto r = lambda_integral_scaled(g, D, opt.lambda_spec);
        out.ratio = std::exp(r.value.log_abs() - g * g * g / (12.0 * D)) / (std::cbrt(2.0) * std::pow(D, 2.0 / 3.0));
        out.method = "corner";
        return out;
    }
    const double logG = -0.5 * std::log(2.0 * pi * eps) - eta * eta / (2.0 * eps);
    bool cusp_hit = false;
    auto f = [&](double x) {
        LayerEval ev;
        try {
            ev = eval_composite({x, eta}, params, opt.layers);
        } catch (const UnsupportedRegionError&) {
            cusp_hit = true;
            ev = eval_F_regionI({x, eta}, params);
        }
        return std::exp(ev.log_value(eps) - logG);
    };
    std::vector<double> bp{0.0, th.small_v * eps};
    if (eta > 1.0) {
        const double X0 = x0_boundary(eta), w = th.transition_omega * e13;
        bp.push_back(th.inner_mu * e13 * e13);
        bp.push_back(X0 - w);
        bp.push_back(X0 + w);
        out.method = "layers+transition";
    } else {
        out.method = "layers+smallx";
    }
    std::sort(bp.begin(), bp.end());
    bp.erase(std::remove_if(bp.begin(), bp.end(), [](double v) { return v < 0.0; }), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < bp.size(); ++k) total += num::integrate(f, bp[k], bp[k + 1], opt.rel_tol, nullptr, opt.max_depth);
    double a = bp.back(), w = std::max(bp.back() - bp[bp.size() - 2], 8.0 * eps);
    for (int k = 0; k < 40; ++k) {
        const double part = num::integrate(f, a, a + w, opt.rel_tol, nullptr, opt.max_depth);
        total += part;
        if (part <= 1e-14 * total) break;
        a += w;
        w *= 2.0;
    }
    if (cusp_hit) out.diagnostics.push_back("cusp neighbourhood integrated with the Region I sum");
    out.ratio = total;
    return out;
}

inline double eta_marginal_ratio(double eta, const ModelParams& params, const MarginalOptions& opt = {}) {
    return eta_marginal(eta, params, opt).ratio;
}

} // namespace mmq
