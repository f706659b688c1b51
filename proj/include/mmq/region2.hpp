#pragma once

#include <cmath>
#include <optional>

#include "airy.hpp"
#include "core_model.hpp"
#include "errors.hpp"
#include "layer_eval.hpp"
#include "numerics.hpp"

namespace mmq {

struct RayCoordII {
    double tau = 0.0;
    double sigma = 1.0;
};

struct RayStateII {
    double x = 0.0;
    double eta = 0.0;
    double phi = 0.0;
    double phi_x = 0.0;
    double phi_eta = 0.0;
    double gamma_phase = 0.0;
    double jac_tilde = 0.0;
    std::optional<double> amp;  // empty at tau = 0
};

struct AB {
    double a, b;
};

inline AB ab_of_sigma(double sigma, double D) {
    if (!(sigma >= 1.0)) throw DomainError("ab_of_sigma requires sigma >= 1");
    return {(1.0 - sigma) / (2.0 * D), 0.5 * sigma + std::sqrt(beta_fn(sigma, D)) / (2.0 * std::sqrt(D))};
}

inline double phi0(double sigma, double D) {
    if (!(sigma >= 1.0)) throw DomainError("phi0 requires sigma >= 1");
    const double d1 = D + 1.0, sD = std::sqrt(D), c = D / std::pow(d1, 1.5);
    const double br = (sigma - 1.0 / d1) * std::sqrt(beta_fn(sigma, D)) + c * std::asinh((d1 * sigma - 1.0) / sD) -
                      D * sD / d1 - c * std::asinh(sD);
    return -0.25 - 0.25 * sigma * sigma - br / (4.0 * sD);
}

inline double gamma_prime(double sigma, double D) {
    return std::pow(2.0, -2.0 / 3.0) * std::pow(D, -1.0 / 6.0) * std::pow(beta_fn(sigma, D), -1.0 / 6.0) *
           airy_root_r0();
}

inline double gamma_phase(double sigma, double D) {
    if (!(sigma >= 1.0)) throw DomainError("gamma_phase requires sigma >= 1");
    if (sigma == 1.0) return 0.0;
    const double I = num::integrate([&](double u) { return std::pow(beta_fn(u, D), -1.0 / 6.0); }, 1.0, sigma, 1e-13);
    return std::pow(2.0, -2.0 / 3.0) * std::pow(D, -1.0 / 6.0) * airy_root_r0() * I;
}

inline double jacobian_II(double tau, double sigma, double D) {
    const double sb = std::sqrt(beta_fn(sigma, D)), iD = 1.0 / D, iD2 = iD * iD, iD32 = std::pow(D, -1.5),
                 iD12 = 1.0 / std::sqrt(D);
    const double ep = std::exp(tau), em = std::exp(-tau);
    const double cp = (-sigma + 1.0 + 0.5 * tau * (sigma - 1.0)) * iD2 + 0.5 * sb * (tau - 1.0) * iD32 +
                      (-sigma - 0.5 * tau + tau * sigma) * iD + 0.5 * tau * sb * iD12 + 0.5 * tau * sigma;
    const double cm = (0.5 * tau + 1.0) * (1.0 - sigma) * iD2 + 0.5 * sb * (tau + 1.0) * iD32 +
                      (-sigma + 0.5 * tau - tau * sigma) * iD + 0.5 * tau * sb * iD12 - 0.5 * tau * sigma;
    return cp * ep + cm * em + 2.0 * (sigma - 1.0) * iD2 + 2.0 * sigma * iD;
}

struct RayPartialsII {
    double x_tau, x_sigma, eta_tau, eta_sigma;
};

inline RayPartialsII ray2_partials(double tau, double sigma, double D) {
    const auto [a, b] = ab_of_sigma(sigma, D);
    const double beta = beta_fn(sigma, D);
    const double ap = -1.0 / (2.0 * D);
    const double bp = 0.5 + (2.0 * D * sigma + 2.0 * (sigma - 1.0)) / (4.0 * std::sqrt(D * beta));
    const double ep = std::exp(tau), em = std::exp(-tau);
    return {(b - a) * ep - (a + b - sigma) * em + 2.0 * a * (D + 1.0) - 1.0,
            (bp - ap) * ep + (ap + bp - 1.0) * em + 2.0 * ap * (D + 1.0) * tau - 2.0 * bp + 1.0,
            (b - a) * ep + (a + b - sigma) * em, (bp - ap) * ep - (ap + bp - 1.0) * em + 2.0 * ap};
}

// sigma-dependent factor of L; L = l0_factor * e^{tau/2} / sqrt(J~)
inline double l0_factor(double sigma, double D) {
    const double beta = beta_fn(sigma, D), d1 = D + 1.0;
    const double ratio = (alpha_fn(sigma, D) + std::sqrt(beta * d1)) / (D + std::sqrt(D * d1));
    const double aip = airy_ai_prime_r0();
    return std::pow(D, -0.75) * (sigma - 1.0) / pi * std::pow(2.0, -13.0 / 6.0) * std::pow(beta, -1.0 / 12.0) *
           std::pow(ratio, std::sqrt(D) / (2.0 * std::sqrt(d1))) / (aip * aip);
}

inline double amplitude_L(double tau, double sigma, double D) {
    if (!(tau > 0.0)) throw DomainError("amplitude_L: tau = 0 lies on the boundary caustic");
    return l0_factor(sigma, D) * std::exp(0.5 * tau) / std::sqrt(jacobian_II(tau, sigma, D));
}

inline RayStateII ray2_forward(double tau, double sigma, double D) {
    if (!(tau >= 0.0)) throw DomainError("ray2_forward requires tau >= 0");
    const auto [a, b] = ab_of_sigma(sigma, D);
    const double ep = std::exp(tau), em = std::exp(-tau);
    RayStateII r;
    r.x = (b - a) * ep + (a + b - sigma) * em + (2.0 * a * (D + 1.0) - 1.0) * tau - 2.0 * b + sigma;
    r.eta = (b - a) * ep - (a + b - sigma) * em + 2.0 * a;
    r.phi_x = -a;
    r.phi_eta = (a - b) * ep - a;
    r.phi = -a * a * (D + 1.0) * tau + 2.0 * a * (a - b) * std::expm1(tau) -
            0.5 * (a - b) * (a - b) * std::expm1(2.0 * tau) + phi0(sigma, D);
    r.gamma_phase = gamma_phase(sigma, D);
    r.jac_tilde = jacobian_II(tau, sigma, D);
    if (tau > 0.0) r.amp = amplitude_L(tau, sigma, D);
    return r;
}

namespace detail {

inline double ray2_x(double tau, double sigma, double D) {
    const auto [a, b] = ab_of_sigma(sigma, D);
    return (b - a) * std::exp(tau) + (a + b - sigma) * std::exp(-tau) + (2.0 * a * (D + 1.0) - 1.0) * tau - 2.0 * b +
           sigma;
}

inline double ray2_eta(double tau, double sigma, double D) {
    const auto [a, b] = ab_of_sigma(sigma, D);
    return (b - a) * std::exp(tau) - (a + b - sigma) * std::exp(-tau) + 2.0 * a;
}

// first tau with eta(tau, sigma) = eta
inline double tau_at_eta(double sigma, double eta, double D) {
    auto f = [&](double tau) { return ray2_eta(tau, sigma, D) - eta; };
    if (f(0.0) >= 0.0) return 0.0;
    double hi = 0.5;
    while (f(hi) < 0.0) {
        hi *= 2.0;
        if (hi > 700.0) throw SearchError("tau_at_eta: eta not reached");
    }
    return num::find_root(f, 0.0, hi);
}

} // namespace detail

// leading terms of the small-x local inversion
inline RayCoordII ray2_seed_small_x(double x, double eta, double D) {
    const double beta = beta_fn(eta, D), al = alpha_fn(eta, D), sx = std::sqrt(x);
    const double c = std::sqrt(2.0) * std::pow(D, 0.25) * std::pow(beta, -0.25);
    const double tau = c * sx + 2.0 / 3.0 * al / beta * x +
                       std::sqrt(2.0) / 36.0 * std::pow(beta, -1.75) * std::pow(D, -0.25) *
                           (14.0 * beta + 11.0 * D * beta - 20.0 * D) * x * sx;
    const double sigma = eta - std::sqrt(2.0) * std::pow(beta, 0.25) * std::pow(D, -0.25) * sx + al / (3.0 * std::sqrt(D * beta)) * x +
                         std::sqrt(2.0) / 36.0 * std::pow(beta, -1.25) * std::pow(D, -0.75) *
                             (10.0 * beta + D * beta - 4.0 * D) * x * sx;
    return {tau, sigma};
}

inline RayCoordII ray2_invert(double x, double eta, double D) {
    if (!(eta > 1.0) || !(x > 0.0) || !(x < x0_boundary(eta))) throw DomainError("point is outside Region II");
    auto g = [&](double sigma) {
        return detail::ray2_x(detail::tau_at_eta(sigma, eta, D), sigma, D) - x;
    };
    const double sigma = num::find_root(g, 1.0, eta, 1e-15);
    RayCoordII rc{detail::tau_at_eta(sigma, eta, D), sigma};
    // Newton polish on the full map
    for (int it = 0; it < 3; ++it) {
        const double fx = detail::ray2_x(rc.tau, rc.sigma, D) - x, fe = detail::ray2_eta(rc.tau, rc.sigma, D) - eta;
        const auto p = ray2_partials(rc.tau, rc.sigma, D);
        const double det = p.x_tau * p.eta_sigma - p.x_sigma * p.eta_tau;
        if (det == 0.0) break;
        const RayCoordII nx{rc.tau - (p.eta_sigma * fx - p.x_sigma * fe) / det,
                            rc.sigma - (-p.eta_tau * fx + p.x_tau * fe) / det};
        if (!(nx.tau > 0.0 && nx.sigma > 1.0)) break;
        rc = nx;
    }
    const double res = std::hypot(detail::ray2_x(rc.tau, rc.sigma, D) - x, detail::ray2_eta(rc.tau, rc.sigma, D) - eta);
    if (res > 1e-8 * (1.0 + x + eta)) throw NumericalError("ray2_invert: round trip failed", res);
    return rc;
}

inline LayerEval eval_F_regionII(const PhysPoint& p, const ModelParams& params, const LayerThresholds& th = {}) {
    params.validate();
    LayerEval ev;
    ev.tag = classify_point(p, params, th);
    ev.nu = nu_region2;
    const auto rc = ray2_invert(p.x, p.eta, params.D);
    const auto st = ray2_forward(rc.tau, rc.sigma, params.D);
    ev.phase_1 = st.phi;
    ev.phase_13 = st.gamma_phase;
    ev.amplitude = *st.amp;
    return ev;
}

} // namespace mmq
