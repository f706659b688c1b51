#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "core_model.hpp"
#include "errors.hpp"
#include "layer_eval.hpp"
#include "numerics.hpp"

namespace mmq {

struct RayCoordI {
    double t = 0.0;
    double s = 0.0;
};

struct RayStateI {
    double x = 0.0;
    double eta = 0.0;
    double psi = 0.0;
    double psi_x = 0.0;
    double psi_eta = 0.0;
    double jac = 0.0;
    std::optional<double> amp;  // empty when J <= 0 or s >= 1
};

struct RayPartialsI {
    double x_t, x_s, eta_t, eta_s;
};

namespace detail {

inline double ray1_x(double t, double s, double D) {
    const double et = std::exp(t), emt = std::exp(-t);
    const double P = (D + 1.0) * (2.0 * t - et) + D + emt;
    return std::expm1(t) - t - P * (s - 1.0) / D;
}

inline double ray1_eta(double t, double s, double D) {
    const double et = std::exp(t), emt = std::exp(-t);
    return et + (emt + (D + 1.0) * et - 2.0) * (s - 1.0) / D;
}

inline double ray1_psi(double t, double s, double D) {
    const double et = std::exp(t), e2t = et * et, a = s - 1.0, d1 = D + 1.0;
    return -0.5 * e2t + (2.0 * et - d1 * e2t - 1.0) * a / D +
           (-1.0 + (4.0 * et - 2.0 * (t + 1.0)) * d1 - e2t * d1 * d1) * a * a / (2.0 * D * D);
}

} // namespace detail

inline RayPartialsI ray1_partials(double t, double s, double D) {
    const double et = std::exp(t), emt = std::exp(-t), a = (s - 1.0) / D, d1 = D + 1.0;
    const double P = d1 * (2.0 * t - et) + D + emt;
    const double Pp = d1 * (2.0 - et) - emt;
    const double Q = emt + d1 * et - 2.0;
    const double Qp = -emt + d1 * et;
    return {et - 1.0 - Pp * a, -P / D, et + Qp * a, Q / D};
}

// explicit Jacobian formula
inline double jacobian_I(double t, double s, double D) {
    const double et = std::exp(t), emt = std::exp(-t), a = s - 1.0, iD = 1.0 / D, iD2 = iD * iD;
    return (2.0 * (t - 2.0) * a * iD2 + (-2.0 * t - 5.0 * s + 4.0 * t * s + 2.0) * iD - s + 2.0 * t * s + 1.0) * et +
           (-2.0 * (t + 2.0) * a * iD2 + (2.0 * t - 2.0 * t * s + 2.0 - 3.0 * s) * iD) * emt + 8.0 * a * iD2 +
           4.0 * (2.0 * s - 1.0) * iD;
}

inline double amplitude_K(double t, double s, double D) {
    if (!(s < 1.0)) throw DomainError("amplitude_K requires s < 1");
    const double J = jacobian_I(t, s, D);
    if (!(J > 0.0)) throw DomainError("amplitude_K: caustic singularity (J <= 0)");
    return std::pow(1.0 - s, 1.5) * std::exp(0.5 * t) / (D * std::sqrt(2.0 * pi) * std::sqrt(J));
}

inline RayStateI ray1_forward(double t, double s, double D) {
    if (!(t >= 0.0)) throw DomainError("ray1_forward requires t >= 0");
    RayStateI r;
    r.x = detail::ray1_x(t, s, D);
    r.eta = detail::ray1_eta(t, s, D);
    r.psi = detail::ray1_psi(t, s, D);
    const double A = (s - 1.0) / D, B = -s;
    r.psi_x = A;
    r.psi_eta = (B - A) * std::exp(t) + A;
    r.jac = jacobian_I(t, s, D);
    if (s < 1.0 && r.jac > 0.0) r.amp = amplitude_K(t, s, D);
    return r;
}

// s on the ray through eta at parameter t
inline double s_from_eta(double t, double eta, double D) {
    const double et = std::exp(t), emt = std::exp(-t);
    return (emt + et - 2.0 + D * eta) / (emt + (D + 1.0) * et - 2.0);
}

inline double ray1_relation(double x, double eta, double t, double D) {
    const double et = std::exp(t), emt = std::exp(-t);
    return (emt + (D + 1.0) * et - 2.0) * x + (3.0 - D * eta - t - D * t - eta) * et + (1.0 + t + eta) * emt - 4.0 -
           2.0 * t + D * eta + 2.0 * t * eta + 2.0 * D * eta * t;
}

inline double t_xmax(double s, double D) {
    const double den = 2.0 * (1.0 - s - D * s);
    if (!(den > 0.0)) throw DomainError("t_xmax requires s < 1/(D+1)");
    const double disc = D * (4.0 * s * s * D - 4.0 * s * D - 8.0 * s + 4.0 * s * s + D + 4.0);
    return std::log((-2.0 * s * D + D + 2.0 - 2.0 * s + std::sqrt(disc)) / den);
}

inline double t_etamax(double s, double D) {
    if (!(s > 0.0 && s < 1.0 / (D + 1.0))) throw DomainError("t_etamax requires 0 < s < 1/(D+1)");
    return 0.5 * std::log((1.0 - s) / (1.0 - s - D * s));
}

inline double eta_max(double s, double D) {
    if (!(s > 0.0 && s < 1.0 / (D + 1.0))) throw DomainError("eta_max requires 0 < s < 1/(D+1)");
    return 2.0 * ((1.0 - s) - std::sqrt((1.0 - s) * (1.0 - s - D * s))) / D;
}

// t* > 0 with x(t*, s) = 0
inline double return_time(double s, double D) {
    const double a = t_xmax(s, D);
    auto f = [&](double t) { return detail::ray1_x(t, s, D); };
    double b = a + 1.0;
    while (f(b) > 0.0) {
        b = a + 2.0 * (b - a);
        if (b > 700.0) throw SearchError("return_time: no return found");
    }
    return num::find_root(f, a, b);
}

namespace detail {

inline void check_region1(double x, double eta) {
    if (!(x >= 0.0)) throw DomainError("point has x < 0");
    if (eta > 1.0 && x < x0_boundary(eta) - 1e-12 * (1.0 + eta)) throw DomainError("point is outside Region I");
}

inline std::vector<double> t_scan_grid(double x, double eta, int n) {
    const double tmax = 8.0 + x + 2.0 * std::abs(eta);
    std::vector<double> g;
    g.reserve(n + 60);
    for (int k = 0; k < 60; ++k) g.push_back(1e-12 * std::pow(10.0, k * 10.0 / 60.0));
    const double t0 = g.back();
    for (int k = 1; k <= n; ++k) g.push_back(t0 + (tmax - t0) * k / n);
    return g;
}

} // namespace detail

// all ray preimages with t > 0, s <= 1, ordered by s
inline std::vector<RayCoordI> ray1_invert(double x, double eta, double D, std::optional<RayCoordI> hint = std::nullopt,
                                          int n_scan = 3000) {
    detail::check_region1(x, eta);
    auto R = [&](double t) { return ray1_relation(x, eta, t, D); };
    const double scale = 1.0 + std::abs(x) + std::abs(eta);
    std::vector<double> roots;
    if (x == 0.0 && eta < 1.0) roots.push_back(0.0);

    const auto g = detail::t_scan_grid(x, eta, n_scan);
    std::vector<double> rv(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) rv[k] = R(g[k]);
    for (std::size_t k = 0; k + 1 < g.size(); ++k) {
        if (rv[k] == 0.0) {
            roots.push_back(g[k]);
        } else if ((rv[k] > 0) != (rv[k + 1] > 0) && rv[k + 1] != 0.0) {
            roots.push_back(num::find_root(R, g[k], g[k + 1]));
        }
        // tangent roots: local minimum of |R| without a sign change
        if (k >= 1 && std::abs(rv[k]) < std::abs(rv[k - 1]) && std::abs(rv[k]) <= std::abs(rv[k + 1]) &&
            (rv[k - 1] > 0) == (rv[k] > 0) && (rv[k] > 0) == (rv[k + 1] > 0)) {
            auto m = num::find_min([&](double t) { return std::abs(R(t)); }, g[k - 1], g[k + 1]);
            const double tp = m.first;
            const double slope = std::abs(num::diff(R, tp, 1e-6 * (1.0 + tp)));
            if (m.second <= 1e-11 * scale * (1.0 + slope)) roots.push_back(tp);
        }
    }
    if (roots.empty() && hint) {
        try {
            const double t = hint->t, h = 0.1 * (1.0 + t);
            roots.push_back(num::find_root(R, std::max(1e-300, t - h), t + h));
        } catch (const SearchError&) {
        }
    }

    std::vector<RayCoordI> out;
    for (double t : roots) {
        double s = s_from_eta(t, eta, D);
        if (s > 1.0 + 1e-9) continue;  // rays with s > 1 leave x >= 0 before reaching here
        s = std::min(s, 1.0);
        // rays that turn around are only physical until they hit x = 0
        if (t > 0.0 && s < 1.0 / (D + 1.0) && t > return_time(s, D) * (1.0 + 1e-10) + 1e-12) continue;
        if (t > 0.0 || (x == 0.0 && t == 0.0)) out.push_back({t, s});
    }
    std::sort(out.begin(), out.end(), [](const RayCoordI& a, const RayCoordI& b) { return a.s < b.s; });
    std::vector<RayCoordI> dedup;
    for (const auto& r : out) {
        if (!dedup.empty() && std::abs(r.t - dedup.back().t) < 1e-6 && std::abs(r.s - dedup.back().s) < 1e-6) continue;
        dedup.push_back(r);
    }
    for (const auto& r : dedup) {
        const double ex = detail::ray1_x(r.t, r.s, D), ee = detail::ray1_eta(r.t, r.s, D);
        const double res = std::hypot(ex - x, ee - eta);
        if (res > 1e-8 * scale) throw NumericalError("ray1_invert: round trip failed", res);
    }
    if (dedup.empty()) throw NumericalError("ray1_invert: no ray found", std::abs(R(g.front())));
    return dedup;
}

inline LayerEval eval_F_regionI(const PhysPoint& p, const ModelParams& params, const LayerThresholds& th = {},
                                std::optional<PhysPoint> cusp = std::nullopt) {
    params.validate();
    LayerEval ev;
    ev.tag = classify_point(p, params, th, cusp);
    if (cusp && std::hypot(p.x - cusp->x, p.eta - cusp->eta) <= th.cusp_radius)
        throw UnsupportedRegionError("point lies near the cusp; the ray expansion breaks down");
    ev.nu = nu_region1;
    const double D = params.D;
    const auto rays = ray1_invert(p.x, p.eta, D);
    struct Term {
        double psi, K;
    };
    std::vector<Term> terms;
    // phase at (x, eta) itself, not at the inexact ray endpoint
    auto phase_at = [&](const RayCoordI& r) {
        const auto st = ray1_forward(r.t, r.s, D);
        return st.psi + st.psi_x * (p.x - st.x) + st.psi_eta * (p.eta - st.eta);
    };
    for (const auto& r : rays) {
        const double J = jacobian_I(r.t, r.s, D);
        if (std::abs(J) < 1e-8 * (1.0 + std::abs(r.t))) {
            ev.diagnostics.push_back("dropped branch at caustic (t=" + std::to_string(r.t) + ")");
            continue;
        }
        if (J < 0.0) {
            ev.diagnostics.push_back("dropped branch with J < 0 (t=" + std::to_string(r.t) + ")");
            continue;
        }
        if (r.s >= 1.0) {
            terms.push_back({phase_at(r), 0.0});
            ev.diagnostics.push_back("limit branch s=1 has zero amplitude");
            continue;
        }
        terms.push_back({phase_at(r), amplitude_K(r.t, r.s, D)});
    }
    if (terms.empty()) throw NumericalError("eval_F_regionI: no finite-amplitude branch", 0.0);
    double pmax = -INFINITY;
    for (const auto& tm : terms) pmax = std::max(pmax, tm.psi);
    double amp = 0.0;
    for (const auto& tm : terms) amp += tm.K * std::exp((tm.psi - pmax) / params.eps);
    ev.phase_1 = pmax;
    ev.amplitude = amp;
    return ev;
}

} // namespace mmq
