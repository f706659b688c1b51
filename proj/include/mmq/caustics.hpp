#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "errors.hpp"
#include "numerics.hpp"
#include "region1.hpp"

namespace mmq {

struct PoleError : DomainError {
    using DomainError::DomainError;
};

enum class CausticBranch { CPlus, CMinus };

inline const char* caustic_name(CausticBranch b) { return b == CausticBranch::CPlus ? "C+" : "C-"; }

struct CausticSample {
    double t, s0, x, eta;
};

struct CausticCurve {
    std::vector<CausticSample> samples;
    CausticBranch label = CausticBranch::CPlus;
};

struct Cusp {
    double t, x, eta, slope;
};

namespace detail {

// common denominator of the S0 and caustic formulas
inline double caustic_den(double t, double D) {
    const double e2 = std::exp(2.0 * t), e1 = std::exp(t);
    return (-D * D - 5.0 * D - 4.0 + 2.0 * t + 4.0 * D * t + 2.0 * t * D * D) * e2 + 8.0 * (D + 1.0) * e1 - 3.0 * D -
           4.0 - 2.0 * t - 2.0 * D * t;
}

inline void check_pole(double den, double t) {
    if (std::abs(den) < 1e-12 * std::exp(2.0 * t)) throw PoleError("S0 pole at t=" + std::to_string(t));
}

} // namespace detail

inline double s0_of_t(double t, double D) {
    const double e2 = std::exp(2.0 * t), e1 = std::exp(t);
    const double den = detail::caustic_den(t, D);
    detail::check_pole(den, t);
    const double num = (-2.0 * D - D * D - 4.0 + 2.0 * D * t + 2.0 * t) * e2 + 4.0 * (D + 2.0) * e1 -
                       2.0 * (2.0 + D + D * t + t);
    return num / den;
}

inline PhysPoint caustic_point(double t, double D) {
    const double e3 = std::exp(3.0 * t), e2 = std::exp(2.0 * t), e1 = std::exp(t), em = std::exp(-t);
    const double den = detail::caustic_den(t, D);
    detail::check_pole(den, t);
    const double d1 = D + 1.0, t2 = t * t;
    const double xn = -d1 * d1 * e3 +
                      (2.0 * D * D * t2 - 3.0 * t * D + D * D * t + 2.0 * t2 - 4.0 * t + D * D + 4.0 * t2 * D +
                       6.0 * D + 8.0) * e2 -
                      2.0 * (3.0 * D + 7.0) * e1 - em + 2.0 * d1 * t2 + (3.0 * D + 4.0) * t + 2.0 * (D + 4.0);
    const double en = -d1 * d1 * e3 + 2.0 * (2.0 * t * D + 2.0 * t + 2.0 * D - 1.0) * e2 +
                      2.0 * (4.0 - 2.0 * t - 2.0 * t * D - D) * e1 + em - 6.0;
    return {xn / den, en / den};
}

// zero of the common denominator; S0 > 1 below it
inline double caustic_pole(double D) {
    auto f = [&](double t) { return detail::caustic_den(t, D); };
    double b = 0.1;
    while (f(b) < 0.0) {
        b *= 1.5;
        if (b > 50.0) throw SearchError("caustic_pole: no pole found");
    }
    return num::find_root(f, 1e-8, b);
}

namespace detail {

inline std::pair<double, double> caustic_velocity(double t, double D, double h = 1e-5) {
    const auto a = caustic_point(t + h, D), b = caustic_point(t - h, D);
    return {(a.x - b.x) / (2.0 * h), (a.eta - b.eta) / (2.0 * h)};
}

} // namespace detail

inline Cusp find_cusp(double D, double t_hi = 6.0, int n = 10000) {
    const double tp = caustic_pole(D);
    const double lo = tp + 1e-3 * (1.0 + tp);
    auto speed = [&](double t) {
        const auto v = detail::caustic_velocity(t, D);
        return std::hypot(v.first, v.second);
    };
    std::vector<double> sv(n + 1);
    for (int k = 0; k <= n; ++k) sv[k] = speed(lo + (t_hi - lo) * k / n);
    double best_t = NAN, best = INFINITY;
    for (int k = 1; k < n; ++k) {
        if (!(sv[k] <= sv[k - 1] && sv[k] <= sv[k + 1])) continue;
        const double a = lo + (t_hi - lo) * (k - 1) / n, b = lo + (t_hi - lo) * (k + 1) / n;
        const auto m = num::find_min(speed, a, b);
        const auto p = caustic_point(m.first, D);
        if (m.second < best && p.x >= 0.0) {
            best = m.second;
            best_t = m.first;
        }
    }
    if (!std::isfinite(best_t) || best > 1e-4) throw SearchError("find_cusp: no stationary point on the caustic");
    const auto p = caustic_point(best_t, D);
    // both velocity components vanish; the tangent follows the second derivatives
    const double h = 1e-3;
    const auto a = caustic_point(best_t + h, D), b = caustic_point(best_t - h, D);
    const double xpp = a.x + b.x - 2.0 * p.x, epp = a.eta + b.eta - 2.0 * p.eta;
    return {best_t, p.x, p.eta, epp / xpp};
}

struct EtaStar {
    double t, eta;
};

inline EtaStar find_eta_star(double D, double t_hi = 6.0, int n = 10000) {
    const Cusp c = find_cusp(D, t_hi);
    auto fx = [&](double t) { return caustic_point(t, D).x; };
    double prev = fx(c.t + 1e-6);
    for (int k = 1; k <= n; ++k) {
        const double a = c.t + 1e-6 + (t_hi - c.t) * (k - 1) / n, b = c.t + 1e-6 + (t_hi - c.t) * k / n;
        const double fb = fx(b);
        if ((prev > 0.0) != (fb > 0.0)) {
            const double ts = num::find_root(fx, a, b);
            return {ts, caustic_point(ts, D).eta};
        }
        prev = fb;
    }
    throw SearchError("find_eta_star: caustic never reaches the axis");
}

inline int branch_count(double x, double eta, double D) {
    return static_cast<int>(ray1_invert(x, eta, D, std::nullopt, 20000).size());
}

// C+ if the caustic ray collides with a lower-s partner (s1 = s2), C- if with a higher one
inline CausticBranch collision_label(double t, double D) {
    const double s0 = s0_of_t(t, D);
    const auto p = caustic_point(t, D);
    const auto rays = ray1_invert(p.x, p.eta, D, std::nullopt, 20000);
    int above = 0, below = 0;
    for (const auto& r : rays) {
        if (std::abs(r.s - s0) < 1e-4) continue;
        (r.s > s0 ? above : below)++;
    }
    if (above == 1 && below == 0) return CausticBranch::CPlus;
    if (below == 1 && above == 0) return CausticBranch::CMinus;
    throw SearchError("collision_label: unexpected branch structure at t=" + std::to_string(t));
}

// both caustics inside x in [0, x_max]
inline std::vector<CausticCurve> sample_caustics(double D, int n = 200, double x_max = 5.0) {
    const Cusp c = find_cusp(D);
    const EtaStar es = find_eta_star(D);
    const double tp = caustic_pole(D);
    auto fx = [&](double t) { return caustic_point(t, D).x - x_max; };
    double a = tp + 1e-6;
    while (fx(a) <= 0.0) a = tp + 0.5 * (a - tp);
    const double t_lo = num::find_root(fx, a, c.t - 1e-6);
    std::vector<CausticCurve> out(2);
    const double ranges[2][2] = {{t_lo, c.t}, {c.t, es.t}};
    for (int b = 0; b < 2; ++b) {
        const double t0 = ranges[b][0], t1 = ranges[b][1];
        for (int k = 0; k <= n; ++k) {
            const double t = t0 + (t1 - t0) * k / n;
            const auto p = caustic_point(t, D);
            out[b].samples.push_back({t, s0_of_t(t, D), std::max(p.x, 0.0), p.eta});
        }
        out[b].label = collision_label(0.5 * (t0 + t1), D);
    }
    return out;
}

} // namespace mmq
