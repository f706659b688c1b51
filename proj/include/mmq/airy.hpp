#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "numerics.hpp"

namespace mmq {

// Ai(z) = ai * exp(log_scale), Ai'(z) = aip * exp(log_scale)
struct AiryScaled {
    cplx ai;
    cplx aip;
    double log_scale = 0.0;
};

namespace detail {

inline constexpr double airy_c1 = 0.355028053887817239260;  // Ai(0)
inline constexpr double airy_c2 = 0.258819403792806798405;  // -Ai'(0)

inline AiryScaled airy_maclaurin(cplx z) {
    const cplx z3 = z * z * z;
    cplx f = 1.0, g = z, fp = 0.0, gp = 1.0;
    cplx a = 1.0, b = z, p = 0.5 * z * z, q = 1.0;
    fp = p;
    for (int k = 0; k < 400; ++k) {
        const double k3 = 3.0 * k;
        a *= z3 / ((k3 + 2.0) * (k3 + 3.0));
        b *= z3 / ((k3 + 3.0) * (k3 + 4.0));
        q *= z3 / ((k3 + 1.0) * (k3 + 3.0));
        p *= z3 / ((k3 + 3.0) * (k3 + 5.0));
        f += a;
        g += b;
        gp += q;
        fp += p;
        const double tiny = 1e-17 * (std::abs(f) + std::abs(g) + std::abs(fp) + std::abs(gp));
        if (std::abs(a) + std::abs(b) + std::abs(p) + std::abs(q) < tiny) break;
    }
    return {airy_c1 * f - airy_c2 * g, airy_c1 * fp - airy_c2 * gp, 0.0};
}

struct LaguerreTables {
    std::vector<double> t1, w1, t2, w2;
    LaguerreTables() {
        auto r1 = num::gauss_laguerre(40, -1.0 / 6.0);
        auto r2 = num::gauss_laguerre(40, 1.0 / 6.0);
        t1 = r1.first;
        w1 = r1.second;
        t2 = r2.first;
        w2 = r2.second;
    }
};

inline const LaguerreTables& laguerre_tables() {
    static const LaguerreTables tab;
    return tab;
}

// K-Bessel integral representation, valid for |arg z| < 2pi/3
inline AiryScaled airy_laguerre(cplx z) {
    const auto& tab = laguerre_tables();
    const cplx sz = std::sqrt(z);
    const cplx zeta = (2.0 / 3.0) * z * sz;
    const cplx inv2z = 1.0 / (2.0 * zeta);
    cplx s1 = 0.0, s2 = 0.0;
    for (std::size_t k = 0; k < tab.t1.size(); ++k) {
        s1 += tab.w1[k] * std::exp(-std::log(1.0 + tab.t1[k] * inv2z) / 6.0);
        s2 += tab.w2[k] * std::exp(std::log(1.0 + tab.t2[k] * inv2z) / 6.0);
    }
    const cplx z14 = std::sqrt(sz);
    const cplx phase = std::exp(cplx(0.0, -zeta.imag()));
    const double sqpi = std::sqrt(pi);
    static const double g56 = std::tgamma(5.0 / 6.0);
    static const double g76 = std::tgamma(7.0 / 6.0);
    AiryScaled r;
    r.ai = phase * s1 / (2.0 * sqpi * z14 * g56);
    r.aip = -phase * z14 * s2 / (2.0 * sqpi * g76);
    r.log_scale = -zeta.real();
    return r;
}

inline AiryScaled airy_direct(cplx z) {
    const double r = std::abs(z);
    const double th = std::abs(std::arg(z)) * 180.0 / pi;
    if (r <= 3.0) return airy_maclaurin(z);
    if (r >= 10.0) return airy_laguerre(z);
    if (th <= 85.0) return airy_laguerre(z);
    return airy_maclaurin(z);
}

inline AiryScaled combine(cplx c1, const AiryScaled& a, cplx c2, const AiryScaled& b, cplx d1, cplx d2) {
    const double L = std::max(a.log_scale, b.log_scale);
    const double sa = std::exp(a.log_scale - L), sb = std::exp(b.log_scale - L);
    return {c1 * a.ai * sa + c2 * b.ai * sb, d1 * a.aip * sa + d2 * b.aip * sb, L};
}

} // namespace detail

inline AiryScaled airy_scaled(cplx z) {
    const double r = std::abs(z);
    const double th = std::abs(std::arg(z)) * 180.0 / pi;
    const bool rotate = (r >= 10.0 && th > 120.0) || (r > 3.0 && r < 10.0 && th >= 150.0);
    if (!rotate) return detail::airy_direct(z);
    // Ai(z) = -w Ai(wz) - w^2 Ai(w^2 z), w = exp(2 pi i / 3)
    const cplx w = std::polar(1.0, 2.0 * pi / 3.0);
    const cplx w2 = w * w;
    const auto a = detail::airy_direct(w * z);
    const auto b = detail::airy_direct(w2 * z);
    return detail::combine(-w, a, -w2, b, -w2, -w);
}

inline cplx airy_ai(cplx z) {
    const auto s = airy_scaled(z);
    if (s.ai != 0.0 && std::log(std::abs(s.ai)) + s.log_scale > 709.0) throw OverflowError("Ai overflows; use airy_scaled");
    return s.ai * std::exp(s.log_scale);
}

inline cplx airy_ai_prime(cplx z) {
    const auto s = airy_scaled(z);
    if (s.aip != 0.0 && std::log(std::abs(s.aip)) + s.log_scale > 709.0) throw OverflowError("Ai' overflows; use airy_scaled");
    return s.aip * std::exp(s.log_scale);
}

inline double airy_ai(double x) { return airy_ai(cplx(x, 0.0)).real(); }
inline double airy_ai_prime(double x) { return airy_ai_prime(cplx(x, 0.0)).real(); }

// Bi(z) = e^{i pi/6} Ai(z e^{2 pi i/3}) + e^{-i pi/6} Ai(z e^{-2 pi i/3})
inline cplx airy_bi(cplx z) {
    const cplx w = std::polar(1.0, 2.0 * pi / 3.0);
    return std::polar(1.0, pi / 6.0) * airy_ai(z * w) + std::polar(1.0, -pi / 6.0) * airy_ai(z * std::conj(w));
}

inline cplx airy_bi_prime(cplx z) {
    const cplx w = std::polar(1.0, 2.0 * pi / 3.0);
    return std::polar(1.0, pi / 6.0) * w * airy_ai_prime(z * w) +
           std::polar(1.0, -pi / 6.0) * std::conj(w) * airy_ai_prime(z * std::conj(w));
}

inline double airy_root_r0() {
    static const double r0 = num::find_root([](double x) { return airy_ai(x); }, -2.5, -2.2, 1e-16);
    return r0;
}

inline double airy_ai_prime_r0() {
    static const double a1 = airy_ai_prime(airy_root_r0());
    return a1;
}

// k-th zero of Ai on the negative axis (k = 1 gives r0)
inline double airy_zero(int k) {
    if (k < 1) throw DomainError("airy_zero index starts at 1");
    if (k == 1) return airy_root_r0();
    const double t = 3.0 * pi * (4.0 * k - 1.0) / 8.0;
    double x = -std::pow(t, 2.0 / 3.0) * (1.0 + 5.0 / 48.0 / (t * t));
    const double h = 0.3 * std::pow(t, -1.0 / 3.0);
    return num::find_root([](double u) { return airy_ai(u); }, x - h, x + h, 1e-16);
}

} // namespace mmq
