#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "caustics.hpp"
#include "core_model.hpp"
#include "errors.hpp"
#include "layers.hpp"
#include "region1.hpp"
#include "region2.hpp"

namespace mmq {

struct ResidualStats {
    double max_abs = 0.0;
    double mean_abs = 0.0;
    int n = 0;
};

enum class RayRegion { I, II };

// eikonal residual D p^2 + q^2 + eta (q - p) + p over random ray points
inline ResidualStats check_eikonal(RayRegion region, int n_samples, double D, unsigned seed = 1) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ut(0.0, 3.0), us(-2.0, 0.99), usig(1.0, 4.0);
    ResidualStats st;
    for (int k = 0; k < n_samples; ++k) {
        double p, q, eta;
        if (region == RayRegion::I) {
            const auto r = ray1_forward(ut(rng), us(rng), D);
            p = r.psi_x, q = r.psi_eta, eta = r.eta;
        } else {
            const auto r = ray2_forward(ut(rng), usig(rng), D);
            p = r.phi_x, q = r.phi_eta, eta = r.eta;
        }
        const double res = std::abs(D * p * p + q * q + eta * (q - p) + p);
        st.max_abs = std::max(st.max_abs, res);
        st.mean_abs += res;
    }
    st.n = n_samples;
    st.mean_abs /= std::max(1, n_samples);
    return st;
}

// transport residual v.grad K + (D Psi_xx + Psi_etaeta + 1) K, v = (2D Psi_x + 1 - eta, 2 Psi_eta + eta),
// relative to K. v.grad K is dK/dt rescaled by the ray speed; the Hessian of Psi comes from
// d(Psi_x, Psi_eta)/d(t, s) times the inverse of d(x, eta)/d(t, s).
inline ResidualStats check_transport(RayRegion region, int n_samples, double D, unsigned seed = 2) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ut(0.2, 1.5), us(0.05, 0.6), usig(1.2, 3.0);
    ResidualStats st;
    for (int k = 0; k < n_samples; ++k) {
        const bool one = region == RayRegion::I;
        const double t = ut(rng), s = one ? us(rng) : usig(rng);
        struct G { double x, eta, p, q, amp; };
        auto at = [&](double tt, double ss) -> G {
            if (one) {
                const auto r = ray1_forward(tt, ss, D);
                return {r.x, r.eta, r.psi_x, r.psi_eta, r.amp.value_or(0.0)};
            }
            const auto r = ray2_forward(tt, ss, D);
            return {r.x, r.eta, r.phi_x, r.phi_eta, r.amp.value_or(0.0)};
        };
        const double jac = one ? jacobian_I(t, s, D) : jacobian_II(t, s, D);
        if (!(jac > 1e-3)) continue;
        const double h = 1e-3 * std::min(1.0, jac);
        const G c = at(t, s);
        if (!(c.amp > 0.0)) continue;
        // five-point derivatives in t and s
        auto d5 = [&](auto f, bool in_t) {
            auto g = [&](double k) { return in_t ? f(at(t + k * h, s)) : f(at(t, s + k * h)); };
            return (-g(2.0) + 8.0 * g(1.0) - 8.0 * g(-1.0) + g(-2.0)) / (12.0 * h);
        };
        auto P = [](const G& g) { return g.p; };
        auto Q = [](const G& g) { return g.q; };
        auto A = [](const G& g) { return g.amp; };
        double xt, xs, et, es;
        if (one) {
            const auto m = ray1_partials(t, s, D);
            xt = m.x_t, xs = m.x_s, et = m.eta_t, es = m.eta_s;
        } else {
            const auto m = ray2_partials(t, s, D);
            xt = m.x_tau, xs = m.x_sigma, et = m.eta_tau, es = m.eta_sigma;
        }
        const double det = xt * es - xs * et;
        const double pt = d5(P, true), ps = d5(P, false), qt = d5(Q, true), qs = d5(Q, false);
        // [p_x p_eta; q_x q_eta] = [p_t p_s; q_t q_s] * inv([x_t x_s; eta_t eta_s])
        const double pxx = (pt * es - ps * et) / det;
        const double qee = (-qt * xs + qs * xt) / det;
        const double dK = d5(A, true);
        const double vx = 2.0 * D * c.p + 1.0 - c.eta, ve = 2.0 * c.q + c.eta;
        const double kappa = std::abs(vx) > std::abs(ve) ? xt / vx : et / ve;
        const double res = std::abs(dK / kappa + (D * pxx + qee + 1.0) * c.amp) / c.amp;
        st.max_abs = std::max(st.max_abs, res);
        st.mean_abs += res;
        ++st.n;
    }
    st.mean_abs /= std::max(1, st.n);
    return st;
}

enum class MatchPair {
    RegionII_Inner,
    Inner_InnerInner,
    Corner_RegionI,
    Corner_RegionII,
    Transition_RegionI,
    Transition_RegionII,
    Corner_Transition,
    SmallX_Corner
};

inline const std::vector<MatchPair>& all_match_pairs() {
    static const std::vector<MatchPair> v{MatchPair::RegionII_Inner,     MatchPair::Inner_InnerInner,
                                          MatchPair::Corner_RegionI,     MatchPair::Corner_RegionII,
                                          MatchPair::Transition_RegionI, MatchPair::Transition_RegionII,
                                          MatchPair::Corner_Transition,  MatchPair::SmallX_Corner};
    return v;
}

inline const char* match_pair_name(MatchPair p) {
    switch (p) {
        case MatchPair::RegionII_Inner: return "RegionII-Inner";
        case MatchPair::Inner_InnerInner: return "Inner-InnerInner";
        case MatchPair::Corner_RegionI: return "Corner-RegionI";
        case MatchPair::Corner_RegionII: return "Corner-RegionII";
        case MatchPair::Transition_RegionI: return "Transition-RegionI";
        case MatchPair::Transition_RegionII: return "Transition-RegionII";
        case MatchPair::Corner_Transition: return "Corner-Transition";
        case MatchPair::SmallX_Corner: return "SmallX-Corner";
    }
    return "?";
}

inline MatchPair parse_match_pair(const std::string& s) {
    for (auto p : all_match_pairs())
        if (s == match_pair_name(p)) return p;
    throw UsageError("unknown matching pair: " + s);
}

struct MatchPoint {
    double eps;
    PhysPoint p;
    double log_left;
    double log_right;
    double abs_gap;  // |log F_left - log F_right|
    double rel_gap;  // abs_gap / |log F_left|
};

struct MatchReport {
    MatchPair pair;
    double D = 1.0;
    std::vector<double> eps_ladder;
    std::vector<MatchPoint> points;
    double rel_tol = 0.1;
    bool abs_decreasing = false;  // informational; pass uses the relative gap
    bool pass = false;
    std::string note;
};

struct MatchOptions {
    std::vector<double> eps_ladder{1e-2, 1e-3, 1e-4};
    double eta_outer = 2.0;  // eta used for the eta > 1 pairs away from the corner
    double rel_tol = 0.1;
    LayerOptions layers;
};

namespace detail {

inline MatchPoint match_point(MatchPair pair, double D, double eps, const MatchOptions& opt) {
    const ModelParams P{D, eps};
    const double e13 = std::cbrt(eps), e23 = e13 * e13;
    const auto& cs = opt.layers.corner_spec;
    const auto& ws = opt.layers.wp_spec;
    const double eta2 = opt.eta_outer;
    MatchPoint m{eps, {}, 0.0, 0.0, 0.0, 0.0};
    LayerEval L, R;
    switch (pair) {
        case MatchPair::RegionII_Inner: {
            m.p = {std::pow(eps, 4.0 / 9.0), eta2};
            L = eval_F_regionII(m.p, P);
            R = eval_inner(m.p.x / e23, eta2, P);
            break;
        }
        case MatchPair::Inner_InnerInner: {
            m.p = {std::pow(eps, 5.0 / 6.0), eta2};
            L = eval_inner(m.p.x / e23, eta2, P);
            R = eval_inner_inner(m.p.x / eps, eta2, P);
            break;
        }
        case MatchPair::Corner_RegionI: {
            m.p = {std::pow(eps, 7.0 / 12.0), 1.0 - 2.0 * std::pow(eps, 7.0 / 24.0)};
            L = eval_corner(m.p.x / e23, (m.p.eta - 1.0) / e13, P, cs);
            R = eval_F_regionI(m.p, P);
            break;
        }
        case MatchPair::Corner_RegionII: {
            m.p = {std::pow(eps, 7.0 / 12.0), 1.0 + 2.0 * std::pow(eps, 7.0 / 24.0)};
            L = eval_corner(m.p.x / e23, (m.p.eta - 1.0) / e13, P, cs);
            R = eval_F_regionII(m.p, P);
            break;
        }
        case MatchPair::Transition_RegionI:
        case MatchPair::Transition_RegionII: {
            const double sgn = pair == MatchPair::Transition_RegionI ? 1.0 : -1.0;
            const double w = sgn * std::pow(eps, -1.0 / 24.0);
            m.p = {x0_boundary(eta2) + w * e13, eta2};
            L = eval_transition(w, eta2, P, ws);
            R = sgn > 0 ? eval_F_regionI(m.p, P) : eval_F_regionII(m.p, P);
            break;
        }
        case MatchPair::Corner_Transition: {
            const double g = std::pow(eps, -1.0 / 12.0), Om = 0.5;
            const double mu = 0.5 * g * g + std::cbrt(2.0 * D) * Om * g;
            m.p = {mu * e23, 1.0 + g * e13};
            L = eval_corner(mu, g, P, cs);
            R = eval_transition((m.p.x - x0_boundary(m.p.eta)) / e13, m.p.eta, P, ws);
            break;
        }
        case MatchPair::SmallX_Corner: {
            m.p = {0.0, 1.0 - std::pow(eps, 1.0 / 6.0)};
            L = eval_small_x(0.0, m.p.eta, P);
            R = eval_corner(0.0, (m.p.eta - 1.0) / e13, P, cs);
            break;
        }
    }
    m.log_left = L.log_value(eps);
    m.log_right = R.log_value(eps);
    m.abs_gap = std::abs(m.log_left - m.log_right);
    m.rel_gap = m.abs_gap / std::abs(m.log_left);
    return m;
}

} // namespace detail

// both expansions at an overlap point per eps; pass needs strictly shrinking relative gaps and a final one <= rel_tol
inline MatchReport check_matching(MatchPair pair, double D, const MatchOptions& opt = {}) {
    MatchReport rep;
    rep.pair = pair;
    rep.D = D;
    rep.eps_ladder = opt.eps_ladder;
    rep.rel_tol = opt.rel_tol;
    for (double e : opt.eps_ladder) rep.points.push_back(detail::match_point(pair, D, e, opt));
    bool dec = true;
    rep.abs_decreasing = true;
    for (std::size_t k = 1; k < rep.points.size(); ++k) {
        dec = dec && rep.points[k].rel_gap < rep.points[k - 1].rel_gap;
        rep.abs_decreasing = rep.abs_decreasing && rep.points[k].abs_gap < rep.points[k - 1].abs_gap;
    }
    rep.pass = dec && !rep.points.empty() && rep.points.back().rel_gap <= opt.rel_tol;
    if (!dec) rep.note = "relative gaps not strictly decreasing";
    else if (!rep.abs_decreasing) rep.note = "absolute gaps not monotone on this ladder";
    return rep;
}

struct CausticBranchReport {
    double D = 1.0;
    int samples_plus = 0, samples_minus = 0;
    int ok_plus = 0, ok_minus = 0;
    double max_collision_gap = 0.0;  // |Psi_i - Psi_j| of the colliding pair
    bool pass = false;
};

// on C+: s1 = s2 collide and Psi3 > Psi1 = Psi2; on C-: s2 = s3 and Psi1 > Psi2 = Psi3
inline CausticBranchReport check_caustic_branches(double D, int n = 50) {
    CausticBranchReport rep;
    rep.D = D;
    const auto curves = sample_caustics(D, n + 1);
    for (const auto& c : curves) {
        const bool plus = c.label == CausticBranch::CPlus;
        // skip the endpoints (cusp, axis and the outer cut)
        for (std::size_t k = 1; k + 1 < c.samples.size(); ++k) {
            const auto& smp = c.samples[k];
            if (smp.x <= 0.0) continue;
            // step off the fold to the three-branch side until the colliding pair separates
            std::vector<RayCoordI> rays;
            for (double off : {1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4}) {
                for (auto [ux, ue] : {std::pair{0.0, -1.0}, {-1.0, 0.0}, {0.0, 1.0}, {1.0, 0.0}}) {
                    const double xp = smp.x + ux * off * (1.0 + smp.x), ep = smp.eta + ue * off * (1.0 + std::abs(smp.eta));
                    try {
                        rays = ray1_invert(xp, ep, D, std::nullopt, 20000);
                    } catch (const Error&) {
                        continue;
                    }
                    if (rays.size() == 3) break;
                }
                if (rays.size() == 3) break;
            }
            (plus ? rep.samples_plus : rep.samples_minus)++;
            if (rays.size() != 3) continue;
            double psi[3];
            for (int i = 0; i < 3; ++i) psi[i] = ray1_forward(rays[i].t, rays[i].s, D).psi;
            bool ok;
            double gap;
            if (plus) {
                gap = std::abs(psi[0] - psi[1]);
                ok = std::abs(rays[0].s - rays[1].s) < std::abs(rays[1].s - rays[2].s) && psi[2] > std::max(psi[0], psi[1]);
            } else {
                gap = std::abs(psi[1] - psi[2]);
                ok = std::abs(rays[1].s - rays[2].s) < std::abs(rays[0].s - rays[1].s) && psi[0] > std::max(psi[1], psi[2]);
            }
            ok = ok && gap < 1e-6 * (1.0 + std::abs(psi[0]));
            rep.max_collision_gap = std::max(rep.max_collision_gap, gap);
            if (ok) (plus ? rep.ok_plus : rep.ok_minus)++;
        }
    }
    rep.pass = rep.samples_plus > 0 && rep.samples_minus > 0 && rep.ok_plus == rep.samples_plus &&
               rep.ok_minus == rep.samples_minus;
    return rep;
}

} // namespace mmq
