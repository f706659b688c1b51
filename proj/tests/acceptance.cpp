// acceptance runner: no argument runs every criterion, a number runs one
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "mmq/mmq.hpp"

using namespace mmq;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream msg;
    void require(bool ok, const std::string& what) {
        if (!ok) pass = false;
        msg << (ok ? "" : "!") << what << "; ";
    }
};

std::string g6(double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.6g", v);
    return b;
}

BromwichSpec lambda_spec() {
    BromwichSpec s;
    s.half_length = 20.0;
    s.n_nodes = 400;
    return s;
}

void c1(Outcome& o) {
    const double r0 = airy_root_r0();
    o.require(std::abs(r0 - (-2.33810741)) <= 5e-9, "r0=" + g6(r0));
    const double w = wp_kernel(0.0);
    o.require(std::abs(w - std::pow(2.0, -1.0 / 3.0)) <= 1e-8, "wp(0)-2^{-1/3}=" + g6(w - std::pow(2.0, -1.0 / 3.0)));
    for (double D : {0.5, 1.0, 2.0}) {
        o.require(phi0(1.0, D) == -0.5, "Phi0(1)=" + g6(phi0(1.0, D)) + " D=" + g6(D));
        o.require(gamma_phase(1.0, D) == 0.0, "Gamma(1)=" + g6(gamma_phase(1.0, D)));
    }
}

void c2(Outcome& o) {
    for (double D : {0.5, 1.0, 2.0}) {
        const auto a = check_eikonal(RayRegion::I, 1000, D), b = check_eikonal(RayRegion::II, 1000, D);
        o.require(a.max_abs <= 1e-10 && b.max_abs <= 1e-10, "D=" + g6(D) + " eikonal I " + g6(a.max_abs) + " II " + g6(b.max_abs));
        const auto ta = check_transport(RayRegion::I, 200, D), tb = check_transport(RayRegion::II, 200, D);
        o.require(ta.max_abs <= 1e-6 && tb.max_abs <= 1e-6,
                  "transport I " + g6(ta.max_abs) + " (n=" + std::to_string(ta.n) + ") II " + g6(tb.max_abs));
    }
}

// sign changes of the eliminated relation R(t) on a dense grid, keeping physical rays
int r_scan(double x, double eta, double D) {
    const int N = 200000;
    int n = 0;
    double prev = ray1_relation(x, eta, 1e-9, D), tp = 1e-9;
    for (int k = 1; k <= N; ++k) {
        const double t = 12.0 * k / N;
        const double r = ray1_relation(x, eta, t, D);
        if ((prev > 0) != (r > 0)) {
            const double tm = 0.5 * (t + tp);
            const double s = s_from_eta(tm, eta, D);
            bool ok = s <= 1.0;
            for (int m = 1; m < 400 && ok; ++m) ok = ray1_forward(tm * m / 400.0, s, D).x >= -1e-9;
            n += ok;
        }
        prev = r;
        tp = t;
    }
    return n;
}

// x halfway across the three-branch wedge at height eta (below the cusp)
double wedge_x(double eta, double D) {
    const auto cs = sample_caustics(D, 400);
    double xb[2] = {0.0, 0.0};  // C- side defaults to the axis once it has left the picture
    for (int b = 0; b < 2; ++b) {
        const auto& v = cs[b].samples;
        for (std::size_t k = 0; k + 1 < v.size(); ++k)
            if ((v[k].eta - eta) * (v[k + 1].eta - eta) <= 0.0) {
                const double w = (eta - v[k].eta) / (v[k + 1].eta - v[k].eta);
                xb[b] = v[k].x + w * (v[k + 1].x - v[k].x);
            }
    }
    return 0.5 * (xb[0] + xb[1]);
}

void c3(Outcome& o) {
    double worst = 0.0;
    for (double D : {0.5, 1.0, 2.0}) {
        for (double t0 : {0.3, 0.8, 1.6})
            for (double s : {-0.8, 0.1, 0.25, 0.6}) {
                // turning rays only count up to their return to x = 0
                const double t = s < 1.0 / (D + 1.0) ? std::min(t0, 0.8 * return_time(s, D)) : t0;
                if (std::abs(jacobian_I(t, s, D)) < 1e-2) continue;
                const auto r = ray1_forward(t, s, D);
                double best = INFINITY;
                for (const auto& c : ray1_invert(r.x, r.eta, D)) best = std::min(best, std::hypot(c.t - t, c.s - s) / std::hypot(t, s));
                worst = std::max(worst, best);
            }
        for (double tau : {0.2, 0.7, 1.4})
            for (double sg : {1.3, 2.0, 3.0}) {
                const auto r = ray2_forward(tau, sg, D);
                const auto c = ray2_invert(r.x, r.eta, D);
                worst = std::max(worst, std::hypot(c.tau - tau, c.sigma - sg) / std::hypot(tau, sg));
            }
        const auto cusp = find_cusp(D);
        for (double de : {0.3, 1.0}) {
            const double eta = cusp.eta - de, x = wedge_x(eta, D);
            const int n = static_cast<int>(ray1_invert(x, eta, D).size()), m = r_scan(x, eta, D);
            o.require(n == 3 && m == 3, "D=" + g6(D) + " (" + g6(x) + "," + g6(eta) + ") branches " + std::to_string(n) +
                                            " scan " + std::to_string(m));
        }
    }
    o.require(worst <= 1e-8, "round trip max rel " + g6(worst));
}

void c4(Outcome& o) {
    double w1 = 0.0, w2 = 0.0, w0 = 0.0;
    const double h = 1e-6;
    for (double D : {0.5, 1.0, 2.0}) {
        for (double t : {0.3, 0.9, 1.7})
            for (double s : {-0.5, 0.15, 0.45}) {
                auto X = [&](double a, double b) { return ray1_forward(a, b, D); };
                const double xt = (X(t + h, s).x - X(t - h, s).x) / (2 * h), xs = (X(t, s + h).x - X(t, s - h).x) / (2 * h);
                const double et = (X(t + h, s).eta - X(t - h, s).eta) / (2 * h), es = (X(t, s + h).eta - X(t, s - h).eta) / (2 * h);
                const double fd = xt * es - xs * et, J = jacobian_I(t, s, D);
                w1 = std::max(w1, std::abs(J - fd) / std::max(std::abs(fd), std::abs(xt * es)));
            }
        for (double tau : {0.2, 0.8, 1.5})
            for (double sg : {1.2, 2.0, 3.0}) {
                auto Y = [&](double a, double b) { return ray2_forward(a, b, D); };
                const double xt = (Y(tau + h, sg).x - Y(tau - h, sg).x) / (2 * h), xs = (Y(tau, sg + h).x - Y(tau, sg - h).x) / (2 * h);
                const double et = (Y(tau + h, sg).eta - Y(tau - h, sg).eta) / (2 * h), es = (Y(tau, sg + h).eta - Y(tau, sg - h).eta) / (2 * h);
                const double fd = xt * es - xs * et;
                w2 = std::max(w2, std::abs(jacobian_II(tau, sg, D) - fd) / std::abs(fd));
            }
        // in ulps of the magnitude of the terms summed by the closed form at t = 0
        for (double s : {-2.0, -0.3, 0.0, 0.2, 0.5, 0.9}) {
            const double a = (s - 1.0) / D;
            const double scale = 16.0 * std::abs(a / D) + (std::abs(2.0 - 5.0 * s) + std::abs(2.0 - 3.0 * s) + 4.0 * std::abs(2.0 * s - 1.0)) / D +
                                 std::abs(1.0 - s);
            w0 = std::max(w0, std::abs(jacobian_I(0.0, s, D) - (1.0 - s)) / (std::numeric_limits<double>::epsilon() * scale));
        }
    }
    o.require(w1 <= 1e-6, "J vs FD " + g6(w1));
    o.require(w2 <= 1e-6, "J~ vs FD " + g6(w2));
    o.require(w0 <= 8.0, "J(0,s)-(1-s) " + g6(w0) + " ulp");
}

void c5(Outcome& o) {
    for (double D : {0.5, 1.0, 2.0}) {
        const auto cs = sample_caustics(D, 50);
        const auto cusp = find_cusp(D);
        const auto& a = cs[0].samples.back();
        const auto& b = cs[1].samples.front();
        const bool meet = std::hypot(a.x - cusp.x, a.eta - cusp.eta) < 1e-9 && std::hypot(b.x - cusp.x, b.eta - cusp.eta) < 1e-9;
        o.require(meet && cs[0].label != cs[1].label, "D=" + g6(D) + " cusp (" + g6(cusp.x) + "," + g6(cusp.eta) + ")");
        const auto r = check_caustic_branches(D, 50);
        o.require(r.pass, "C+ " + std::to_string(r.ok_plus) + "/" + std::to_string(r.samples_plus) + " C- " +
                              std::to_string(r.ok_minus) + "/" + std::to_string(r.samples_minus));
    }
}

void c6(Outcome& o) {
    const auto spec = lambda_spec();
    double wi = 0.0, wo = 0.0;
    const double h = 1e-2;
    for (double D : {0.5, 1.0, 2.0})
        for (double g : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
            const double v = lambda_integral(g, D, spec);
            const double ref = std::cbrt(2.0) * std::pow(D, 2.0 / 3.0) * std::exp(g * g * g / (12.0 * D));
            wi = std::max(wi, std::abs(v / ref - 1.0));
            const double d = (lambda_integral(g + h, D, spec) - lambda_integral(g - h, D, spec)) / (2 * h);
            // both sides vanish at gamma = 0, so scale by Lambda
            wo = std::max(wo, std::abs(d - g * g * v / (4.0 * D)) / v);
        }
    o.require(wi <= 1e-4, "identity max rel " + g6(wi));
    o.require(wo <= 1e-3, "ODE max rel " + g6(wo));
}

void c7(Outcome& o) {
    const double r0 = airy_root_r0(), ap = airy_ai_prime_r0();
    const double Om = 8.0;
    const auto hi = wp_kernel_scaled(Om, saddle_spec());
    const double lhi = 1.5 * std::log(Om) + 0.5 * std::log(pi) - 5.0 / 6.0 * std::log(2.0) - Om * Om * Om / 24.0;
    const auto lo = wp_kernel_scaled(-Om, saddle_spec());
    const double llo = std::log(Om) - 2.0 / 3.0 * std::log(2.0) - 2.0 * std::log(ap) + std::cbrt(0.5) * r0 * Om;
    const double rh = std::exp(hi.value.log_abs() - lhi), rl = std::exp(lo.value.log_abs() - llo);
    o.require(std::abs(rh - 1.0) <= 0.05 && hi.value.mantissa > 0, "+8 ratio " + g6(rh));
    o.require(std::abs(rl - 1.0) <= 0.05 && lo.value.mantissa > 0, "-8 ratio " + g6(rl));
}

void c8(Outcome& o) {
    for (auto p : all_match_pairs()) {
        const auto r = check_matching(p, 1.0);
        std::string gaps;
        for (const auto& m : r.points) gaps += g6(m.rel_gap) + "/" + g6(m.abs_gap) + " ";
        o.require(r.pass, std::string(match_pair_name(p)) + " rel/abs " + gaps + (r.abs_decreasing ? "" : "(abs not monotone)"));
    }
}

void c9(Outcome& o) {
    const double tol[2] = {0.02, 0.05};
    const double etas[2] = {0.5, 2.0};
    for (int k = 0; k < 2; ++k) {
        const double r = eta_marginal_ratio(etas[k], {1.0, 1e-3});
        o.require(std::abs(r - 1.0) <= tol[k], "eta=" + g6(etas[k]) + " ratio " + g6(r));
        double prev = INFINITY;
        bool improving = true;
        std::string ladder;
        // from 1e-3 down: at 1e-2 eta = 0.5 sits inside the corner band, where the ratio is exact
        for (double e : {1e-3, 1e-4, 1e-5}) {
            const double err = std::abs(eta_marginal_ratio(etas[k], {1.0, e}) - 1.0);
            improving = improving && err < prev;
            prev = err;
            ladder += g6(err) + " ";
        }
        o.require(improving, "errors over eps ladder " + ladder);
    }
}

void c10(Outcome& o) {
    const ModelParams P{1.0, 1e-2};
    const double n = M_normalization(P);
    o.require(std::abs(n - 1.0) <= 0.05, "int M = " + g6(n));
    double ws = 0.0, wl = 0.0, wr = 0.0;
    // regimes: x^3/eps <= 0.01 for small x, e^{-x}/eps <= e^{-3} for large x
    for (double e : {1e-2, 1e-3, 1e-4}) {
        const ModelParams Q{1.0, e};
        const double xs = std::cbrt(0.01 * e), xl = std::log(1.0 / e) + 3.0;
        for (double f : {0.0, 0.5, 1.0})
            ws = std::max(ws, std::abs(std::expm1(M_of_x(f * xs, Q).log_value(e) - log_M_small_x(f * xs, Q))));
        for (double dx : {0.0, 2.0, 5.0})
            wl = std::max(wl, std::abs(std::expm1(M_of_x(xl + dx, Q).log_value(e) - log_M_large_x(xl + dx, Q))));
    }
    for (double D : {0.5, 1.0, 2.0})
        for (double x : {1e-3, 0.1, 1.0, 5.0}) {
            const double E = E_of_x(x, D);
            wr = std::max(wr, std::abs(E_residual(x, E, D)));
            wr = std::max(wr, std::abs(x1_of_eta(E, D) - x) / (1.0 + x));
        }
    o.require(ws <= 0.02, "small-x rel " + g6(ws));
    o.require(wl <= 0.02, "large-x rel " + g6(wl));
    o.require(wr <= 1e-10, "E/X1 residual " + g6(wr));
}

void c11(Outcome& o) {
    GridSpec a;  // eps 0.1, 300 x 400 on [0,3] x [-2,3]
    GridSpec b;
    b.eps = 0.05;
    b.n_eta = 560;
    b.eta_min = -1.5;
    b.eta_max = 2.5;
    const auto ra = compare_to_asymptotics(solve_fd(a));
    const auto rb = compare_to_asymptotics(solve_fd(b));
    o.require(ra.mx_median_rel <= 0.2, "eps=0.1 M median rel " + g6(ra.mx_median_rel));
    o.require(ra.eta_l1_rel <= 0.1, "eta L1 " + g6(ra.eta_l1_rel));
    o.require(rb.mx_median_rel < ra.mx_median_rel, "eps=0.05 M median rel " + g6(rb.mx_median_rel));
    o.require(rb.eta_l1_rel < ra.eta_l1_rel, "eta L1 " + g6(rb.eta_l1_rel));
}

struct Criterion {
    const char* name;
    std::function<void(Outcome&)> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all = {
        {"constants", c1},          {"eikonal/transport", c2}, {"inversion round trips", c3},
        {"Jacobian identities", c4}, {"caustic structure", c5}, {"Lambda identity", c6},
        {"wp asymptotics", c7},     {"matching ladder", c8},   {"eta marginal", c9},
        {"marginal M(x)", c10},     {"FD oracle", c11}};
    std::vector<int> pick;
    if (argc > 1) {
        const int k = std::atoi(argv[1]);
        if (k < 1 || k > static_cast<int>(all.size())) {
            std::fprintf(stderr, "usage: acceptance [1-%zu]\n", all.size());
            return 2;
        }
        pick.push_back(k);
    } else {
        for (int k = 1; k <= static_cast<int>(all.size()); ++k) pick.push_back(k);
    }
    int failed = 0;
    for (int k : pick) {
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            all[k - 1].run(o);
        } catch (const std::exception& e) {
            o.require(false, std::string("exception: ") + e.what());
        }
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("[%s] %d %s: %s(%.1f s)\n", o.pass ? "PASS" : "FAIL", k, all[k - 1].name, o.msg.str().c_str(), sec);
        std::fflush(stdout);
        failed += !o.pass;
    }
    return failed ? 1 : 0;
}
