#include <catch_amalgamated.hpp>

#include <boost/math/tools/roots.hpp>
#include <cmath>

#include "mmq/caustics.hpp"

using namespace mmq;
using Catch::Matchers::WithinAbs;

TEST_CASE("caustic points are rays with J = 0") {
    for (double D : {0.5, 1.0, 2.0}) {
        const auto curves = sample_caustics(D, 20);
        REQUIRE(curves.size() == 2);
        CHECK(curves[0].label != curves[1].label);
        for (const auto& c : curves)
            for (const auto& s : c.samples) {
                CHECK_THAT(jacobian_I(s.t, s.s0, D), WithinAbs(0.0, 1e-8 * std::exp(2 * s.t)));
                const auto r = ray1_forward(s.t, s.s0, D);
                CHECK_THAT(std::max(r.x, 0.0), WithinAbs(s.x, 1e-9 * (1 + s.x)));
                CHECK_THAT(r.eta, WithinAbs(s.eta, 1e-9 * (1 + std::abs(s.eta))));
                CHECK(s.x >= 0.0);
                CHECK(s.x <= 5.0 + 1e-9);
            }
    }
}

TEST_CASE("cusp against an independent fold condition") {
    for (double D : {0.5, 1.0, 2.0}) {
        // J is affine in s, so J = 0 gives s(t) directly; the cusp is where grad J is orthogonal to
        // the null vector (-x_s, x_t) of the ray map
        auto s_on = [D](double t) {
            const double j0 = jacobian_I(t, 0.0, D), j1 = jacobian_I(t, 1.0, D);
            return -j0 / (j1 - j0);
        };
        auto fold = [&](double t) {
            const double s = s_on(t), h = 1e-6;
            const double Jt = (jacobian_I(t + h, s, D) - jacobian_I(t - h, s, D)) / (2 * h);
            const double Js = (jacobian_I(t, s + h, D) - jacobian_I(t, s - h, D)) / (2 * h);
            const auto p = ray1_partials(t, s, D);
            return -Jt * p.x_s + Js * p.x_t;
        };
        const Cusp c = find_cusp(D);
        const double tp = caustic_pole(D);
        // nearest sign change of the fold condition to the reported cusp
        double best = NAN;
        const int N = 4000;
        double prev = fold(tp + 1e-3);
        for (int k = 1; k <= N; ++k) {
            const double a = tp + 1e-3 + 5.0 * (k - 1) / N, b = tp + 1e-3 + 5.0 * k / N;
            const double fb = fold(b);
            if ((prev > 0) != (fb > 0)) {
                std::uintmax_t it = 200;
                auto r = boost::math::tools::toms748_solve(fold, a, b, boost::math::tools::eps_tolerance<double>(40), it);
                const double tc = 0.5 * (r.first + r.second);
                if (std::isnan(best) || std::abs(tc - c.t) < std::abs(best - c.t)) best = tc;
            }
            prev = fb;
        }
        REQUIRE(std::isfinite(best));
        CHECK_THAT(c.t, WithinAbs(best, 1e-5));
        const auto p = ray1_forward(best, s_on(best), D);
        CHECK_THAT(c.x, WithinAbs(p.x, 1e-7));
        CHECK_THAT(c.eta, WithinAbs(p.eta, 1e-7));
        CHECK(c.x > 0.0);
    }
}

TEST_CASE("eta star is where C- meets the axis") {
    for (double D : {0.5, 1.0, 2.0}) {
        const auto es = find_eta_star(D);
        const auto c = find_cusp(D);
        CHECK(es.t > c.t);
        CHECK_THAT(caustic_point(es.t, D).x, WithinAbs(0.0, 1e-10));
        // dense scan of x along the caustic beyond the cusp
        double tz = NAN, prev = caustic_point(c.t + 1e-4, D).x;
        for (int k = 1; k <= 100000 && std::isnan(tz); ++k) {
            const double t = c.t + 1e-4 + 6.0 * k / 100000;
            const double x = caustic_point(t, D).x;
            if ((prev > 0) != (x > 0)) tz = t;
            prev = x;
        }
        CHECK_THAT(es.t, WithinAbs(tz, 1e-4));
    }
}

TEST_CASE("three rays inside the caustic wedge, one outside") {
    const double D = 1.0;
    const auto curves = sample_caustics(D, 10);
    for (const auto& c : curves) {
        const auto& s = c.samples[5];
        const auto a = caustic_point(s.t + 1e-4, D), b = caustic_point(s.t - 1e-4, D);
        const double tx = a.x - b.x, te = a.eta - b.eta, n = std::hypot(tx, te);
        const double d = 1e-3;
        const int n1 = branch_count(s.x - d * te / n, s.eta + d * tx / n, D);
        const int n2 = branch_count(s.x + d * te / n, s.eta - d * tx / n, D);
        CHECK(std::min(n1, n2) == 1);
        CHECK(std::max(n1, n2) == 3);
    }
}

TEST_CASE("S0 pole") {
    for (double D : {0.5, 1.0, 2.0}) {
        const double tp = caustic_pole(D);
        CHECK(tp > 0.0);
        CHECK_THROWS_AS(s0_of_t(tp, D), PoleError);
        CHECK_THROWS_AS(caustic_point(tp, D), PoleError);
    }
}
