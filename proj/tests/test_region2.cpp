#include <catch_amalgamated.hpp>

#include <array>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>
#include <cmath>

#include "mmq/region2.hpp"

using namespace mmq;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

double b_of(double u, double D) { return 0.5 * u + std::sqrt(D * u * u + (u - 1) * (u - 1)) / (2 * std::sqrt(D)); }

// phi along x = 0 obeys d phi / d sigma = q = -b
double phi0_quad(double sigma, double D) {
    return -0.5 - boost::math::quadrature::gauss_kronrod<double, 31>::integrate([D](double u) { return b_of(u, D); }, 1.0, sigma);
}

using State = std::array<double, 5>;

// characteristics leaving x = 0 tangentially from eta = sigma
State charpit(double tau, double sigma, double D) {
    const double a = (1 - sigma) / (2 * D);
    State y{0.0, sigma, -a, -b_of(sigma, D), phi0_quad(sigma, D)};
    auto rhs = [D](const State& u, State& du, double) {
        const double xt = -(2.0 * D * u[2] + 1.0 - u[1]);
        const double et = -(2.0 * u[3] + u[1]);
        du = {xt, et, 0.0, u[3] - u[2], u[2] * xt + u[3] * et};
    };
    namespace ode = boost::numeric::odeint;
    ode::integrate_adaptive(ode::make_controlled(1e-13, 1e-13, ode::runge_kutta_dopri5<State>()), rhs, y, 0.0, tau, 1e-3);
    return y;
}

}  // namespace

TEST_CASE("boundary data") {
    CHECK_THAT(phi0(1.0, 1.0), WithinAbs(-0.5, 1e-15));
    CHECK(gamma_phase(1.0, 1.0) == 0.0);
    for (double D : {0.5, 1.0, 2.0})
        for (double s : {1.2, 2.0, 3.5}) CHECK_THAT(phi0(s, D), WithinRel(phi0_quad(s, D), 1e-12));
    const auto r = ray2_forward(0.0, 2.0, 1.0);
    CHECK_THAT(r.x, WithinAbs(0.0, 1e-14));
    CHECK_THAT(r.eta, WithinAbs(2.0, 1e-14));
    CHECK_FALSE(r.amp.has_value());
    CHECK_THROWS_AS(phi0(0.5, 1.0), DomainError);
}

TEST_CASE("closed-form rays match integrated characteristics") {
    for (double D : {0.5, 1.0, 2.0})
        for (double sigma : {1.3, 2.0, 3.0})
            for (double tau : {0.1, 0.6, 1.5}) {
                const auto y = charpit(tau, sigma, D);
                const auto r = ray2_forward(tau, sigma, D);
                CHECK_THAT(r.x, WithinAbs(y[0], 1e-9 * (1 + std::abs(y[0]))));
                CHECK_THAT(r.eta, WithinAbs(y[1], 1e-9 * (1 + std::abs(y[1]))));
                CHECK_THAT(r.phi_x, WithinAbs(y[2], 1e-9));
                CHECK_THAT(r.phi_eta, WithinAbs(y[3], 1e-9 * (1 + std::abs(y[3]))));
                CHECK_THAT(r.phi, WithinAbs(y[4], 1e-9 * (1 + std::abs(y[4]))));
            }
}

TEST_CASE("partials and Jacobian against finite differences") {
    const double h = 1e-6;
    for (double D : {0.5, 1.0, 2.0})
        for (auto [tau, sg] : {std::pair{0.3, 1.5}, {1.0, 2.5}, {0.05, 1.1}}) {
            auto X = [&](double a, double b) { return ray2_forward(a, b, D).x; };
            auto E = [&](double a, double b) { return ray2_forward(a, b, D).eta; };
            const auto p = ray2_partials(tau, sg, D);
            const double xt = (X(tau + h, sg) - X(tau - h, sg)) / (2 * h), xs = (X(tau, sg + h) - X(tau, sg - h)) / (2 * h);
            const double et = (E(tau + h, sg) - E(tau - h, sg)) / (2 * h), es = (E(tau, sg + h) - E(tau, sg - h)) / (2 * h);
            CHECK_THAT(p.x_tau, WithinAbs(xt, 1e-7));
            CHECK_THAT(p.x_sigma, WithinAbs(xs, 1e-7));
            CHECK_THAT(p.eta_tau, WithinAbs(et, 1e-7));
            CHECK_THAT(p.eta_sigma, WithinAbs(es, 1e-7));
            CHECK_THAT(jacobian_II(tau, sg, D), WithinAbs(xt * es - xs * et, 1e-6));
        }
}

TEST_CASE("Gamma' against finite differences of Gamma") {
    const double h = 1e-5;
    for (double D : {0.5, 1.0, 2.0})
        for (double s : {1.5, 2.0, 3.0})
            CHECK_THAT(gamma_prime(s, D), WithinRel((gamma_phase(s + h, D) - gamma_phase(s - h, D)) / (2 * h), 1e-8));
    CHECK(gamma_phase(2.0, 1.0) < 0.0);
}

TEST_CASE("inversion round trip") {
    for (double D : {0.5, 1.0, 2.0})
        for (auto [tau, sg] : {std::pair{0.2, 1.5}, {0.5, 2.0}, {1.0, 3.0}}) {
            const auto r = ray2_forward(tau, sg, D);
            const auto c = ray2_invert(r.x, r.eta, D);
            CHECK_THAT(c.tau, WithinAbs(tau, 1e-8));
            CHECK_THAT(c.sigma, WithinAbs(sg, 1e-8));
        }
    CHECK_THROWS_AS(ray2_invert(0.5, 2.0, 1.0), DomainError);
    CHECK_THROWS_AS(ray2_invert(0.1, 0.5, 1.0), DomainError);
}

TEST_CASE("small-x seed approaches the inversion") {
    double prev = 1e9;
    for (double x : {1e-2, 1e-3, 1e-4}) {
        const auto s = ray2_seed_small_x(x, 2.0, 1.0);
        const auto c = ray2_invert(x, 2.0, 1.0);
        const double err = std::hypot(s.tau - c.tau, s.sigma - c.sigma);
        CHECK(err < 5.0 * x * x);
        CHECK(err < prev);
        prev = err;
    }
}

TEST_CASE("Region II evaluation") {
    const ModelParams P{1.0, 1e-3};
    const auto ev = eval_F_regionII({0.1, 2.0}, P);
    CHECK(ev.nu == nu_region2);
    CHECK(ev.amplitude > 0.0);
    CHECK(ev.phase_13 < 0.0);
    const auto c = ray2_invert(0.1, 2.0, 1.0);
    CHECK_THAT(ev.amplitude, WithinRel(amplitude_L(c.tau, c.sigma, 1.0), 1e-14));
}
