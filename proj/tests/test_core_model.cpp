#include <catch_amalgamated.hpp>

#include <cmath>

#include "mmq/core_model.hpp"

using namespace mmq;
using Catch::Matchers::WithinAbs;

TEST_CASE("classification at eps = 1e-3") {
    const ModelParams P{1.0, 1e-3};
    CHECK(classify_point({0.5, 2.0}, P).region == Region::RegionI);
    CHECK(classify_point({0.1, 2.0}, P).region == Region::RegionII);
    CHECK(classify_point({0.0, 1.0}, P).region == Region::Corner);
    CHECK(classify_point({1e-3, 0.5}, P).region == Region::SmallX);
    CHECK(classify_point({1e-3, 2.0}, P).region == Region::InnerInner);
    CHECK(classify_point({0.02, 2.0}, P).region == Region::Inner);
    CHECK(classify_point({x0_boundary(2.0), 2.0}, P).region == Region::Transition);
    CHECK(classify_point({1.0, 0.2}, P).region == Region::RegionI);
    CHECK(classify_point({1.0, -1.0}, P).region == Region::RegionI);
}

TEST_CASE("stretched coordinates") {
    const ModelParams P{1.0, 1e-3};
    const auto t = classify_point({0.02, 1.3}, P);
    CHECK_THAT(t.v, WithinAbs(20.0, 1e-12));
    CHECK_THAT(t.mu, WithinAbs(2.0, 1e-12));
    CHECK_THAT(t.gamma, WithinAbs(3.0, 1e-12));
    CHECK_THAT(t.omega, WithinAbs((0.02 - x0_boundary(1.3)) / 0.1, 1e-12));
    CHECK(std::isnan(classify_point({0.02, 0.5}, P).omega));
}

TEST_CASE("cusp neighbourhood is flagged") {
    const ModelParams P{1.0, 1e-3};
    const PhysPoint cusp{1.2, 0.4};
    CHECK(classify_point({1.25, 0.42}, P, {}, cusp).region == Region::NearCusp);
    CHECK(classify_point({1.25, 0.42}, P).region == Region::RegionI);
}

TEST_CASE("thresholds are honoured") {
    const ModelParams P{1.0, 1e-3};
    LayerThresholds th;
    th.transition_omega = 4.0;
    CHECK(classify_point({0.1, 2.0}, P, th).region == Region::Transition);
}

TEST_CASE("boundary curve X0") {
    CHECK(x0_boundary(1.0) == 0.0);
    CHECK_THAT(x0_boundary(std::exp(1.0)), WithinAbs(std::exp(1.0) - 2.0, 1e-15));
    // X0 is increasing with X0'(eta) = 1 - 1/eta
    const double h = 1e-6, eta = 2.5;
    CHECK_THAT((x0_boundary(eta + h) - x0_boundary(eta - h)) / (2 * h), WithinAbs(1.0 - 1.0 / eta, 1e-8));
    CHECK_THROWS_AS(x0_boundary(0.5), DomainError);
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(classify_point({0.1, 0.0}, {1.0, 0.0}), DomainError);
    CHECK_THROWS_AS(classify_point({0.1, 0.0}, {-1.0, 1e-3}), DomainError);
    CHECK_THROWS_AS(classify_point({0.1, 0.0}, {1.0, NAN}), DomainError);
    CHECK_THROWS_AS(classify_point({-0.1, 0.0}, {1.0, 1e-3}), DomainError);
    CHECK_THROWS_AS(j_factor(0.9, 1.0), DomainError);
}

TEST_CASE("j factor") {
    CHECK_THAT(j_factor(1.0, 1.0).j, WithinAbs(0.0, 1e-15));
    CHECK(j_factor(2.0, 1.0).j > 0.0);
    CHECK(j_factor(2.0, 1.0).j1 == 0.5 * j_factor(2.0, 1.0).j);
}
