#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "errors.hpp"

namespace mmq {

struct ModelParams {
    double D = 1.0;
    double eps = 1e-3;

    double c() const { return 1.0 / std::sqrt(eps); }
    void validate() const {
        if (!(D > 0.0) || !std::isfinite(D)) throw DomainError("D must be positive");
        if (!(eps > 0.0) || !std::isfinite(eps)) throw DomainError("eps must be positive");
    }
};

struct PhysPoint {
    double x = 0.0;
    double eta = 0.0;
};

enum class Region { RegionI, RegionII, SmallX, Inner, InnerInner, Corner, Transition, NearCusp };

inline const char* region_name(Region r) {
    switch (r) {
        case Region::RegionI: return "RegionI";
        case Region::RegionII: return "RegionII";
        case Region::SmallX: return "SmallX";
        case Region::Inner: return "Inner";
        case Region::InnerInner: return "InnerInner";
        case Region::Corner: return "Corner";
        case Region::Transition: return "Transition";
        case Region::NearCusp: return "NearCusp";
    }
    return "?";
}

// cutoffs on the stretched coordinates; the band is |eta-1| in units of eps^{1/3}
struct LayerThresholds {
    double corner_mu = 8.0;
    double corner_gamma = 4.0;
    double transition_omega = 1.5;
    double band = 4.0;
    double inner_mu = 8.0;
    double small_v = 8.0;
    double cusp_radius = 0.1;
};

struct RegionTag {
    Region region = Region::RegionI;
    double v = 0.0;
    double mu = 0.0;
    double gamma = 0.0;
    double omega = std::numeric_limits<double>::quiet_NaN();  // only for eta >= 1
};

inline double x0_boundary(double eta) {
    if (!(eta >= 1.0)) throw DomainError("x0_boundary requires eta >= 1");
    return eta - std::log(eta) - 1.0;
}

inline double alpha_fn(double sigma, double D) { return (D + 1.0) * sigma - 1.0; }

inline double beta_fn(double sigma, double D) { return D * sigma * sigma + (sigma - 1.0) * (sigma - 1.0); }

struct JFactor {
    double j;
    double j1;
};

inline JFactor j_factor(double eta, double D) {
    if (!(eta >= 1.0)) throw DomainError("j_factor requires eta >= 1");
    const double j = 2.0 * (1.0 + 1.0 / D) * eta * std::log(eta) + (4.0 - 3.0 * eta - 1.0 / eta) / D;
    return {j, 0.5 * j};
}

inline RegionTag classify_point(const PhysPoint& p, const ModelParams& params, const LayerThresholds& th = {},
                                std::optional<PhysPoint> cusp = std::nullopt) {
    if (!(p.x >= 0.0)) throw DomainError("classify_point requires x >= 0");
    params.validate();
    const double e13 = std::cbrt(params.eps);
    RegionTag tag;
    tag.v = p.x / params.eps;
    tag.mu = p.x / (e13 * e13);
    tag.gamma = (p.eta - 1.0) / e13;
    if (p.eta >= 1.0) tag.omega = (p.x - x0_boundary(p.eta)) / e13;

    const bool above = p.eta > 1.0 + th.band * e13;
    const bool below = p.eta < 1.0 - th.band * e13;

    if (tag.mu <= th.corner_mu && std::abs(tag.gamma) <= th.corner_gamma) {
        tag.region = Region::Corner;
    } else if (above && std::abs(tag.omega) <= th.transition_omega) {
        tag.region = Region::Transition;
    } else if (above && tag.v <= th.small_v) {
        tag.region = Region::InnerInner;
    } else if (above && tag.mu <= th.inner_mu) {
        tag.region = Region::Inner;
    } else if (below && tag.v <= th.small_v) {
        tag.region = Region::SmallX;
    } else if (cusp && std::hypot(p.x - cusp->x, p.eta - cusp->eta) <= th.cusp_radius) {
        tag.region = Region::NearCusp;
    } else if (p.eta <= 1.0 || p.x >= x0_boundary(p.eta)) {
        tag.region = Region::RegionI;
    } else {
        tag.region = Region::RegionII;
    }
    return tag;
}

} // namespace mmq
