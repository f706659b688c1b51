#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <optional>
#include <string>

#include "airy.hpp"
#include "caustics.hpp"
#include "core_model.hpp"
#include "errors.hpp"
#include "kernels.hpp"
#include "layer_eval.hpp"
#include "region1.hpp"
#include "region2.hpp"

namespace mmq {

struct LayerOptions {
    LayerThresholds thresholds;
    BromwichSpec corner_spec = saddle_spec();
    BromwichSpec wp_spec = saddle_spec();
};

namespace detail {

inline double layer_power(double eta, double D) {
    const double d1 = D + 1.0;
    const double ratio = (alpha_fn(eta, D) + std::sqrt(beta_fn(eta, D) * d1)) / (D + std::sqrt(D * d1));
    return std::pow(ratio, std::sqrt(D) / (2.0 * std::sqrt(d1)));
}

inline void require_above(double eta, const char* who) {
    if (!(eta > 1.0)) throw DomainError(std::string(who) + " requires eta > 1");
}

} // namespace detail

inline LayerEval eval_small_x(double v, double eta, const ModelParams& params) {
    params.validate();
    if (!(eta < 1.0)) throw DomainError("eval_small_x requires eta < 1");
    if (!(v >= 0.0)) throw DomainError("eval_small_x requires v >= 0");
    LayerEval ev;
    ev.tag = classify_point({v * params.eps, eta}, params);
    ev.nu = nu_small_x;
    ev.phase_1 = -0.5 * eta * eta;
    ev.phase_0 = -(1.0 - eta) * v / params.D;
    ev.amplitude = (1.0 - eta) / (params.D * std::sqrt(2.0 * pi));
    return ev;
}

inline double inner_R0_argument(double mu, double eta, double D) {
    return std::pow(2.0, -1.0 / 3.0) * std::pow(D, -5.0 / 6.0) * std::pow(beta_fn(eta, D), 1.0 / 6.0) * mu +
           airy_root_r0();
}

inline LayerEval eval_inner(double mu, double eta, const ModelParams& params) {
    params.validate();
    detail::require_above(eta, "eval_inner");
    if (!(mu >= 0.0)) throw DomainError("eval_inner requires mu >= 0");
    const double D = params.D, e23 = std::pow(params.eps, 2.0 / 3.0), x = mu * e23;
    LayerEval ev;
    ev.tag = classify_point({x, eta}, params);
    ev.nu = nu_inner;
    ev.phase_1 = phi0(eta, D) + (eta - 1.0) * x / (2.0 * D);
    ev.phase_13 = gamma_phase(eta, D);
    const auto ai = airy_scaled(cplx(inner_R0_argument(mu, eta, D), 0.0));
    const double aip = airy_ai_prime_r0();
    ev.amplitude = (eta - 1.0) * std::pow(D, -5.0 / 6.0) / std::sqrt(pi) * std::pow(2.0, -1.5) *
                   std::pow(beta_fn(eta, D), -1.0 / 6.0) * detail::layer_power(eta, D) * ai.ai.real() / (aip * aip);
    ev.phase_0 = ai.log_scale;
    return ev;
}

inline LayerEval eval_inner_inner(double v, double eta, const ModelParams& params) {
    params.validate();
    detail::require_above(eta, "eval_inner_inner");
    if (!(v >= 0.0)) throw DomainError("eval_inner_inner requires v >= 0");
    const double D = params.D, x = v * params.eps;
    LayerEval ev;
    ev.tag = classify_point({x, eta}, params);
    ev.nu = nu_inner_inner;
    ev.phase_1 = phi0(eta, D) + (eta - 1.0) * x / (2.0 * D);
    ev.phase_13 = gamma_phase(eta, D);
    ev.amplitude = std::pow(2.0, -5.0 / 6.0) / std::sqrt(pi) * std::pow(D, -2.0 / 3.0) * detail::layer_power(eta, D) /
                   airy_ai_prime_r0() * ((eta - 1.0) * v / (2.0 * D) + 1.0);
    return ev;
}

inline LayerEval eval_corner(double mu, double gamma, const ModelParams& params,
                             const BromwichSpec& spec = saddle_spec()) {
    params.validate();
    if (!(mu >= 0.0)) throw DomainError("eval_corner requires mu >= 0");
    const double D = params.D, e13 = std::cbrt(params.eps);
    const double eta = 1.0 + gamma * e13;
    LayerEval ev;
    ev.tag = classify_point({mu * e13 * e13, eta}, params);
    ev.nu = nu_corner;
    ev.phase_1 = -0.5 * eta * eta;
    const auto r = corner_kernel_scaled(mu, gamma, D, spec);
    ev.phase_0 = mu * gamma / (2.0 * D) - gamma * gamma * gamma / (12.0 * D) + r.value.log_scale;
    ev.amplitude = r.value.mantissa;
    if (r.condition > 1e6) ev.diagnostics.push_back("corner kernel poorly conditioned: " + std::to_string(r.condition));
    return ev;
}

inline double transition_wp_argument(double omega, double eta, double D) {
    const double j = j_factor(eta, D).j;
    return std::pow(2.0, 2.0 / 3.0) * eta * omega / (std::cbrt(D) * j);
}

inline LayerEval eval_transition(double omega, double eta, const ModelParams& params,
                                 const BromwichSpec& spec = saddle_spec()) {
    params.validate();
    detail::require_above(eta, "eval_transition");
    const double D = params.D, j = j_factor(eta, D).j, e13 = std::cbrt(params.eps);
    LayerEval ev;
    ev.tag = classify_point({std::max(0.0, x0_boundary(eta) + omega * e13), eta}, params);
    ev.nu = nu_transition;
    ev.phase_1 = -0.5 * eta * eta;
    const double w2 = eta * omega * omega / (2.0 * D * j);
    ev.phase_13 = -w2;
    const double z = eta * omega / (D * j);
    const double cubic = (4.0 * D * D + 6.0 * D + 3.0) * z * z * z / 6.0 -
                         omega * omega * omega * (2.0 * eta - 1.0) *
                             (2.0 * D * eta * eta + 2.0 * eta * eta - 2.0 * eta + 1.0) / (2.0 * eta * D * D * D * j * j * j);
    const auto r = wp_kernel_scaled(transition_wp_argument(omega, eta, D), spec);
    ev.phase_0 = cubic + r.value.log_scale;
    ev.amplitude = std::pow(2.0, -2.0 / 3.0) / pi * std::sqrt(eta / (D * j)) * r.value.mantissa;
    if (std::abs(cubic) > 0.5 * w2 / e13) ev.diagnostics.push_back("transition cubic terms are not subdominant");
    return ev;
}

// cusp positions cached per D
class Atlas {
public:
    std::optional<PhysPoint> cusp(double D) {
        std::lock_guard<std::mutex> lk(mu_);
        auto it = cache_.find(D);
        if (it != cache_.end()) return it->second;
        std::optional<PhysPoint> p;
        try {
            const Cusp c = find_cusp(D);
            p = PhysPoint{c.x, c.eta};
        } catch (const SearchError&) {
        }
        cache_[D] = p;
        return p;
    }
    static Atlas& global() {
        static Atlas a;
        return a;
    }

private:
    std::mutex mu_;
    std::map<double, std::optional<PhysPoint>> cache_;
};

inline RegionTag classify_with_cusp(const PhysPoint& p, const ModelParams& params, const LayerThresholds& th = {}) {
    return classify_point(p, params, th, Atlas::global().cusp(params.D));
}

inline LayerEval eval_composite(const PhysPoint& p, const ModelParams& params, const LayerOptions& opt = {}) {
    params.validate();
    const auto cusp = Atlas::global().cusp(params.D);
    const RegionTag tag = classify_point(p, params, opt.thresholds, cusp);
    LayerEval ev;
    switch (tag.region) {
        case Region::Corner: ev = eval_corner(tag.mu, tag.gamma, params, opt.corner_spec); break;
        case Region::Transition: ev = eval_transition(tag.omega, p.eta, params, opt.wp_spec); break;
        case Region::InnerInner: ev = eval_inner_inner(tag.v, p.eta, params); break;
        case Region::Inner: ev = eval_inner(tag.mu, p.eta, params); break;
        case Region::SmallX: ev = eval_small_x(tag.v, p.eta, params); break;
        case Region::NearCusp:
            throw UnsupportedRegionError("point lies near the cusp; no expansion is available there");
        case Region::RegionI: ev = eval_F_regionI(p, params, opt.thresholds, cusp); break;
        case Region::RegionII: ev = eval_F_regionII(p, params, opt.thresholds); break;
    }
    ev.tag = tag;
    return ev;
}

} // namespace mmq
