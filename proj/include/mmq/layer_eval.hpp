#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "core_model.hpp"
#include "errors.hpp"

namespace mmq {

struct Rational {
    int num = 0;
    int den = 1;
    double value() const { return static_cast<double>(num) / den; }
    bool operator==(const Rational&) const = default;
};

inline std::string to_string(const Rational& r) { return std::to_string(r.num) + "/" + std::to_string(r.den); }

// F ~ eps^nu exp(phase_1/eps + phase_13/eps^{1/3} + phase_0) * amplitude
struct LayerEval {
    Rational nu;
    double phase_1 = 0.0;
    double phase_13 = 0.0;
    double phase_0 = 0.0;
    double amplitude = 0.0;
    RegionTag tag;
    std::vector<std::string> diagnostics;

    double log_value(double eps) const {
        return nu.value() * std::log(eps) + phase_1 / eps + phase_13 / std::cbrt(eps) + phase_0 + std::log(amplitude);
    }
    double log10_value(double eps) const { return log_value(eps) / std::log(10.0); }
    double value(double eps) const {
        const double lv = log_value(eps);
        if (lv > 709.0) throw OverflowError("value exceeds double range");
        return std::exp(lv);
    }
};

inline constexpr Rational nu_region1{-3, 2};
inline constexpr Rational nu_region2{-4, 3};
inline constexpr Rational nu_inner{-3, 2};
inline constexpr Rational nu_inner_inner{-7, 6};
inline constexpr Rational nu_corner{-7, 6};
inline constexpr Rational nu_transition{-1, 1};
inline constexpr Rational nu_small_x{-3, 2};

} // namespace mmq
