// composite density, ray preimages and marginals through the library API
#include <cstdio>

#include "mmq/mmq.hpp"

int main() {
    using namespace mmq;
    const ModelParams P{1.0, 1e-3};

    for (PhysPoint p : {PhysPoint{0.5, 2.0}, {0.1, 2.0}, {0.0, 1.0}, {0.02, 2.0}, {1e-3, 0.5}}) {
        const LayerEval ev = eval_composite(p, P);
        std::printf("F(%.3g, %.3g): %-10s nu=%s log10 F=%.6f\n", p.x, p.eta, region_name(ev.tag.region),
                    to_string(ev.nu).c_str(), ev.log10_value(P.eps));
    }

    const Cusp c = find_cusp(P.D);
    std::printf("cusp at (%.6f, %.6f)\n", c.x, c.eta);
    for (const auto& r : ray1_invert(0.6, -1.8, P.D))
        std::printf("  ray through (0.6, -1.8): t=%.6f s=%.6f psi=%.6f\n", r.t, r.s, ray1_forward(r.t, r.s, P.D).psi);

    for (double x : {0.0, 0.01, 0.1, 1.0}) std::printf("log10 M(%.2g) = %.6f\n", x, M_of_x(x, P).log_value(P.eps) / std::log(10.0));
    std::printf("eta marginal ratio at eta=0.5: %.5f\n", eta_marginal_ratio(0.5, P));
}
