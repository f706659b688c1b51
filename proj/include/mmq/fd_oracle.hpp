#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "core_model.hpp"
#include "errors.hpp"
#include "layers.hpp"
#include "marginals.hpp"
#include "numerics.hpp"

namespace mmq {

enum class Convection {
    Auto,      // centered where the cell Peclet number is <= 2, upwind elsewhere
    Upwind,
    Centered,
};

struct GridSpec {
    double x_max = 3.0;
    double eta_min = -2.0;
    double eta_max = 3.0;
    int n_x = 300;
    int n_eta = 400;
    double eps = 0.1;
    double D = 1.0;
    Convection scheme = Convection::Auto;
    int max_iter = 50;
    double tol = 1e-12;

    double hx() const { return x_max / n_x; }
    double heta() const { return (eta_max - eta_min) / n_eta; }
    double x_at(int i) const { return (i + 0.5) * hx(); }
    double eta_at(int j) const { return eta_min + (j + 0.5) * heta(); }

    void validate() const {
        if (!(x_max > 0.0)) throw DomainError("GridSpec: x_max must be positive");
        if (!(eta_min < 0.0 && eta_max > 1.0)) throw DomainError("GridSpec: need eta_min < 0 < 1 < eta_max");
        if (n_x < 4 || n_eta < 4) throw DomainError("GridSpec: need at least 4 cells per direction");
        ModelParams{D, eps}.validate();
    }
};

inline const char* convection_name(Convection c) {
    switch (c) {
        case Convection::Auto: return "auto";
        case Convection::Upwind: return "upwind";
        case Convection::Centered: return "centered";
    }
    return "?";
}

// values(i, j) = F at cell centre (x_i, eta_j); x_i = (i + 1/2) h_x
struct OracleGrid {
    GridSpec spec;
    std::vector<double> values;  // row-major in i (x), n_x * n_eta
    double eigenvalue = 0.0;         // smallest-magnitude eigenvalue reached by inverse iteration
    double residual_interior = 0.0;  // ||A F||_inf / (||A||_inf ||F||_inf)
    double residual_boundary = 0.0;  // max over x=0 faces of |D eps F_x + (1 - eta) F| / scale, one-sided
    double normalization = 0.0;      // mass before scaling
    double min_value = 0.0;          // after normalization
    int iterations = 0;
    std::string scheme = "finite-volume, cell-centred; zero-flux face at x=0; Dirichlet 0 at x_max, eta_min, eta_max";

    double at(int i, int j) const { return values[static_cast<std::size_t>(i) * spec.n_eta + j]; }
};

namespace detail {

// conservative form: d/dx[eps D F_x + (1 - eta) F] + d/deta[eps F_eta + eta F] = 0
// face flux G = k (F_R - F_L)/h + a F_face, with a the coefficient of F in the flux
inline void face_weights(double k, double a, double h, Convection sc, double& wl, double& wr) {
    const double d = k / h;
    bool upwind = sc == Convection::Upwind || (sc == Convection::Auto && std::abs(a) * h > 2.0 * k);
    double fl, fr;
    if (upwind) {
        // transport velocity is -a
        fl = a < 0.0 ? 1.0 : 0.0;
        fr = 1.0 - fl;
    } else {
        fl = fr = 0.5;
    }
    wl = -d + a * fl;
    wr = d + a * fr;
}

} // namespace detail

inline Eigen::SparseMatrix<double> assemble_operator(const GridSpec& g) {
    g.validate();
    const int nx = g.n_x, ne = g.n_eta;
    const double hx = g.hx(), he = g.heta(), kx = g.eps * g.D, ke = g.eps;
    auto id = [ne](int i, int j) { return i * ne + j; };
    std::vector<Eigen::Triplet<double>> T;
    T.reserve(static_cast<std::size_t>(nx) * ne * 5);
    // row c: (G_{i+1/2} - G_{i-1/2})/hx + (H_{j+1/2} - H_{j-1/2})/he
    auto add_face = [&](int cl, int cr, double wl, double wr, double h) {
        // +G/h on the left cell, -G/h on the right cell; cl or cr < 0 means a Dirichlet ghost
        if (cl >= 0) {
            T.emplace_back(cl, cl, wl / h);
            if (cr >= 0) T.emplace_back(cl, cr, wr / h);
        }
        if (cr >= 0) {
            T.emplace_back(cr, cr, -wr / h);
            if (cl >= 0) T.emplace_back(cr, cl, -wl / h);
        }
    };
    for (int j = 0; j < ne; ++j) {
        const double a = 1.0 - g.eta_at(j);
        double wl, wr;
        detail::face_weights(kx, a, hx, g.scheme, wl, wr);
        for (int i = 0; i + 1 < nx; ++i) add_face(id(i, j), id(i + 1, j), wl, wr, hx);
        // x_max: F = 0 on the face, convective outflow upwinded
        add_face(id(nx - 1, j), -1, -kx / (0.5 * hx) + (a < 0.0 ? a : 0.0), 0.0, hx);
        // x = 0 face carries no flux
    }
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j + 1 < ne; ++j) {
            const double a = g.eta_min + (j + 1) * he;
            double wl, wr;
            detail::face_weights(ke, a, he, g.scheme, wl, wr);
            add_face(id(i, j), id(i, j + 1), wl, wr, he);
        }
        const double alo = g.eta_min, ahi = g.eta_max;
        // lower edge: cell is on the right of the face
        add_face(-1, id(i, 0), 0.0, ke / (0.5 * he) + (alo > 0.0 ? alo : 0.0), he);
        add_face(id(i, ne - 1), -1, -ke / (0.5 * he) + (ahi < 0.0 ? ahi : 0.0), 0.0, he);
    }
    Eigen::SparseMatrix<double> A(nx * ne, nx * ne);
    A.setFromTriplets(T.begin(), T.end());
    A.makeCompressed();
    return A;
}

inline OracleGrid solve_fd(const GridSpec& g) {
    const auto A = assemble_operator(g);
    const int n = static_cast<int>(A.rows());
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(A);
    lu.factorize(A);
    if (lu.info() != Eigen::Success) throw NumericalError("sparse LU factorization failed: " + lu.lastErrorMessage(), 0.0);

    const double hx = g.hx(), he = g.heta();
    Eigen::VectorXd v(n);
    for (int i = 0; i < g.n_x; ++i)
        for (int j = 0; j < g.n_eta; ++j) {
            const double e = g.eta_at(j);
            v[i * g.n_eta + j] = std::exp(-e * e / (2.0 * g.eps) - g.x_at(i) / ((g.D + 1.0) * g.eps));
        }
    v /= v.norm();
    OracleGrid out;
    out.spec = g;
    double lam = 0.0, change = 1.0;
    int it = 0;
    for (; it < g.max_iter; ++it) {
        Eigen::VectorXd w = lu.solve(v);
        if (lu.info() != Eigen::Success) throw NumericalError("sparse solve failed", 0.0);
        const double nw = w.norm();
        if (!std::isfinite(nw) || nw == 0.0) throw NumericalError("inverse iteration broke down", 0.0);
        lam = v.dot(w) / (nw * nw);  // Rayleigh-type estimate of the eigenvalue
        w /= nw;
        if (w.sum() < 0.0) w = -w;
        change = (w - v).norm();
        v = w;
        if (change < g.tol) break;
    }
    out.iterations = it + 1;
    if (change > 1e-8)
        throw NumericalError("inverse iteration did not converge, last change " + std::to_string(change), change);

    const Eigen::VectorXd r = A * v;
    double anorm = 0.0;
    for (int k = 0; k < A.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator itr(A, k); itr; ++itr) anorm = std::max(anorm, std::abs(itr.value()));
    out.eigenvalue = lam;
    out.residual_interior = r.cwiseAbs().maxCoeff() / (anorm * v.cwiseAbs().maxCoeff());

    const double mass = v.sum() * hx * he;
    out.normalization = mass;
    v /= mass;
    out.values.assign(v.data(), v.data() + n);
    out.min_value = v.minCoeff();

    // Robin condition at x = 0 from the first two cell centres
    double rb = 0.0, scale = 0.0;
    for (int j = 0; j < g.n_eta; ++j) {
        const double f0 = out.at(0, j), f1 = out.at(1, j);
        const double fx = (f1 - f0) / hx, fb = 1.5 * f0 - 0.5 * f1;
        rb = std::max(rb, std::abs(g.D * g.eps * fx + (1.0 - g.eta_at(j)) * fb));
        scale = std::max(scale, std::abs(fb));
    }
    out.residual_boundary = scale > 0.0 ? rb / scale : 0.0;
    return out;
}

struct CurvePoint {
    double at;
    double value;
};

// M(x) at cell centres: sum over eta columns times h_eta
inline std::vector<CurvePoint> oracle_marginal_x(const OracleGrid& g) {
    std::vector<CurvePoint> m;
    m.reserve(g.spec.n_x);
    for (int i = 0; i < g.spec.n_x; ++i) {
        double s = 0.0;
        for (int j = 0; j < g.spec.n_eta; ++j) s += g.at(i, j);
        m.push_back({g.spec.x_at(i), s * g.spec.heta()});
    }
    return m;
}

inline std::vector<CurvePoint> oracle_marginal_eta(const OracleGrid& g) {
    std::vector<CurvePoint> m;
    m.reserve(g.spec.n_eta);
    for (int j = 0; j < g.spec.n_eta; ++j) {
        double s = 0.0;
        for (int i = 0; i < g.spec.n_x; ++i) s += g.at(i, j);
        m.push_back({g.spec.eta_at(j), s * g.spec.hx()});
    }
    return m;
}

struct OracleReport {
    double eps = 0.0, D = 0.0;
    double mx_median_rel = 0.0, mx_max_rel = 0.0;  // M(x) vs M_of_x on [0, x_window]
    int mx_points = 0;
    double eta_l1 = 0.0;                            // int |m(eta) - gaussian|
    double eta_l1_rel = 0.0;                        // same, divided by int gaussian on the box
    double f_median_log_gap = 0.0, f_max_log_gap = 0.0;  // |log F_fd - log F_composite|
    int f_points = 0, f_skipped = 0;
    double residual_interior = 0.0, residual_boundary = 0.0;
};

inline double median_of(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline OracleReport compare_to_asymptotics(const OracleGrid& g, double x_window = 1.0, int f_stride = 25) {
    const auto& s = g.spec;
    const ModelParams P{s.D, s.eps};
    OracleReport rep;
    rep.eps = s.eps;
    rep.D = s.D;
    rep.residual_interior = g.residual_interior;
    rep.residual_boundary = g.residual_boundary;

    std::vector<double> rel;
    for (const auto& p : oracle_marginal_x(g)) {
        if (p.at > x_window) break;
        const double m = std::exp(M_of_x(p.at, P).log_value(s.eps));
        rel.push_back(std::abs(p.value - m) / m);
    }
    rep.mx_points = static_cast<int>(rel.size());
    rep.mx_median_rel = median_of(rel);
    rep.mx_max_rel = rel.empty() ? 0.0 : *std::max_element(rel.begin(), rel.end());

    double l1 = 0.0, mass = 0.0;
    for (const auto& p : oracle_marginal_eta(g)) {
        const double gs = std::exp(-p.at * p.at / (2.0 * s.eps)) / std::sqrt(2.0 * pi * s.eps);
        l1 += std::abs(p.value - gs) * s.heta();
        mass += gs * s.heta();
    }
    rep.eta_l1 = l1;
    rep.eta_l1_rel = l1 / mass;

    // pointwise comparison away from the truncation edges
    std::vector<double> gaps;
    for (int i = 0; i < s.n_x; i += f_stride) {
        const double x = s.x_at(i);
        if (x > 0.75 * s.x_max) break;
        for (int j = 0; j < s.n_eta; j += f_stride) {
            const double eta = s.eta_at(j);
            if (eta < 0.75 * s.eta_min || eta > 0.75 * s.eta_max) continue;
            const double f = g.at(i, j);
            if (!(f > 0.0)) { ++rep.f_skipped; continue; }
            try {
                const auto ev = eval_composite({x, eta}, P);
                gaps.push_back(std::abs(std::log(f) - ev.log_value(s.eps)));
            } catch (const Error&) {
                ++rep.f_skipped;
            }
        }
    }
    rep.f_points = static_cast<int>(gaps.size());
    rep.f_median_log_gap = median_of(gaps);
    rep.f_max_log_gap = gaps.empty() ? 0.0 : *std::max_element(gaps.begin(), gaps.end());
    return rep;
}

} // namespace mmq
