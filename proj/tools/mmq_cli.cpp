#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "mmq/mmq.hpp"

using namespace mmq;
using io::json;

namespace {

struct Common {
    double eps = 1e-3;
    double D = 1.0;
    std::string out;
    LayerThresholds th;
};

void add_params(CLI::App* c, Common& o, bool with_eps = true) {
    if (with_eps) c->add_option("--eps", o.eps, "small parameter eps = 1/c^2")->check(CLI::PositiveNumber);
    c->add_option("--D", o.D, "diffusion ratio D")->check(CLI::PositiveNumber);
    c->add_option("--out", o.out, "output path (stdout when empty)");
}

void add_thresholds(CLI::App* c, LayerThresholds& th) {
    c->add_option("--corner-mu", th.corner_mu);
    c->add_option("--corner-gamma", th.corner_gamma);
    c->add_option("--transition-omega", th.transition_omega);
    c->add_option("--band", th.band);
    c->add_option("--inner-mu", th.inner_mu);
    c->add_option("--small-v", th.small_v);
    c->add_option("--cusp-radius", th.cusp_radius);
}

json thresholds_json(const LayerThresholds& th) {
    json j;
    j["corner_mu"] = th.corner_mu;
    j["corner_gamma"] = th.corner_gamma;
    j["transition_omega"] = th.transition_omega;
    j["band"] = th.band;
    j["inner_mu"] = th.inner_mu;
    j["small_v"] = th.small_v;
    j["cusp_radius"] = th.cusp_radius;
    return j;
}

json provenance(const std::string& cmd, const Common& o, bool with_eps = true) {
    json j;
    j["command"] = cmd;
    if (with_eps) j["eps"] = o.eps;
    j["D"] = o.D;
    j["thresholds"] = thresholds_json(o.th);
    return j;
}

void emit(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        std::cout.flush();
    } else {
        io::write_atomic(path, text);
    }
}

// config values fill options that were not given on the command line
// keys another subcommand understands are skipped; unknown keys are an error
std::vector<std::string> merge_config(CLI::App& app, int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::string cfg;
    for (std::size_t k = 0; k + 1 < args.size(); ++k)
        if (args[k] == "--config") cfg = args[k + 1];
    if (cfg.empty()) return args;
    std::set<std::string> given;
    for (const auto& a : args)
        if (a.rfind("--", 0) == 0) given.insert(a.substr(2, a.find('=') == std::string::npos ? std::string::npos : a.find('=') - 2));
    CLI::App* sub = nullptr;
    for (const auto& a : args)
        if (auto* c = app.get_subcommand_no_throw(a)) { sub = c; break; }
    auto accepts = [](CLI::App* c, const std::string& key) { return c && c->get_option_no_throw("--" + key); };
    for (const auto& [k, v] : io::read_config(cfg)) {
        if (given.count(k)) continue;
        if (!accepts(sub, k) && !accepts(&app, k)) {
            bool known = false;
            for (auto* c : app.get_subcommands([](CLI::App*) { return true; })) known = known || accepts(c, k);
            if (!known) throw UsageError("unknown config key: " + k);
            continue;
        }
        if (v == "true") args.push_back("--" + k);
        else if (v != "false") {
            args.push_back("--" + k);
            args.push_back(v);
        }
    }
    return args;
}

LayerEval eval_layer(const std::string& layer, const PhysPoint& p, const ModelParams& P, const LayerOptions& opt) {
    const double e13 = std::cbrt(P.eps), e23 = e13 * e13;
    if (layer == "auto") return eval_composite(p, P, opt);
    if (layer == "region1") return eval_F_regionI(p, P, opt.thresholds, Atlas::global().cusp(P.D));
    if (layer == "region2") return eval_F_regionII(p, P, opt.thresholds);
    if (layer == "inner") return eval_inner(p.x / e23, p.eta, P);
    if (layer == "inner-inner") return eval_inner_inner(p.x / P.eps, p.eta, P);
    if (layer == "corner") return eval_corner(p.x / e23, (p.eta - 1.0) / e13, P, opt.corner_spec);
    if (layer == "transition") return eval_transition((p.x - x0_boundary(p.eta)) / e13, p.eta, P, opt.wp_spec);
    if (layer == "small-x") return eval_small_x(p.x / P.eps, p.eta, P);
    throw UsageError("unknown layer: " + layer);
}

struct CheckResult {
    bool pass = true;
    json report;
    std::vector<std::string> lines;
    void fail(const std::string& what) {
        pass = false;
        lines.push_back("FAIL " + what);
    }
    void ok(const std::string& what) { lines.push_back("ok   " + what); }
};

std::string fmt(const char* f, double a) {
    char b[64];
    std::snprintf(b, sizeof b, f, a);
    return b;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Matched-asymptotic evaluator for a Markov-modulated fluid queue density"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config;
    app.add_option("--config", config, "flat key=value file; command-line flags take precedence");

    Common o;

    // eval
    auto* ce = app.add_subcommand("eval", "evaluate F at one point");
    double ex = 0.0, eeta = 0.0;
    std::string layer = "auto";
    bool raw = false;
    ce->add_option("--x", ex)->required();
    ce->add_option("--eta", eeta)->required();
    ce->add_option("--layer", layer)->check(CLI::IsMember(
        {"auto", "region1", "region2", "inner", "inner-inner", "corner", "transition", "small-x"}));
    ce->add_flag("--raw", raw, "also print the value itself when representable");
    add_params(ce, o);
    add_thresholds(ce, o.th);

    // grid
    auto* cg = app.add_subcommand("grid", "evaluate the composite on a rectangular grid (CSV)");
    double gx0 = 0.0, gx1 = 1.0, ge0 = -1.0, ge1 = 2.0;
    int gnx = 21, gne = 31;
    cg->add_option("--x-min", gx0);
    cg->add_option("--x-max", gx1);
    cg->add_option("--eta-min", ge0);
    cg->add_option("--eta-max", ge1);
    cg->add_option("--nx", gnx)->check(CLI::PositiveNumber);
    cg->add_option("--neta", gne)->check(CLI::PositiveNumber);
    add_params(cg, o);
    add_thresholds(cg, o.th);

    // rays
    auto* cr = app.add_subcommand("rays", "trace a fan of rays (CSV)");
    std::string region = "I";
    int n_rays = 12, n_steps = 200;
    double t_max = 3.0, s_min = NAN, s_max = NAN;
    cr->add_option("--region", region)->check(CLI::IsMember({"I", "II"}));
    cr->add_option("--n-rays", n_rays)->check(CLI::PositiveNumber);
    cr->add_option("--n-steps", n_steps)->check(CLI::PositiveNumber);
    cr->add_option("--t-max", t_max)->check(CLI::PositiveNumber);
    cr->add_option("--s-min", s_min, "first ray label (s in Region I, sigma in Region II)");
    cr->add_option("--s-max", s_max);
    add_params(cr, o, false);

    // caustics
    auto* cc = app.add_subcommand("caustics", "caustic curves and cusp (CSV per branch + JSON)");
    std::string out_dir = ".";
    int cn = 200;
    double cxmax = 5.0, ctmax = INFINITY;
    cc->add_option("--out-dir", out_dir);
    cc->add_option("--n", cn, "intervals per branch")->check(CLI::PositiveNumber);
    cc->add_option("--x-max", cxmax, "truncate the outer branch at this x");
    cc->add_option("--t-max", ctmax, "drop samples with t above this");
    cc->add_option("--D", o.D)->check(CLI::PositiveNumber);

    // marginal
    auto* cm = app.add_subcommand("marginal", "marginal density M(x) (CSV)");
    double mxmax = 3.0;
    int mn = 300;
    cm->add_option("--x-max", mxmax)->check(CLI::PositiveNumber);
    cm->add_option("--n", mn, "number of intervals on [0, x_max]")->check(CLI::PositiveNumber);
    add_params(cm, o);

    // check
    auto* ck = app.add_subcommand("check", "run a verification suite; exit code 0 iff all tolerances are met");
    std::string suite;
    std::string pair;
    std::vector<double> etas{0.5, 2.0};
    double tol = NAN;
    ck->add_option("--suite", suite)->required()->check(CLI::IsMember(
        {"eikonal", "transport", "matching", "caustic-branches", "eta-marginal", "lambda", "roundtrip", "oracle"}));
    ck->add_option("--pair", pair, "matching pair, e.g. Corner-RegionI (all when empty)");
    ck->add_option("--etas", etas, "eta values for the eta-marginal suite");
    ck->add_option("--tol", tol, "override the suite tolerance");
    add_params(ck, o);

    // oracle
    auto* co = app.add_subcommand("oracle", "finite-volume solution of the full problem and comparison");
    GridSpec gs;
    std::string meta;
    std::string scheme = "auto";
    co->add_option("--nx", gs.n_x)->check(CLI::PositiveNumber);
    co->add_option("--neta", gs.n_eta)->check(CLI::PositiveNumber);
    co->add_option("--x-max", gs.x_max)->check(CLI::PositiveNumber);
    co->add_option("--eta-min", gs.eta_min);
    co->add_option("--eta-max", gs.eta_max);
    co->add_option("--scheme", scheme)->check(CLI::IsMember({"auto", "upwind", "centered"}));
    co->add_option("--meta", meta, "JSON metadata path (stdout when empty)");
    add_params(co, o);

    std::vector<std::string> args;
    try {
        args = merge_config(app, argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    std::vector<const char*> cargs{argv[0]};
    for (const auto& a : args) cargs.push_back(a.c_str());
    // oracle and check default to the moderate eps of the oracle runs unless given
    bool eps_given = false;
    for (const auto& a : args)
        if (a == "--eps" || a.rfind("--eps=", 0) == 0) eps_given = true;
    try {
        app.parse(static_cast<int>(cargs.size()), const_cast<char**>(cargs.data()));
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    if (co->parsed() && !eps_given) o.eps = 0.1;

    try {
        const ModelParams P{o.D, o.eps};
        P.validate();
        LayerOptions lopt;
        lopt.thresholds = o.th;

        if (ce->parsed()) {
            const auto ev = eval_layer(layer, {ex, eeta}, P, lopt);
            json j = io::to_json(ev, o.eps);
            j["x"] = ex;
            j["eta"] = eeta;
            j["layer"] = layer;
            if (raw) {
                try {
                    j["value"] = io::num(ev.value(o.eps));
                } catch (const OverflowError&) {
                    j["value"] = nullptr;
                }
            }
            j["config"] = provenance("eval", o);
            emit(o.out, io::dump(j));
            return 0;
        }

        if (cg->parsed()) {
            io::CsvTable t({"x", "eta", "tag", "nu", "phase_1", "phase_13", "phase_0", "amplitude", "log10F"});
            for (int i = 0; i < gnx; ++i) {
                const double x = gnx == 1 ? gx0 : gx0 + (gx1 - gx0) * i / (gnx - 1);
                for (int j = 0; j < gne; ++j) {
                    const double eta = gne == 1 ? ge0 : ge0 + (ge1 - ge0) * j / (gne - 1);
                    try {
                        const auto ev = eval_composite({x, eta}, P, lopt);
                        t.row_text({io::fmt17(x), io::fmt17(eta), region_name(ev.tag.region), to_string(ev.nu),
                                    io::fmt17(ev.phase_1), io::fmt17(ev.phase_13), io::fmt17(ev.phase_0),
                                    io::fmt17(ev.amplitude), io::fmt17(ev.log10_value(o.eps))});
                    } catch (const UnsupportedRegionError&) {
                        t.row_text({io::fmt17(x), io::fmt17(eta), "unsupported", "", "nan", "nan", "nan", "nan", "nan"});
                    }
                }
            }
            emit(o.out, t.str());
            if (!o.out.empty()) io::write_atomic(o.out + ".meta.json", io::dump(provenance("grid", o)));
            return 0;
        }

        if (cr->parsed()) {
            const bool one = region == "I";
            if (std::isnan(s_min)) s_min = one ? -2.0 : 1.05;
            if (std::isnan(s_max)) s_max = one ? 0.9 : 4.0;
            if (one && s_max >= 1.0) throw DomainError("Region I rays need s < 1");
            if (!one && s_min <= 1.0) throw DomainError("Region II rays need sigma > 1");
            io::CsvTable t({"ray", "s", "t", "x", "eta", "phase", "jac"});
            for (int r = 0; r < n_rays; ++r) {
                const double s = n_rays == 1 ? s_min : s_min + (s_max - s_min) * r / (n_rays - 1);
                for (int k = 0; k <= n_steps; ++k) {
                    const double tt = t_max * k / n_steps;
                    if (one) {
                        const auto st = ray1_forward(tt, s, o.D);
                        t.row({double(r), s, tt, st.x, st.eta, st.psi, st.jac});
                    } else {
                        const auto st = ray2_forward(tt, s, o.D);
                        t.row({double(r), s, tt, st.x, st.eta, st.phi, st.jac_tilde});
                    }
                }
            }
            emit(o.out, t.str());
            return 0;
        }

        if (cc->parsed()) {
            const auto curves = sample_caustics(o.D, cn, cxmax);
            std::filesystem::path dir(out_dir);
            for (const auto& c : curves) {
                io::CsvTable t({"t", "s0", "x_ca", "eta_ca"});
                for (const auto& s : c.samples)
                    if (s.t <= ctmax) t.row({s.t, s.s0, s.x, s.eta});
                const std::string name = c.label == CausticBranch::CPlus ? "caustic_cplus.csv" : "caustic_cminus.csv";
                io::write_atomic(dir / name, t.str());
            }
            const auto cu = find_cusp(o.D);
            const auto es = find_eta_star(o.D);
            json j;
            j["D"] = o.D;
            j["cusp"] = {{"t", cu.t}, {"x", cu.x}, {"eta", cu.eta}, {"slope", cu.slope}};
            j["eta_star"] = {{"t", es.t}, {"eta", es.eta}};
            j["pole_t"] = caustic_pole(o.D);
            j["files"] = {"caustic_cplus.csv", "caustic_cminus.csv"};
            io::write_atomic(dir / "cusp.json", io::dump(j));
            std::cout << io::dump(j);
            return 0;
        }

        if (cm->parsed()) {
            io::CsvTable t({"x", "E", "psi1", "delta", "M_log10", "M_smallx_log10", "M_largex_log10"});
            const double l10 = std::log(10.0);
            for (int k = 0; k <= mn; ++k) {
                const double x = mxmax * k / mn;
                const auto m = M_of_x(x, P);
                const double sm = x < o.D ? log_M_small_x(x, P) / l10 : NAN;
                const double lg = x > 0.0 ? log_M_large_x(x, P) / l10 : NAN;
                t.row({x, m.E, m.psi1, m.delta, m.log_value(o.eps) / l10, sm, lg});
            }
            emit(o.out, t.str());
            if (!o.out.empty()) io::write_atomic(o.out + ".meta.json", io::dump(provenance("marginal", o)));
            return 0;
        }

        if (ck->parsed()) {
            CheckResult res;
            json& rep = res.report;
            rep["suite"] = suite;
            rep["config"] = provenance("check", o);
            if (suite == "eikonal" || suite == "transport") {
                const double lim = std::isnan(tol) ? (suite == "eikonal" ? 1e-10 : 1e-6) : tol;
                for (auto reg : {RayRegion::I, RayRegion::II}) {
                    const auto st = suite == "eikonal" ? check_eikonal(reg, 1000, o.D) : check_transport(reg, 1000, o.D);
                    const std::string nm = reg == RayRegion::I ? "I" : "II";
                    rep["region_" + nm] = {{"max", st.max_abs}, {"mean", st.mean_abs}, {"n", st.n}};
                    const std::string line = suite + " region " + nm + " max residual " + fmt("%.3g", st.max_abs);
                    st.max_abs <= lim ? res.ok(line) : res.fail(line);
                }
                rep["tolerance"] = lim;
            } else if (suite == "matching") {
                std::vector<MatchPair> pairs = pair.empty() ? all_match_pairs() : std::vector<MatchPair>{parse_match_pair(pair)};
                MatchOptions mo;
                if (!std::isnan(tol)) mo.rel_tol = tol;
                json arr = json::array();
                for (auto p : pairs) {
                    const auto r = check_matching(p, o.D, mo);
                    json jr;
                    jr["pair"] = match_pair_name(p);
                    jr["eps_ladder"] = r.eps_ladder;
                    json pts = json::array();
                    std::string line = std::string(match_pair_name(p)) + " rel gaps";
                    for (const auto& m : r.points) {
                        pts.push_back({{"eps", m.eps}, {"x", m.p.x}, {"eta", m.p.eta}, {"log_left", m.log_left},
                                       {"log_right", m.log_right}, {"abs_gap", m.abs_gap}, {"rel_gap", m.rel_gap}});
                        line += " " + fmt("%.3g", m.rel_gap);
                    }
                    jr["points"] = pts;
                    jr["abs_decreasing"] = r.abs_decreasing;
                    jr["pass"] = r.pass;
                    jr["note"] = r.note;
                    arr.push_back(jr);
                    if (!r.note.empty()) line += " (" + r.note + ")";
                    r.pass ? res.ok(line) : res.fail(line);
                }
                rep["pairs"] = arr;
            } else if (suite == "caustic-branches") {
                const auto r = check_caustic_branches(o.D, 50);
                rep["C+"] = {{"ok", r.ok_plus}, {"samples", r.samples_plus}};
                rep["C-"] = {{"ok", r.ok_minus}, {"samples", r.samples_minus}};
                rep["max_collision_gap"] = r.max_collision_gap;
                const std::string line = "collision pattern C+ " + std::to_string(r.ok_plus) + "/" +
                                         std::to_string(r.samples_plus) + ", C- " + std::to_string(r.ok_minus) + "/" +
                                         std::to_string(r.samples_minus);
                r.pass ? res.ok(line) : res.fail(line);
            } else if (suite == "eta-marginal") {
                json arr = json::array();
                for (double eta : etas) {
                    const auto r = eta_marginal(eta, P);
                    const double lim = std::isnan(tol) ? (eta < 1.0 ? 0.02 : 0.05) : tol;
                    arr.push_back({{"eta", eta}, {"ratio", r.ratio}, {"method", r.method}, {"tolerance", lim}});
                    const std::string line = "eta=" + fmt("%g", eta) + " ratio " + fmt("%.6f", r.ratio);
                    std::abs(r.ratio - 1.0) <= lim ? res.ok(line) : res.fail(line);
                }
                rep["points"] = arr;
            } else if (suite == "lambda") {
                const double lim = std::isnan(tol) ? 1e-4 : tol;
                BromwichSpec ls;
                ls.half_length = 20.0;
                ls.n_nodes = 400;
                json arr = json::array();
                for (double g : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
                    const double num = lambda_integral(g, o.D, ls);
                    const double ref = std::cbrt(2.0) * std::pow(o.D, 2.0 / 3.0) * std::exp(g * g * g / (12.0 * o.D));
                    const double rel = std::abs(num / ref - 1.0);
                    arr.push_back({{"gamma", g}, {"numeric", num}, {"closed_form", ref}, {"rel_err", rel}});
                    const std::string line = "gamma=" + fmt("%g", g) + " rel err " + fmt("%.3g", rel);
                    rel <= lim ? res.ok(line) : res.fail(line);
                }
                rep["points"] = arr;
            } else if (suite == "roundtrip") {
                const double lim = std::isnan(tol) ? 1e-8 : tol;
                std::mt19937_64 rng(7);
                std::uniform_real_distribution<double> ut(0.05, 2.0), us(-1.5, 0.9), usg(1.05, 3.0);
                double e1 = 0.0, e2 = 0.0;
                for (int k = 0; k < 200; ++k) {
                    const double t = ut(rng), s = us(rng);
                    if (std::abs(jacobian_I(t, s, o.D)) < 0.05) continue;
                    const auto st = ray1_forward(t, s, o.D);
                    const auto rays = ray1_invert(st.x, st.eta, o.D, RayCoordI{t, s});
                    double best = INFINITY;
                    for (const auto& c : rays) best = std::min(best, std::hypot(c.t - t, c.s - s) / (1.0 + std::hypot(t, s)));
                    e1 = std::max(e1, best);
                    const double tau = ut(rng), sg = usg(rng);
                    const auto s2 = ray2_forward(tau, sg, o.D);
                    if (s2.x >= x0_boundary(s2.eta) || s2.x <= 0.0) continue;
                    const auto c2 = ray2_invert(s2.x, s2.eta, o.D);
                    e2 = std::max(e2, std::hypot(c2.tau - tau, c2.sigma - sg) / (1.0 + std::hypot(tau, sg)));
                }
                rep["region_I_max_rel"] = e1;
                rep["region_II_max_rel"] = e2;
                (e1 <= lim ? res.ok("region I round trip " + fmt("%.3g", e1)) : res.fail("region I round trip " + fmt("%.3g", e1)));
                (e2 <= lim ? res.ok("region II round trip " + fmt("%.3g", e2)) : res.fail("region II round trip " + fmt("%.3g", e2)));
            } else if (suite == "oracle") {
                GridSpec g;
                g.eps = eps_given ? o.eps : 0.1;
                g.D = o.D;
                const auto grid = solve_fd(g);
                const auto r = compare_to_asymptotics(grid);
                rep["M_median_rel"] = r.mx_median_rel;
                rep["M_max_rel"] = r.mx_max_rel;
                rep["eta_l1"] = r.eta_l1;
                rep["F_median_log_gap"] = r.f_median_log_gap;
                rep["residual_interior"] = r.residual_interior;
                const std::string l1 = "M(x) median rel err " + fmt("%.4f", r.mx_median_rel);
                const std::string l2 = "eta-marginal L1 " + fmt("%.3g", r.eta_l1);
                r.mx_median_rel <= 0.2 ? res.ok(l1) : res.fail(l1);
                r.eta_l1_rel <= 0.1 ? res.ok(l2) : res.fail(l2);
            }
            rep["pass"] = res.pass;
            for (const auto& l : res.lines) std::cerr << l << "\n";
            emit(o.out, io::dump(rep));
            return res.pass ? 0 : 1;
        }

        if (co->parsed()) {
            gs.eps = o.eps;
            gs.D = o.D;
            gs.scheme = scheme == "upwind" ? Convection::Upwind : scheme == "centered" ? Convection::Centered : Convection::Auto;
            const auto grid = solve_fd(gs);
            const auto r = compare_to_asymptotics(grid);
            if (!o.out.empty()) {
                io::CsvTable t({"x", "eta", "F"});
                for (int i = 0; i < gs.n_x; ++i)
                    for (int j = 0; j < gs.n_eta; ++j) t.row({gs.x_at(i), gs.eta_at(j), grid.at(i, j)});
                io::write_atomic(o.out, t.str());
            }
            json j;
            j["config"] = provenance("oracle", o);
            j["grid"] = {{"x_max", gs.x_max}, {"eta_min", gs.eta_min}, {"eta_max", gs.eta_max},
                         {"n_x", gs.n_x},     {"n_eta", gs.n_eta},     {"convection", convection_name(gs.scheme)}};
            j["scheme"] = grid.scheme;
            j["iterations"] = grid.iterations;
            j["eigenvalue"] = grid.eigenvalue;
            j["residual_interior"] = grid.residual_interior;
            j["residual_boundary"] = grid.residual_boundary;
            j["min_value"] = grid.min_value;
            j["comparison"] = {{"M_median_rel", r.mx_median_rel}, {"M_max_rel", r.mx_max_rel},
                               {"eta_l1", r.eta_l1},            {"F_median_log_gap", r.f_median_log_gap},
                               {"F_max_log_gap", r.f_max_log_gap}, {"F_points", r.f_points}};
            emit(meta, io::dump(j));
            return 0;
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
