// Acceptance suite: one criterion per runner, one PASS/FAIL line each.
// Every tolerance is pinned here, in code. Exit status is the number of
// failed criteria.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "impdyn/io.hpp"

using namespace impdyn;
namespace fs = std::filesystem;

namespace {

struct Criterion {
    int id;
    const char* title;
    double limit_seconds;
    std::function<bool(std::string&)> run;
};

bool approx(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// ---- C1: billiard period law ------------------------------------------------

bool c1_billiard_period(std::string& detail) {
    // simulated suspension-orbit period vs 2 q cos(theta) at 1e-9
    auto field = make_field(FieldKind::disk_billiard);
    const std::pair<int, int> cases[] = {{1, 4}, {1, 3}, {2, 5}};
    bool ok = true;
    std::ostringstream os;
    for (auto [p, q] : cases) {
        const double theta = double(p) / double(q) * kPi;
        const double x0 = 1.0;
        // walk the collision sequence of the free flow and find the first
        // state recurrence
        double period = -1.0;
        Vec state{x0, theta, 0.0};
        double elapsed = 0.0;
        for (int k = 1; k <= 8 * q; ++k) {
            FlowResult r = flow(field, state, 2.0 * std::cos(theta));
            state = r.endpoint;
            elapsed += 2.0 * std::cos(theta);
            if (circle_dist(state[0], x0) < 1e-12 && std::abs(state[2]) < 1e-12) {
                period = elapsed;
                break;
            }
        }
        const double claimed = 2.0 * q * std::cos(theta);
        const bool this_ok = period > 0 && approx(period, claimed, 1e-9);
        ok = ok && this_ok;
        os << " (" << p << "," << q << "): measured " << fmt_g(period) << " vs 2q cos theta "
           << fmt_g(claimed) << (this_ok ? " ok" : " MISMATCH") << ";";
    }
    detail = os.str();
    return ok;
}

// ---- C2: billiard return map ----------------------------------------------

bool c2_billiard_bounce(std::string& detail) {
    auto field = make_field(FieldKind::disk_billiard);
    Rng rng(101);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const double x = rng.uniform(0.0, kTwoPi);
        const double theta = rng.uniform(-1.35, 1.35);
        FlowResult r = flow(field, Vec{x, theta, 0.0}, 2.0 * std::cos(theta));
        worst = std::max(worst, circle_dist(r.endpoint[0], x + kPi - 2.0 * theta));
        worst = std::max(worst, std::abs(r.endpoint[1] - theta));
    }
    detail = " max deviation " + fmt_g(worst);
    return worst <= 1e-10;
}

// ---- C3: predator-prey ------------------------------------------------------

bool c3_predator_prey(std::string& detail) {
    auto field = make_field(FieldKind::predator_prey);
    Vec at_fixed = eval_field(field, Vec{2.0, 1.0});
    if (at_fixed[0] != 0.0 || at_fixed[1] != 0.0) {
        detail = " field does not vanish exactly at (2,1)";
        return false;
    }
    auto sys = make_example_system("predator_prey");
    PeriodicSearch s = find_periodic(sys, Vec{0.3}, 1);
    if (s.status != SolveStatus::ok) {
        detail = " segment orbit not found";
        return false;
    }
    // quadrature oracle for the 1-D flight along the axis
    auto integrand = [](double x) { return 1.0 / (x * (3.0 - x)); };
    double oracle = 0.0;
    {
        const int n = 200000;
        double acc = integrand(0.5) + integrand(1.0);
        for (int i = 1; i < n; ++i) acc += integrand(0.5 + 0.5 * i / n) * (i % 2 ? 4.0 : 2.0);
        oracle = acc * 0.5 / (3.0 * n);
    }
    const double mult = std::abs(s.orbit.multipliers[0]);
    std::ostringstream os;
    os << " period " << fmt_g(s.orbit.period) << " vs quadrature " << fmt_g(oracle)
       << ", multiplier " << fmt_g(mult);
    detail = os.str();
    return approx(s.orbit.period, oracle, 1e-6) && mult < 0.5;
}

// ---- C4: annulus orbit and omega estimate ----------------------------------

bool c4_annulus(std::string& detail) {
    auto sys = make_example_system("annulus");
    PeriodicSearch s = find_periodic(sys, Vec{1.4}, 1);
    if (s.status != SolveStatus::ok) {
        detail = " orbit not found";
        return false;
    }
    bool ok = approx(s.orbit.points[0][0], 1.0, 1e-8) && approx(s.orbit.period, kPi, 1e-8) &&
              approx(std::abs(s.orbit.multipliers[0]), 0.5, 1e-8);
    OmegaReport rep = omega_estimate(sys, {0.01}, {0.01});
    double far = 0.0;
    for (const Vec& c : rep.scales[0].centers) far = std::max(far, std::abs(c[0] - 1.0));
    ok = ok && !rep.scales[0].centers.empty() && far <= 0.03;
    std::ostringstream os;
    os << " radius " << fmt_g(s.orbit.points[0][0]) << ", period " << fmt_g(s.orbit.period)
       << ", multiplier " << fmt_g(std::abs(s.orbit.multipliers[0])) << ", recurrent cells within "
       << fmt_g(far) << " of radius 1";
    detail = os.str();
    return ok;
}

// ---- C5: explosion of the recurrent set ------------------------------------

bool c5_explosion(std::string& detail) {
    const double h = 0.02, dgraph = 0.02;
    // delta = 0: identity impulse, inadmissible, constructed with the override
    auto flat = make_example_system("radial_disk", {{"delta", 0.0}}, true);
    // the radial flow contracts by e^{-t}; by t = 50 every orbit is closer to
    // the origin than any section, so the no-return horizon can be short
    flat.opts.t_max = 50.0;
    PseudoOrbitGraph g0 = build_graph(flat, h, dgraph);
    std::vector<int> rec0 = chain_recurrent_cells(g0);

    auto inflated = make_example_system("radial_disk", {{"delta", 0.5}});
    inflated.opts.t_max = 50.0;
    PseudoOrbitGraph g1 = build_graph(inflated, h, dgraph);
    std::vector<int> rec1 = chain_recurrent_cells(g1);

    // ambient chain-recurrent sets
    std::vector<Vec> a0, a1;
    for (int c : rec0) a0.push_back(flat.Dhat.chart(g0.grid.center(c)));
    for (int c : rec1) a1.push_back(inflated.Dhat.chart(g1.grid.center(c)));
    double hausdorff;
    if (a0.empty() != a1.empty()) {
        hausdorff = kInf;  // recurrence appears out of nothing
    } else if (a0.empty()) {
        hausdorff = 0.0;
    } else {
        double d01 = 0.0, d10 = 0.0;
        for (const Vec& x : a0) {
            double best = kInf;
            for (const Vec& y : a1) best = std::min(best, dist(x, y));
            d01 = std::max(d01, best);
        }
        for (const Vec& y : a1) {
            double best = kInf;
            for (const Vec& x : a0) best = std::min(best, dist(x, y));
            d10 = std::max(d10, best);
        }
        hausdorff = std::max(d01, d10);
    }
    std::ostringstream os;
    os << " |rec(0)| = " << rec0.size() << ", |rec(0.5)| = " << rec1.size() << "/"
       << g1.grid.cells() << ", Hausdorff " << (std::isinf(hausdorff) ? "inf" : fmt_g(hausdorff));
    detail = os.str();
    // the identity impulse never returns to its own circle; the inflated one
    // fills the landing circle
    return rec0.empty() && int(rec1.size()) == g1.grid.cells() &&
           hausdorff >= 1.0 - (h + dgraph);
}

// ---- C6: tau1 derivative dichotomy ------------------------------------------

bool c6_tau_dichotomy(std::string& detail) {
    auto bil = make_example_system("disk_billiard");
    TauSupResult b = tau1_derivative_sup(bil, 0.05);
    auto ann = make_example_system("annulus");
    TauSupResult a = tau1_derivative_sup(ann, 0.01);
    ImpulsiveSystem swapped = make_lorenz_interchanged();
    TauSupResult l = tau1_derivative_sup(swapped, 0.1);
    std::ostringstream os;
    os << " billiard sup " << fmt_g(b.value) << ", annulus sup " << fmt_g(a.value)
       << ", interchanged lorenz " << (l.finite ? "finite (unexpected)" : "infinite marker");
    detail = os.str();
    return b.finite && b.value <= 1e-8 && a.finite && a.value <= 1e-8 && !l.finite;
}

// ---- C7: jacobian oracles ----------------------------------------------------

bool c7_jacobian_oracles(std::string& detail) {
    Rng rng(23);
    std::ostringstream os;
    bool ok = true;
    for (const std::string name :
         {"annulus", "predator_prey", "radial_disk", "torus_linear", "disk_billiard",
          "lorenz_skew"}) {
        auto sys = make_example_system(name);
        const CrossSection& S = sys.Dhat;
        int done = 0;
        double worst = 0.0;
        for (int tries = 0; tries < 4000 && done < 100; ++tries) {
            Vec v(S.chart_dim);
            for (int i = 0; i < S.chart_dim; ++i)
                v[i] = rng.uniform(S.box_lo[i] + 0.05 * S.box_width(i),
                                   S.box_hi[i] - 0.05 * S.box_width(i));
            if (sys.field.kind == FieldKind::lorenz_skew && std::abs(v[0]) < 0.02) continue;
            PoincareResult pr = poincare(sys, v, true);
            if (pr.status != HitStatus::ok) continue;
            const double fd_h = 1e-6;
            // reject stencils that straddle a discontinuity line of tau1
            bool stable = true;
            PoincareResult side[4];
            int si = 0;
            for (int axis = 0; axis < S.chart_dim && stable; ++axis)
                for (double sgn : {-1.0, 1.0}) {
                    Vec w = v;
                    w[axis] += sgn * fd_h;
                    side[si] = poincare(sys, w);
                    if (side[si].status != HitStatus::ok ||
                        std::abs(side[si].tau - pr.tau) > 0.1)
                        stable = false;
                    ++si;
                }
            if (!stable) continue;
            Mat dp = poincare_jacobian(sys, v, &pr);
            for (int axis = 0; axis < S.chart_dim; ++axis) {
                const PoincareResult& plus = side[2 * axis + 1];
                const PoincareResult& minus = side[2 * axis];
                for (int r = 0; r < S.chart_dim; ++r) {
                    double dv = plus.value[r] - minus.value[r];
                    if (r == 0 && S.chart_periodic0) dv = std::remainder(dv, kTwoPi);
                    worst = std::max(worst, std::abs(dp(r, axis) - dv / (2 * fd_h)));
                }
                const double fd_tau = (plus.tau - minus.tau) / (2 * fd_h);
                Mat tan = S.chart_tangent(v);
                double analytic = 0.0;
                for (int i = 0; i < sys.field.dim; ++i) analytic += pr.dtau1[i] * tan(i, axis);
                worst = std::max(worst, std::abs(analytic - fd_tau));
            }
            ++done;
        }
        os << " " << name << ": " << done << " probes, worst " << fmt_g(worst) << ";";
        ok = ok && done >= 100 && worst <= 1e-4;
    }
    detail = os.str();
    return ok;
}

// ---- C8: perturbation contracts ---------------------------------------------

bool c8_perturbation_contracts(std::string& detail) {
    ExampleSpec disk = make_example("radial_disk");
    Rng rng(404);
    double worst_ratio = 0.0;
    int built = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const double eps = rng.uniform(0.02, 0.5);
        Vec p{rng.uniform(0.0, kTwoPi)};
        Impulse J = disk.impulse;
        if (trial % 2 == 0) {
            const double jump = rng.uniform(-1.0, 1.0) * eps * 0.98;
            J = bump_translate(disk.impulse, disk.Dhat, p, Vec{p[0] + jump}, eps);
        } else {
            Mat E(1, 1);
            E(0, 0) = rng.uniform(-1.0, 1.0) * 0.98 * eps / kBumpLinearSlope;
            J = bump_linear(disk.impulse, disk.Dhat, p, E, rng.uniform(0.05, 0.4), eps);
        }
        if (J.bumps.empty()) continue;
        ++built;
        const double analytic = c1_distance(disk.impulse, J, disk.D);
        if (analytic > eps) {
            detail = " analytic bound exceeded the requested budget";
            return false;
        }
        // grid-sampled C1 distance must stay within the analytic bound
        double measured = 0.0;
        const int n = 3000;
        for (int i = 0; i <= n; ++i) {
            Vec u{kTwoPi * i / n};
            Vec dv = disk.impulse.apply(u) - J.apply(u);
            dv[0] = std::remainder(dv[0], kTwoPi);
            measured = std::max(measured, std::abs(dv[0]));
            measured = std::max(measured,
                                std::abs(disk.impulse.jacobian(u)(0, 0) - J.jacobian(u)(0, 0)));
        }
        if (measured > analytic * 1.05) {
            detail = " sampled distance escaped the analytic bound";
            return false;
        }
        worst_ratio = std::max(worst_ratio, measured / analytic);
    }
    std::ostringstream os;
    os << " " << built << " constructions, max measured/analytic " << fmt_g(worst_ratio);
    detail = os.str();
    return built >= 900;
}

// ---- C9: closing end-to-end ---------------------------------------------------

bool c9_closing(std::string& detail) {
    auto disk = make_example_system("radial_disk", {{"delta", 0.5}});
    const double h = 0.01, delta = 0.01, eps = 0.1;
    DensityReport rep = density_experiment(disk, eps, h, delta, 100000, 2024);
    int verified = 0;
    for (const DensityCellRecord& c : rep.cells) {
        if (!c.success) continue;
        bool hyp = true;
        for (const auto& m : c.multipliers)
            if (std::abs(std::abs(m) - 1.0) <= 1e-6) hyp = false;
        if (hyp && c.c1_cost <= eps + 1e-12) ++verified;
    }
    // re-verify a sample by direct simulation under the reported impulse
    PseudoOrbitGraph g = build_graph(disk, h, delta);
    int resim_ok = 0, resim = 0;
    for (size_t i = 0; i < rep.cells.size(); i += 37) {
        const DensityCellRecord& c = rep.cells[i];
        if (!c.success) continue;
        ++resim;
        CloseToPeriodicOpts opts;
        opts.proximity = h + delta;
        opts.close.delta0 = delta;
        CloseToPeriodicResult r = close_to_periodic(disk, c.center, eps, opts);
        if (!r.ok) continue;
        ImpulsiveSystem pert = disk;
        pert.impulse = r.impulse;
        Trajectory tr = trajectory(pert, pert.Dhat.chart(r.orbit.points[0]),
                                   r.orbit.period + 1e-6);
        if (!tr.jumps.empty() &&
            pert.Dhat.chart_dist(tr.jumps.back().post_chart, r.orbit.points[0]) < 1e-6)
            ++resim_ok;
        // the criterion's proximity target at (h + delta)
        if (pert.Dhat.chart_dist(r.orbit.points[0], c.center) > h + delta) {
            detail = " success orbit farther than h + delta from its cell";
            return false;
        }
    }
    std::ostringstream os;
    os << " fraction " << fmt_g(rep.fraction) << " over " << rep.attempted << " cells, "
       << verified << " verified hyperbolic, " << resim_ok << "/" << resim
       << " re-simulated closures";
    detail = os.str();
    return rep.fraction >= 0.95 && verified == rep.successes && resim_ok == resim;
}

// ---- C10: continuation ---------------------------------------------------------

bool c10_continuation(std::string& detail) {
    auto sys = make_example_system("annulus");
    PeriodicSearch s = find_periodic(sys, Vec{1.2}, 1);
    if (s.status != SolveStatus::ok) {
        detail = " base orbit not found";
        return false;
    }
    Impulse J = make_affine_impulse("annulus_D", "annulus_Dhat", 1, Vec{0.5}, Vec{0.51});
    ContinuationResult c = continue_orbit(sys, s.orbit, J, 0.05);
    if (!c.ok) {
        detail = " continuation failed: " + c.reason;
        return false;
    }
    const double rho = c.orbit.points[0][0];
    const double mult = std::abs(c.orbit.multipliers[0]);
    // uniqueness in the neighborhood: every seed lands on the same orbit
    ImpulsiveSystem pert = sys;
    pert.impulse = J;
    bool unique = true;
    for (double seed : {1.05, 1.2, 1.35, 1.5}) {
        PeriodicSearch again = find_periodic(pert, Vec{seed}, 1);
        if (again.status != SolveStatus::ok ||
            std::abs(again.orbit.points[0][0] - rho) > 1e-8)
            unique = false;
    }
    std::ostringstream os;
    os << " new radius " << fmt_g(rho) << ", period " << fmt_g(c.orbit.period) << ", multiplier "
       << fmt_g(mult) << (unique ? ", unique" : ", NOT unique");
    detail = os.str();
    return approx(c.orbit.period, kPi, 1e-6) && approx(mult, 0.51, 1e-6) && unique &&
           approx(rho, 0.5 / 0.49, 1e-6);
}

// ---- C11: determinism -----------------------------------------------------------

bool c11_determinism(std::string& detail) {
    const char* cli = IMPDYN_CLI_PATH;
    fs::path dir = fs::temp_directory_path() / "impdyn_acceptance_det";
    fs::remove_all(dir);
    fs::create_directories(dir);
    auto write_cfg = [&](const fs::path& p, const std::string& out_dir, const char* op_name) {
        Json cfg;
        if (std::strcmp(op_name, "density") == 0) {
            cfg = Json{{"example", "radial_disk"},
                       {"operation", "density"},
                       {"op", Json{{"eps", 0.1}, {"h", 0.1}, {"delta", 0.1}}},
                       {"output_dir", out_dir},
                       {"seed", 42}};
        } else {
            cfg = Json{{"example", "annulus"},
                       {"operation", "simulate"},
                       {"op", Json{{"x0", Json::array({-1.0, 0.0})}, {"T", 10.0}}},
                       {"output_dir", out_dir},
                       {"seed", 42}};
        }
        write_text(p, cfg.dump(2));
    };
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream os;
        os << in.rdbuf();
        return os.str();
    };
    for (const char* op_name : {"density", "simulate"}) {
        for (const char* tag : {"a", "b"}) {
            fs::path cfg = dir / (std::string(op_name) + "_" + tag + ".json");
            write_cfg(cfg, (dir / (std::string(op_name) + "_out_" + tag)).string(), op_name);
            const std::string cmd = std::string(cli) + " run " + cfg.string() + " >/dev/null 2>&1";
            if (std::system(cmd.c_str()) != 0) {
                detail = std::string(" cli run failed for ") + op_name;
                return false;
            }
        }
        Json manifest = Json::parse(
            slurp(dir / (std::string(op_name) + "_out_a") / "manifest.json"));
        for (const auto& name : manifest["outputs"]) {
            const std::string f = name.get<std::string>();
            if (slurp(dir / (std::string(op_name) + "_out_a") / f) !=
                slurp(dir / (std::string(op_name) + "_out_b") / f)) {
                detail = " byte mismatch in " + f;
                return false;
            }
        }
    }
    detail = " declared outputs byte-identical across reruns (manifest records wall time)";
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i)
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) only = std::atoi(argv[i + 1]);

    const Criterion criteria[] = {
        {1, "billiard period law 2q cos(theta) for (1,4),(1,3),(2,5)", 1.0, c1_billiard_period},
        {2, "billiard return map matches R_{pi-2theta} on 1000 points", 1.0, c2_billiard_bounce},
        {3, "predator-prey fixed point, segment period and multiplier", 5.0, c3_predator_prey},
        {4, "annulus orbit and chain-recurrent localization", 10.0, c4_annulus},
        {5, "explosion of the recurrent set under the inflating impulse", 30.0, c5_explosion},
        {6, "tau1-derivative dichotomy", 30.0, c6_tau_dichotomy},
        {7, "jacobian and hitting-time oracles vs finite differences", 60.0, c7_jacobian_oracles},
        {8, "perturbation contracts: analytic C1 bounds", 60.0, c8_perturbation_contracts},
        {9, "closing end-to-end on the radial disk", 300.0, c9_closing},
        {10, "hyperbolic continuation under a base-slope change", 5.0, c10_continuation},
        {11, "determinism: fixed seed gives identical bytes", 120.0, c11_determinism},
    };

    int failures = 0;
    for (const Criterion& c : criteria) {
        if (only != 0 && c.id != only) continue;
        std::string detail;
        const auto t0 = std::chrono::steady_clock::now();
        bool ok = false;
        try {
            ok = c.run(detail);
        } catch (const std::exception& e) {
            detail = std::string(" exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs > c.limit_seconds) {
            ok = false;
            detail += " [over time limit]";
        }
        std::printf("[%s] C%d: %s (%.2fs, limit %.0fs)%s\n", ok ? "PASS" : "FAIL", c.id, c.title,
                    secs, c.limit_seconds, detail.c_str());
        if (!ok) ++failures;
    }
    return failures;
}
