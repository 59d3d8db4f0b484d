#pragma once

#include <algorithm>
#include <complex>

#include "impdyn/semiflow.hpp"

namespace impdyn {

enum class OrbitTag { hyperbolic, non_hyperbolic, undetermined };

inline const char* orbit_tag_name(OrbitTag t) {
    switch (t) {
        case OrbitTag::hyperbolic: return "hyperbolic";
        case OrbitTag::non_hyperbolic: return "non_hyperbolic";
        case OrbitTag::undetermined: return "undetermined";
    }
    return "?";
}

struct PeriodicOrbit {
    std::vector<Vec> points;          // cycle of Dhat chart points
    std::vector<double> flight_times;
    double period = 0.0;
    Mat monodromy;
    std::vector<std::complex<double>> multipliers;
    OrbitTag tag = OrbitTag::undetermined;
};

enum class SolveStatus { ok, not_found, singular_jacobian };

struct PeriodicSearch {
    SolveStatus status = SolveStatus::not_found;
    PeriodicOrbit orbit;
    HitStatus blocking = HitStatus::ok;  // grazing/boundary/no_return when a crossing failed
};

struct PeriodicOpts {
    double tol = 1e-10;
    int max_iters = 50;
    double unit_circle_tol = 1e-6;
    double cond_limit = 1e12;
};

inline OrbitTag classify(const std::vector<std::complex<double>>& multipliers,
                         double unit_circle_tol = 1e-6) {
    for (const auto& m : multipliers)
        if (std::abs(std::abs(m) - 1.0) <= unit_circle_tol) return OrbitTag::non_hyperbolic;
    return OrbitTag::hyperbolic;
}

inline void classify(PeriodicOrbit& orbit, double unit_circle_tol = 1e-6) {
    orbit.tag = classify(orbit.multipliers, unit_circle_tol);
}

namespace detail {

// Walk P_I^N from u, returning the endpoint displacement F = P^N(u) - u, the
// chain-product Jacobian, and the visited cycle data.
struct CycleEval {
    bool ok = false;
    HitStatus blocking = HitStatus::ok;
    Vec F;
    Mat DF;  // D(P^N) - Id when jacobian requested
    Mat DPn;
    std::vector<Vec> points;
    std::vector<double> flights;
};

inline CycleEval eval_cycle(const ImpulsiveSystem& sys, const Vec& u0, int N, bool want_jac) {
    CycleEval ev;
    const int m = sys.Dhat.chart_dim;
    Vec u = u0;
    Mat J = Mat::identity(m);
    for (int k = 0; k < N; ++k) {
        ev.points.push_back(u);
        PoincareResult pr = poincare(sys, u);
        if (pr.status != HitStatus::ok) {
            ev.blocking = pr.status;
            return ev;
        }
        if (want_jac) J = poincare_jacobian(sys, u, &pr) * J;
        ev.flights.push_back(pr.tau);
        u = pr.value;
    }
    ev.ok = true;
    ev.F = u - u0;
    if (sys.Dhat.chart_periodic0) ev.F[0] = std::remainder(u[0] - u0[0], kTwoPi);
    if (want_jac) {
        ev.DPn = J;
        ev.DF = J - Mat::identity(m);
    }
    return ev;
}

inline double cond_estimate(const Mat& m) {
    const double n1 = norm_op(m);
    const double d = std::abs(det(m));
    if (d < 1e-300) return kInf;
    return n1 * norm_op(inverse(m));
}

}  // namespace detail

// Damped Newton on F(u) = P_I^N(u) - u. Requires every intermediate section
// crossing to be non-grazing and off the chart boundary.
inline PeriodicSearch find_periodic(const ImpulsiveSystem& sys, const Vec& u0, int N,
                                    PeriodicOpts opts = {}) {
    if (N < 1) throw BadParams("find_periodic: N must be >= 1");
    PeriodicSearch out;
    Vec u = u0;
    if (!sys.Dhat.in_box(u)) throw ChartError("find_periodic: seed outside the landing chart");
    detail::CycleEval ev = detail::eval_cycle(sys, u, N, false);
    if (!ev.ok) {
        out.blocking = ev.blocking;
        return out;
    }
    double fnorm = norm(ev.F);
    for (int it = 0; it < opts.max_iters && fnorm > opts.tol; ++it) {
        detail::CycleEval evj = detail::eval_cycle(sys, u, N, true);
        if (!evj.ok) {
            out.blocking = evj.blocking;
            return out;
        }
        Vec step;
        if (detail::cond_estimate(evj.DF) > opts.cond_limit) {
            // Singular Newton matrix: fall back to plain damped residual steps.
            step = -1.0 * evj.F;
            out.status = SolveStatus::singular_jacobian;
        } else {
            step = -1.0 * solve(evj.DF, evj.F);
        }
        double damp = 1.0;
        bool advanced = false;
        for (int half = 0; half < 12; ++half) {
            Vec cand = u + damp * step;
            if (sys.Dhat.chart_periodic0) cand[0] = wrap_angle(cand[0]);
            if (sys.Dhat.in_box(cand)) {
                detail::CycleEval evc = detail::eval_cycle(sys, cand, N, false);
                if (evc.ok && norm(evc.F) < fnorm) {
                    u = cand;
                    ev = evc;
                    fnorm = norm(evc.F);
                    advanced = true;
                    break;
                }
            }
            damp *= 0.5;
        }
        if (!advanced) {
            out.status = SolveStatus::not_found;
            return out;
        }
    }
    if (fnorm > opts.tol) {
        out.status = SolveStatus::not_found;
        return out;
    }
    detail::CycleEval evf = detail::eval_cycle(sys, u, N, true);
    if (!evf.ok) {
        out.blocking = evf.blocking;
        out.status = SolveStatus::not_found;
        return out;
    }
    PeriodicOrbit orb;
    orb.points = evf.points;
    orb.flight_times = evf.flights;
    orb.period = 0.0;
    for (double t : evf.flights) orb.period += t;
    orb.monodromy = evf.DPn;
    int cnt = 0;
    auto eig = eigenvalues2(evf.DPn, &cnt);
    for (int i = 0; i < cnt; ++i) orb.multipliers.push_back(eig[i]);
    classify(orb, opts.unit_circle_tol);
    out.orbit = std::move(orb);
    out.status = SolveStatus::ok;
    return out;
}

struct ContinuationResult {
    bool ok = false;
    PeriodicOrbit orbit;
    int failed_segment = -1;
    std::string reason;
};

// Re-solve the orbit under a perturbed impulse, seeded at the old cycle.
// Succeeds only when the new period stays inside (T - eps_T, T + eps_T).
inline ContinuationResult continue_orbit(const ImpulsiveSystem& sys, const PeriodicOrbit& orbit,
                                         const Impulse& J, double eps_T, PeriodicOpts opts = {}) {
    ContinuationResult out;
    ImpulsiveSystem pert = sys;
    pert.impulse = J;
    const int N = int(orbit.points.size());
    // Report which segment loses its crossing, if any.
    Vec u = orbit.points[0];
    for (int k = 0; k < N; ++k) {
        PoincareResult pr = poincare(pert, u);
        if (pr.status != HitStatus::ok) {
            out.failed_segment = k;
            out.reason = std::string("segment crossing failed: ") + hit_status_name(pr.status);
            return out;
        }
        if (!pert.Dhat.in_box(pr.value, 1e-9)) {
            out.failed_segment = k;
            out.reason = "impulse image left the landing chart";
            return out;
        }
        u = pr.value;
    }
    PeriodicSearch s = find_periodic(pert, orbit.points[0], N, opts);
    if (s.status != SolveStatus::ok) {
        out.reason = "newton did not converge from the previous orbit";
        return out;
    }
    if (std::abs(s.orbit.period - orbit.period) >= eps_T) {
        out.reason = "continued orbit left the period window";
        return out;
    }
    out.ok = true;
    out.orbit = std::move(s.orbit);
    return out;
}

struct HyperbolizationResult {
    bool ok = false;
    Impulse impulse;
    PeriodicOrbit orbit;
    std::string reason;
};

// Franks-type hyperbolization: a linear bump at one orbit point, uniform
// scaling E = eta*Id first, random retries within the same budget after.
// The bump fixes the orbit pointwise; only the derivative moves.
inline HyperbolizationResult make_hyperbolic(const ImpulsiveSystem& sys, const PeriodicOrbit& orbit,
                                             double eps, int attempts = 8, std::uint64_t seed = 12345,
                                             PeriodicOpts opts = {}) {
    HyperbolizationResult out;
    out.impulse = sys.impulse;
    if (orbit.tag == OrbitTag::hyperbolic) {
        out.ok = true;
        out.orbit = orbit;
        return out;
    }
    const int m = sys.Dhat.chart_dim;
    const Vec& p = orbit.points[0];
    // Support radius: inside the chart, clear of the other cycle points.
    double radius = kInf;
    for (int i = 0; i < m; ++i) {
        if (i == 0 && sys.Dhat.chart_periodic0) continue;
        radius = std::min(radius, p[i] - sys.Dhat.box_lo[i]);
        radius = std::min(radius, sys.Dhat.box_hi[i] - p[i]);
    }
    for (size_t k = 1; k < orbit.points.size(); ++k)
        radius = std::min(radius, 0.5 * sys.Dhat.chart_dist(p, orbit.points[k]));
    radius = std::min(radius, 0.25);
    if (!(radius > 0)) {
        out.reason = "orbit point sits on the chart boundary";
        return out;
    }
    const double eta = 0.98 * eps / kBumpLinearSlope;
    if (eta <= 0) {
        out.reason = "zero C1 budget";
        return out;
    }
    Rng rng(seed);
    for (int attempt = 0; attempt < attempts; ++attempt) {
        Mat E(m, m);
        if (attempt == 0) {
            for (int i = 0; i < m; ++i) E(i, i) = eta;
        } else {
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j) E(i, j) = rng.uniform(-1.0, 1.0) * eta / m;
        }
        Impulse J;
        try {
            J = bump_linear(sys.impulse, sys.Dhat, p, E, radius, eps);
        } catch (const BudgetExceeded&) {
            continue;
        }
        ImpulsiveSystem pert = sys;
        pert.impulse = J;
        PeriodicSearch s = find_periodic(pert, p, int(orbit.points.size()), opts);
        if (s.status == SolveStatus::ok && s.orbit.tag == OrbitTag::hyperbolic) {
            out.ok = true;
            out.impulse = J;
            out.orbit = std::move(s.orbit);
            return out;
        }
    }
    out.reason = "hyperbolization failed after all attempts";
    return out;
}

struct AuditEntry {
    PeriodicOrbit orbit;
    Vec seed;
    int returns = 0;
};

struct AuditReport {
    std::vector<AuditEntry> orbits;
    bool all_hyperbolic = true;
    int seeds_tried = 0;
    int searches_failed = 0;
};

namespace detail {

// Point-set proximity in the chart metric; collapses an N-fold repetition of
// a shorter cycle onto the cycle itself.
inline bool same_orbit(const CrossSection& chart, const PeriodicOrbit& a, const PeriodicOrbit& b,
                       double tol) {
    auto one_sided = [&](const PeriodicOrbit& u, const PeriodicOrbit& v) {
        for (const Vec& p : u.points) {
            double best = kInf;
            for (const Vec& q : v.points) best = std::min(best, chart.chart_dist(p, q));
            if (best > tol) return false;
        }
        return true;
    };
    return one_sided(a, b) && one_sided(b, a);
}

}  // namespace detail

// Finite Kupka-Smale audit: enumerate orbits with period <= n_max found from
// a chart-covering seed grid, deduplicate, and check hyperbolicity. Verdict
// only; nothing is enforced.
inline AuditReport audit_kupka_smale(const ImpulsiveSystem& sys, double n_max, double eps_bd,
                                     int seeds_per_axis, PeriodicOpts opts = {}) {
    AuditReport rep;
    const double tau0 = std::max(sys.min_flight, 1e-6);
    const int Nmax = std::max(1, int(n_max / tau0));
    std::vector<Vec> seeds;
    const CrossSection& S = sys.Dhat;
    if (S.chart_dim == 1) {
        for (int i = 0; i < seeds_per_axis; ++i)
            seeds.push_back(Vec{S.box_lo[0] + (i + 0.5) * S.box_width(0) / seeds_per_axis});
    } else {
        for (int i = 0; i < seeds_per_axis; ++i)
            for (int j = 0; j < seeds_per_axis; ++j)
                seeds.push_back(Vec{S.box_lo[0] + (i + 0.5) * S.box_width(0) / seeds_per_axis,
                                    S.box_lo[1] + (j + 0.5) * S.box_width(1) / seeds_per_axis});
    }
    for (const Vec& seed : seeds) {
        ++rep.seeds_tried;
        for (int N = 1; N <= Nmax; ++N) {
            PeriodicSearch s = find_periodic(sys, seed, N, opts);
            if (s.status != SolveStatus::ok) {
                ++rep.searches_failed;
                continue;
            }
            if (s.orbit.period > n_max + 1e-9) continue;
            bool off_boundary = true;
            for (const Vec& p : s.orbit.points)
                if (S.boundary_distance(p) < eps_bd) off_boundary = false;
            if (!off_boundary) continue;
            bool dup = false;
            for (const AuditEntry& e : rep.orbits)
                if (detail::same_orbit(S, e.orbit, s.orbit, 10.0 * opts.tol)) dup = true;
            if (dup) continue;
            AuditEntry e;
            e.orbit = s.orbit;
            e.seed = seed;
            e.returns = N;
            if (e.orbit.tag != OrbitTag::hyperbolic) rep.all_hyperbolic = false;
            rep.orbits.push_back(std::move(e));
        }
    }
    return rep;
}

}  // namespace impdyn
