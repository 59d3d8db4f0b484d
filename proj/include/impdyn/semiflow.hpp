#pragma once

#include <vector>

#include "impdyn/flow.hpp"
#include "impdyn/impulse_map.hpp"

namespace impdyn {

enum class HitStatus { ok, no_return, grazing, boundary };

inline const char* hit_status_name(HitStatus s) {
    switch (s) {
        case HitStatus::ok: return "ok";
        case HitStatus::no_return: return "no_return";
        case HitStatus::grazing: return "grazing";
        case HitStatus::boundary: return "boundary";
    }
    return "?";
}

struct SemiflowOpts {
    IntegratorOpts integrator;
    double event_time_tol = 1e-12;
    int bisect_iters = 60;
    double grazing_guard = 1e-6;
    double t_max = 1e3;  // hitting-time horizon standing in for tau1 = +infinity
};

struct HitResult {
    HitStatus status = HitStatus::no_return;
    double tau1 = kInf;
    Vec hit_ambient;
    Vec hit_chart;  // chart coordinates on the target section
    Vec dtau1;      // row vector d tau1 / dx in ambient coordinates
    bool grazing = false;
};

namespace detail {

// First crossing of `sec` along the RK4 trajectory of x. Sign changes of g
// are bracketed at the base step and bisected; roots that fail the chart
// membership test (spurious zeros of g) are skipped.
inline HitResult seek_section_rk4(const SystemField& f, const CrossSection& sec, Vec x,
                                  double t_max, const SemiflowOpts& opts, bool want_dtau) {
    HitResult out;
    const double h = opts.integrator.step;
    double t = 0.0;
    Vec prev = x;
    double prev_g = sec.event_g(x);
    bool settle = std::abs(prev_g) < 1e-10;  // starting on {g=0}: search t > 0
    const long max_steps = long(t_max / h) + 2;
    for (long k = 0; k < max_steps && t < t_max; ++k) {
        Vec next = prev;
        rk4_step(f, h, next, nullptr);
        if (!f.in_domain(next))
            throw DomainError("trajectory left phase domain while seeking a section");
        const double g = sec.event_g(next);
        const bool crossed = (prev_g < 0 && g >= 0) || (prev_g > 0 && g <= 0);
        if (!settle && crossed) {
            // bisect from the cached bracket start
            double lo = 0.0, hi = h;
            double glo = prev_g;
            Vec xm;
            for (int it = 0; it < opts.bisect_iters && (hi - lo) > opts.event_time_tol; ++it) {
                const double mid = 0.5 * (lo + hi);
                xm = prev;
                rk4_step(f, mid, xm, nullptr);
                const double gm = sec.event_g(xm);
                if ((glo < 0 && gm < 0) || (glo > 0 && gm > 0)) {
                    lo = mid;
                    glo = gm;
                } else {
                    hi = mid;
                }
            }
            const double root = 0.5 * (lo + hi);
            Vec xr = prev;
            rk4_step(f, root, xr, nullptr);
            auto u = sec.chart_inverse(xr, 1e-6);
            if (u) {
                out.tau1 = t + root;
                out.hit_ambient = xr;
                out.hit_chart = *u;
                Vec X = f.eval(xr);
                Vec gg = sec.grad_g(xr);
                const double gdot = dot(gg, X);
                if (std::abs(gdot) / (norm(gg) * std::max(norm(X), 1e-300)) < opts.grazing_guard) {
                    out.status = HitStatus::grazing;
                    out.grazing = true;
                    return out;
                }
                if (sec.boundary_margin > 0 && sec.boundary_distance(*u) < sec.boundary_margin) {
                    out.status = HitStatus::boundary;
                    return out;
                }
                out.status = HitStatus::ok;
                if (want_dtau) {
                    FlowResult fr = flow_with_jacobian(f, x, out.tau1, opts.integrator);
                    Vec row(f.dim);
                    for (int j = 0; j < f.dim; ++j) {
                        double s = 0;
                        for (int i = 0; i < f.dim; ++i) s += gg[i] * (*fr.jacobian)(i, j);
                        row[j] = -s / gdot;
                    }
                    out.dtau1 = row;
                }
                return out;
            }
            // not on this patch: keep scanning
        }
        if (settle && std::abs(g) > 1e-10) settle = false;
        prev = next;
        prev_g = g;
        t += h;
    }
    return out;  // no_return
}

// Closed-form hit for the billiard suspension.
inline HitResult seek_section_billiard(const SystemField&, const CrossSection& sec, const Vec& x,
                                       double t_max, const SemiflowOpts& opts) {
    HitResult out;
    const double theta = x[1];
    const double roof = 2.0 * std::cos(theta);
    const double adv = kPi - 2.0 * theta;
    const long k_max = long((t_max + x[2]) / roof) + 1;
    for (long k = 1; k <= k_max; ++k) {
        const double tk = k * roof - x[2];
        if (tk <= opts.event_time_tol) continue;  // collisions strictly ahead
        if (tk > t_max) break;
        Vec hit{wrap_angle(x[0] + k * adv), theta, 0.0};
        auto u = sec.chart_inverse(hit, 1e-9);
        if (!u) continue;
        out.tau1 = tk;
        out.hit_ambient = hit;
        out.hit_chart = *u;
        out.status = HitStatus::ok;
        if (sec.boundary_margin > 0 && sec.boundary_distance(*u) < sec.boundary_margin)
            out.status = HitStatus::boundary;
        out.dtau1 = Vec{0.0, -2.0 * double(k) * std::sin(theta), -1.0};
        return out;
    }
    return out;
}

// Closed-form hit for the Lorenz suspension model. The hit time is a sum of
// wrap times total(x_j) along x_j = f^j(x_0), so its x-derivative chains
// through (f^j)'.
inline HitResult seek_section_lorenz(const SystemField& f, const CrossSection& sec, const Vec& p,
                                     double t_max, const SemiflowOpts& opts) {
    HitResult out;
    const LorenzParams& lp = f.lorenz;
    double x = p[0], y = p[1];
    if (x == 0.0) return out;
    const bool to_wing = sec.kind == SectionKind::lorenz_wing;
    double elapsed = 0.0;
    double dT_dx0 = 0.0;   // d(elapsed)/dx0
    double dxk_dx0 = 1.0;  // (f^k)'(x0)
    auto finish = [&](double tk, const Vec& hit, double dt_dx0) -> bool {
        if (tk <= opts.event_time_tol || tk > t_max) return false;
        auto u = sec.chart_inverse(hit, 1e-9);
        if (!u) return false;
        out.tau1 = tk;
        out.hit_ambient = hit;
        out.hit_chart = *u;
        out.status = HitStatus::ok;
        if (sec.boundary_margin > 0 && sec.boundary_distance(*u) < sec.boundary_margin)
            out.status = HitStatus::boundary;
        out.dtau1 = Vec{dt_dx0, 0.0, -1.0};
        return true;
    };
    for (int wraps = 0; wraps < 64; ++wraps) {
        const double local_s = wraps == 0 ? p[2] : 0.0;
        if (to_wing) {
            const double hx = lp.roof(x);
            if (local_s < hx - 1e-15) {
                if (finish(elapsed + (hx - local_s), Vec{x, y, hx},
                           dT_dx0 + lp.roof_prime(x) * dxk_dx0))
                    return out;
                if (elapsed + (hx - local_s) > t_max) return out;
            }
        } else if (wraps > 0) {
            // base hits are exactly the wrap arrivals
            if (finish(elapsed, Vec{x, y, 0.0}, dT_dx0)) return out;
            return out;  // first base arrival failed the chart test: no later one differs
        }
        const double to_wrap = lp.total(x) - local_s;
        if (elapsed + to_wrap > t_max) return out;
        dT_dx0 += lp.total_prime(x) * dxk_dx0;
        dxk_dx0 *= lp.fprime(x);
        const double nx = lp.f(x), ny = lp.H(x, y);
        x = nx;
        y = ny;
        elapsed += to_wrap;
        if (x == 0.0) return out;
    }
    return out;
}

}  // namespace detail

// First crossing of a section patch along the flow of x (t > 0).
inline HitResult seek_section(const SystemField& f, const CrossSection& sec, const Vec& x,
                              double t_max, const SemiflowOpts& opts, bool want_dtau = true) {
    if (!f.in_domain(x)) throw DomainError("seek_section: start outside phase domain");
    switch (f.kind) {
        case FieldKind::disk_billiard:
            return detail::seek_section_billiard(f, sec, x, t_max, opts);
        case FieldKind::lorenz_skew:
            return detail::seek_section_lorenz(f, sec, x, t_max, opts);
        default:
            return detail::seek_section_rk4(f, sec, x, t_max, opts, want_dtau);
    }
}

struct ValidationReport {
    double hausdorff_gap = 0.0;
    bool landing_transversal = false;
    bool tau1_finite = false;
    double tau1_sup_bound = kInf;
    bool verdict = false;
};

struct TauSupResult {
    bool finite = false;
    double value = kInf;
};

// sup over a landing-chart grid of the tau1 derivative measured along the
// section's leading chart direction, with a refinement-doubling divergence
// heuristic standing in for +infinity.
inline TauSupResult tau1_derivative_sup_core(const SystemField& f, const CrossSection& D,
                                             const CrossSection& Dhat, double grid_res,
                                             const SemiflowOpts& opts) {
    if (grid_res <= 0) throw BadParams("tau1_derivative_sup: grid_res must be positive");
    auto sweep = [&](double res) {
        double worst = 0.0;
        int evaluated = 0;
        auto probe = [&](const Vec& u) {
            Vec x = Dhat.chart(u);
            if (!f.in_domain(x)) return;
            HitResult h;
            try {
                h = seek_section(f, D, x, opts.t_max, opts, true);
            } catch (const DomainError&) {
                return;
            }
            if (h.status != HitStatus::ok && h.status != HitStatus::boundary) return;
            Mat tan = Dhat.chart_tangent(u);
            double d = 0;
            for (int i = 0; i < f.dim; ++i) d += h.dtau1[i] * tan(i, 0);
            worst = std::max(worst, std::abs(d));
            ++evaluated;
        };
        if (Dhat.chart_dim == 1) {
            const int n = std::max(2, int(std::ceil(Dhat.box_width(0) / res)));
            for (int i = 0; i < n; ++i)
                probe(Vec{Dhat.box_lo[0] + (i + 0.5) * Dhat.box_width(0) / n});
        } else {
            const int n0 = std::max(2, int(std::ceil(Dhat.box_width(0) / res)));
            const int n1 = std::max(2, int(std::ceil(Dhat.box_width(1) / res)));
            for (int i = 0; i < n0; ++i)
                for (int j = 0; j < n1; ++j)
                    probe(Vec{Dhat.box_lo[0] + (i + 0.5) * Dhat.box_width(0) / n0,
                              Dhat.box_lo[1] + (j + 0.5) * Dhat.box_width(1) / n1});
        }
        (void)evaluated;
        return worst;
    };
    const double m0 = sweep(grid_res);
    const double m1 = sweep(grid_res / 2);
    const double m2 = sweep(grid_res / 4);
    TauSupResult out;
    if (m2 > 1e-6 && m1 >= 1.9 * m0 && m2 >= 1.9 * m1) {
        out.finite = false;
        out.value = kInf;
    } else {
        out.finite = true;
        out.value = m2;
    }
    return out;
}

// dist(I(D), D): minimum ambient distance between the sampled image of the
// impulse and the sampled impulsive region. Positive separation is the
// admissibility condition on the impulse.
inline double impulse_section_gap(const SystemField&, const CrossSection& D,
                                  const CrossSection& Dhat, const Impulse& I, int grid = 96) {
    std::vector<Vec> image, region;
    auto sample = [&](const CrossSection& s, std::vector<Vec>& out, bool through_impulse) {
        const int n = s.chart_dim == 1 ? grid : int(std::sqrt(double(grid)) * 6);
        if (s.chart_dim == 1) {
            for (int i = 0; i <= n; ++i) {
                Vec u{s.box_lo[0] + s.box_width(0) * i / n};
                out.push_back(through_impulse ? Dhat.chart(I.apply(u)) : s.chart(u));
            }
        } else {
            for (int i = 0; i <= n; ++i)
                for (int j = 0; j <= n; ++j) {
                    Vec u{s.box_lo[0] + s.box_width(0) * i / n, s.box_lo[1] + s.box_width(1) * j / n};
                    if ((s.kind == SectionKind::lorenz_base || s.kind == SectionKind::lorenz_wing) &&
                        std::abs(u[0]) < 1e-9)
                        continue;
                    out.push_back(through_impulse ? Dhat.chart(I.apply(u)) : s.chart(u));
                }
        }
    };
    sample(D, image, true);
    sample(D, region, false);
    double best = kInf;
    for (const Vec& a : image)
        for (const Vec& b : region) best = std::min(best, dist(a, b));
    return best;
}

inline ValidationReport validate_impulse(const SystemField& f, const CrossSection& D,
                                         const CrossSection& Dhat, const Impulse& I,
                                         const SemiflowOpts& opts = {}) {
    ValidationReport r;
    // the impulse must land inside the target chart on all of its domain
    {
        const int n = D.chart_dim == 1 ? 512 : 48;
        bool contained = true;
        auto check = [&](const Vec& u) {
            if (!Dhat.in_box(I.apply(u), 1e-9)) contained = false;
        };
        if (D.chart_dim == 1) {
            for (int i = 0; i <= n; ++i) check(Vec{D.box_lo[0] + D.box_width(0) * i / n});
        } else {
            for (int i = 0; i <= n; ++i)
                for (int j = 0; j <= n; ++j)
                    check(Vec{D.box_lo[0] + D.box_width(0) * i / n,
                              D.box_lo[1] + D.box_width(1) * j / n});
        }
        if (!contained) {
            r.landing_transversal = false;
            r.verdict = false;
            return r;
        }
    }
    r.hausdorff_gap = impulse_section_gap(f, D, Dhat, I);
    try {
        r.landing_transversal = transversality_margin(Dhat, f) > 0.0;
    } catch (const SingularityError&) {
        r.landing_transversal = false;
    }
    const double res = Dhat.chart_dim == 1 ? Dhat.box_width(0) / 24.0
                                           : std::max(Dhat.box_width(0), Dhat.box_width(1)) / 24.0;
    TauSupResult ts = tau1_derivative_sup_core(f, D, Dhat, res, opts);
    r.tau1_finite = ts.finite;
    r.tau1_sup_bound = ts.value;
    r.verdict = r.hausdorff_gap > 0.0 && r.landing_transversal && r.tau1_finite;
    return r;
}

struct ImpulsiveSystem {
    SystemField field;
    CrossSection D;     // impulsive region, domain of the impulse
    CrossSection Dhat;  // landing region, image chart of the impulse
    Impulse impulse;
    ValidationReport validation;
    SemiflowOpts opts;
    double min_flight = 0.0;
};

inline ImpulsiveSystem make_impulsive_system(const SystemField& f, const CrossSection& D,
                                             const CrossSection& Dhat, const Impulse& I,
                                             const SemiflowOpts& opts = {},
                                             bool allow_invalid = false) {
    if (I.source != D.name || I.target != Dhat.name)
        throw IncompatibleSections("impulse endpoints do not match the provided sections");
    ImpulsiveSystem sys;
    sys.field = f;
    sys.D = D;
    sys.Dhat = Dhat;
    sys.impulse = I;
    sys.opts = opts;
    sys.validation = validate_impulse(f, D, Dhat, I, opts);
    if (!sys.validation.verdict && !allow_invalid)
        throw ConstructionError("impulse validation failed (gap/transversality/tau1)");
    switch (f.kind) {
        case FieldKind::disk_billiard:
            sys.min_flight = 2.0 * std::cos(std::max(std::abs(D.box_lo[1]), std::abs(D.box_hi[1])));
            break;
        case FieldKind::lorenz_skew:
            sys.min_flight = f.lorenz.t2;
            break;
        default:
            sys.min_flight = sys.validation.hausdorff_gap / f.speed_bound();
    }
    return sys;
}

// tau1 and its differential from an ambient point, targeting the impulsive
// region D. Convention: the search starts at t > 0.
inline HitResult first_hit(const ImpulsiveSystem& sys, const Vec& x, double t_max = -1.0) {
    return seek_section(sys.field, sys.D, x, t_max > 0 ? t_max : sys.opts.t_max, sys.opts);
}

struct TrajectoryArc {
    double t0 = 0, t1 = 0;
    std::vector<std::pair<double, Vec>> samples;
};

struct TrajectoryJump {
    int index = 0;
    double time = 0;
    Vec pre_chart;   // D chart
    Vec post_chart;  // Dhat chart
};

struct Trajectory {
    std::vector<TrajectoryArc> arcs;
    std::vector<TrajectoryJump> jumps;
    Vec endpoint;
    double end_time = 0;
    HitStatus end_status = HitStatus::ok;  // grazing/boundary when truncated
    int failed_jump = -1;
};

// Impulsive trajectory: flow arcs alternating with impulse jumps, following
// the tau_n recursion until the horizon or a failed hit.
inline Trajectory trajectory(const ImpulsiveSystem& sys, const Vec& x0, double T,
                             int sample_cap_per_arc = 2000) {
    if (T < 0) throw BadParams("trajectory horizon must be nonnegative");
    Trajectory tr;
    Vec cur = x0;
    double t = 0;
    const int max_jumps = sys.min_flight > 0 ? int(T / sys.min_flight) + 8 : 100000;
    for (int n = 0;; ++n) {
        HitResult hit;
        if (t < T) hit = seek_section(sys.field, sys.D, cur, T - t + 1e-9, sys.opts, false);
        // a jump landing on the horizon (within event slack) is taken
        const bool jumps_now = hit.status == HitStatus::ok && t + hit.tau1 <= T + 1e-9;
        const double arc_end = jumps_now ? t + hit.tau1 : T;
        TrajectoryArc arc;
        arc.t0 = t;
        arc.t1 = arc_end;
        const double span = arc_end - t;
        if (span > 0) {
            IntegratorOpts io = sys.opts.integrator;
            io.record_path = true;
            FlowResult fr = flow(sys.field, cur, span, io);
            const size_t stride = std::max<size_t>(1, fr.path.size() / size_t(sample_cap_per_arc));
            for (size_t i = 0; i < fr.path.size(); i += stride)
                arc.samples.push_back({t + fr.path[i].first, fr.path[i].second});
            if (arc.samples.empty() || arc.samples.back().first < arc_end)
                arc.samples.push_back({arc_end, fr.endpoint});
            cur = jumps_now ? hit.hit_ambient : fr.endpoint;
        } else {
            arc.samples.push_back({t, cur});
        }
        tr.arcs.push_back(std::move(arc));
        if (!jumps_now) {
            if (hit.status == HitStatus::grazing || hit.status == HitStatus::boundary) {
                tr.end_status = hit.status;
                tr.failed_jump = n;
            }
            tr.endpoint = cur;
            tr.end_time = T;
            break;
        }
        TrajectoryJump j;
        j.index = n;
        j.time = t + hit.tau1;
        j.pre_chart = hit.hit_chart;
        j.post_chart = sys.impulse.apply(hit.hit_chart);
        tr.jumps.push_back(j);
        cur = sys.Dhat.chart(j.post_chart);
        t = j.time;
        if (n > max_jumps) throw Error("trajectory: jump count exceeded the flight-time bound");
        if (t >= T) {
            tr.endpoint = cur;
            tr.end_time = T;
            break;
        }
    }
    return tr;
}

struct PoincareResult {
    HitStatus status = HitStatus::no_return;
    Vec value;      // next Dhat chart point
    double tau = kInf;
    Vec pre_chart;  // D chart point before the impulse
    Vec hit_ambient;
    Vec dtau1;
};

// P_I(v) = impulse(first hit of D from the landing point v): the Poincare
// map of the impulsive semiflow on the landing region.
inline PoincareResult poincare(const ImpulsiveSystem& sys, const Vec& v, bool want_dtau = false) {
    PoincareResult out;
    Vec x = sys.Dhat.chart(v);
    HitResult hit = seek_section(sys.field, sys.D, x, sys.opts.t_max, sys.opts, want_dtau);
    out.status = hit.status;
    if (hit.status != HitStatus::ok) return out;
    out.tau = hit.tau1;
    out.pre_chart = hit.hit_chart;
    out.hit_ambient = hit.hit_ambient;
    out.dtau1 = hit.dtau1;
    out.value = sys.impulse.apply(hit.hit_chart);
    return out;
}

// DP_I(v), chart to chart: DI . W . Pi . Dphi_tau . T, with Pi the
// projection onto T_y D along the flow direction at the hit point y.
inline Mat poincare_jacobian(const ImpulsiveSystem& sys, const Vec& v,
                             const PoincareResult* known_hit = nullptr) {
    PoincareResult local;
    const PoincareResult* hit = known_hit;
    if (!hit) {
        local = poincare(sys, v);
        hit = &local;
    }
    if (hit->status != HitStatus::ok) throw Error("poincare_jacobian: map undefined at this point");
    const int d = sys.field.dim;
    Vec x = sys.Dhat.chart(v);
    FlowResult fr = flow_with_jacobian(sys.field, x, hit->tau, sys.opts.integrator);
    const Vec& y = hit->hit_ambient;
    Vec X = sys.field.eval(y);
    Vec gg = sys.D.grad_g(y);
    const double gdot = dot(gg, X);
    Mat Pi = Mat::identity(d) - (1.0 / gdot) * outer(X, gg);
    Mat That = sys.Dhat.chart_tangent(v);
    Mat W = sys.D.chart_cotangent(hit->pre_chart);
    Mat DI = sys.impulse.jacobian(hit->pre_chart);
    return DI * (W * (Pi * (*fr.jacobian * That)));
}

// sup_{Dhat grid} |d tau1 / du_0|; infinite marker via grid-refinement
// doubling near discontinuity lines.
inline TauSupResult tau1_derivative_sup(const ImpulsiveSystem& sys, double grid_res) {
    return tau1_derivative_sup_core(sys.field, sys.D, sys.Dhat, grid_res, sys.opts);
}

enum class HolonomyStatus { ok, no_crossing, multiple_crossings };

struct HolonomyResult {
    HolonomyStatus status = HolonomyStatus::no_crossing;
    Vec y_chart;
    double theta = 0.0;
};

// Flow-induced map between nearby sections: the unique |theta| <= r with
// phi_theta(x) on S2.
inline HolonomyResult holonomy(const SystemField& f, const CrossSection& S1,
                               const CrossSection& S2, const Vec& u1, double r,
                               const SemiflowOpts& opts = {}) {
    HolonomyResult out;
    Vec x = S1.chart(u1);
    if (auto u = S2.chart_inverse(x, 1e-9)) {
        out.status = HolonomyStatus::ok;
        out.theta = 0.0;
        out.y_chart = *u;
        return out;
    }
    struct Crossing {
        double t;
        Vec u;
    };
    std::vector<Crossing> found;
    auto scan = [&](double dir) {
        const double h = opts.integrator.step;
        Vec prev = x;
        double prev_g = S2.event_g(x);
        double t = 0;
        while (t < r) {
            const double step = std::min(h, r - t);
            Vec next = prev;
            detail::rk4_step(f, dir * step, next, nullptr);
            const double g = S2.event_g(next);
            if ((prev_g < 0 && g >= 0) || (prev_g > 0 && g <= 0)) {
                double lo = 0, hi = step, glo = prev_g;
                for (int it = 0; it < opts.bisect_iters && hi - lo > opts.event_time_tol; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    Vec xm = prev;
                    detail::rk4_step(f, dir * mid, xm, nullptr);
                    const double gm = S2.event_g(xm);
                    if ((glo < 0 && gm < 0) || (glo > 0 && gm > 0)) {
                        lo = mid;
                        glo = gm;
                    } else {
                        hi = mid;
                    }
                }
                Vec xr = prev;
                detail::rk4_step(f, dir * 0.5 * (lo + hi), xr, nullptr);
                if (auto u = S2.chart_inverse(xr, 1e-6))
                    found.push_back({dir * (t + 0.5 * (lo + hi)), *u});
            }
            prev = next;
            prev_g = g;
            t += step;
        }
    };
    scan(+1.0);
    scan(-1.0);
    if (found.empty()) return out;
    if (found.size() > 1) {
        out.status = HolonomyStatus::multiple_crossings;
        return out;
    }
    out.status = HolonomyStatus::ok;
    out.theta = found[0].t;
    out.y_chart = found[0].u;
    return out;
}

}  // namespace impdyn
