#pragma once

#include "impdyn/chains.hpp"

namespace impdyn {

enum class CloseFailure { none, no_chain, budget, supports, verification, not_found };

inline const char* close_failure_name(CloseFailure f) {
    switch (f) {
        case CloseFailure::none: return "none";
        case CloseFailure::no_chain: return "no_chain";
        case CloseFailure::budget: return "budget";
        case CloseFailure::supports: return "supports";
        case CloseFailure::verification: return "verification";
        case CloseFailure::not_found: return "not_found";
    }
    return "?";
}

struct ClosingJump {
    int index = 0;       // position along the pseudo-orbit
    Vec landing;         // where the unperturbed step lands
    Vec target;          // where the bump sends it
    double gap = 0.0;
    double radius = 0.0; // support ball radius
    double cost = 0.0;   // analytic C1 bound of this bump
};

struct ClosingPlan {
    std::vector<Vec> pseudo_orbit;
    std::vector<ClosingJump> jumps;
    double budget = 0.0;
    double cost_bound = 0.0;  // sum of per-bump analytic bounds
    bool feasible = false;
    std::string reason;
};

struct CloseOpts {
    double delta0 = 1e-2;
    int max_halvings = 6;
    long direct_steps_cap = 300000;  // orbit length cap for the direct route
    int graph_cells_cap = 200000;
    double verify_tol = 1e-9;
    BumpBudgetOpts bump;
};

struct CloseResult {
    bool ok = false;
    CloseFailure failure = CloseFailure::not_found;
    Impulse impulse;
    ClosingPlan plan;
    double c1_cost = 0.0;
    int bump_count = 0;
    int orbit_steps = 0;
};

// Shortest path a -> b in the jump graph whose interior cells keep the given
// pairwise chart separation; re-routes around violating cells, NotFound when
// the resolution cannot support the separation.
inline bool find_pseudo_orbit(const PseudoOrbitGraph& g, int a, int b, double separation,
                              std::vector<int>& path_out) {
    std::set<int> banned;
    for (int round = 0; round < 24; ++round) {
        // BFS with banned interior cells; the target is tracked separately so
        // a -| a loops are representable
        std::vector<int> prev(g.grid.cells(), -2);
        std::vector<int> queue{a};
        prev[a] = -1;
        int parent_of_b = -2;
        for (size_t qi = 0; qi < queue.size() && parent_of_b == -2; ++qi) {
            const int c = queue[qi];
            for (int d : g.edges[c]) {
                if (d == b) {
                    parent_of_b = c;
                    break;
                }
                if (prev[d] != -2) continue;
                if (banned.count(d)) continue;
                prev[d] = c;
                queue.push_back(d);
            }
        }
        if (parent_of_b == -2) return false;
        std::vector<int> path{b};
        for (int c = parent_of_b; c != -1; c = prev[c]) path.push_back(c);
        std::reverse(path.begin(), path.end());
        // separation check on interior cells
        int bad = -1;
        for (size_t i = 1; i + 1 < path.size() && bad < 0; ++i)
            for (size_t j = i + 1; j + 1 < path.size() && bad < 0; ++j)
                if (g.grid.section->chart_dist(g.grid.center(path[i]), g.grid.center(path[j])) <
                    separation)
                    bad = int(path[j]);
        if (bad < 0) {
            path_out = path;
            return true;
        }
        banned.insert(bad);
    }
    return false;
}

namespace detail {

struct DirectPlan {
    bool found = false;
    CloseFailure failure = CloseFailure::not_found;
    int steps = 0;
    Vec landing;
    double gap = 0.0;
};

// Follow the true orbit of x and look for a step whose landing can be
// bumped onto y: gap within the value budget and the support ball clear of
// every earlier landing. The target itself may sit in the ball (it is the
// bump's own jump), and the seed is not a landing.
inline DirectPlan direct_search(const ImpulsiveSystem& sys, const Vec& x, const Vec& y, double eps,
                                const CloseOpts& opts) {
    DirectPlan out;
    const CrossSection& S = sys.Dhat;
    const double lambda = std::max(opts.bump.lambda_min, kBumpSlope / eps * 1.0000001);
    const double gap_budget = 0.98 * eps;
    std::vector<Vec> pts;
    Vec w = x;
    bool saw_branch_gap = false;
    int settled = 0;
    for (long k = 1; k <= opts.direct_steps_cap; ++k) {
        PoincareResult pr = poincare(sys, w);
        if (pr.status != HitStatus::ok) {
            out.failure = CloseFailure::not_found;
            return out;
        }
        const Vec landing = pr.value;
        const double gap = S.chart_dist(landing, y);
        if (gap <= opts.verify_tol) {
            // the unperturbed orbit already passes through y
            out.found = true;
            out.steps = int(k);
            out.landing = landing;
            out.gap = 0.0;
            return out;
        }
        if (gap <= gap_budget) {
            saw_branch_gap = true;
            const double radius = lambda * gap;
            bool clear = true;
            try {
                check_support(S, landing, radius);
            } catch (const SupportOutsideChart&) {
                clear = false;
            }
            for (const Vec& p : pts) {
                if (S.chart_dist(p, y) <= opts.verify_tol) continue;
                if (S.chart_dist(p, landing) < radius) {
                    clear = false;
                    break;
                }
            }
            if (clear) {
                out.found = true;
                out.steps = int(k);
                out.landing = landing;
                out.gap = gap;
                return out;
            }
        }
        // a landing sequence frozen at a fixed point will never improve
        if (!pts.empty() && S.chart_dist(landing, pts.back()) < 1e-13) {
            if (++settled > 8) break;
        } else {
            settled = 0;
        }
        pts.push_back(landing);
        w = landing;
    }
    out.failure = saw_branch_gap ? CloseFailure::supports : CloseFailure::budget;
    return out;
}

}  // namespace detail

// Chain-closing engine: connect x to y by a
// C1-eps perturbation of the impulse built from disjoint-support translation
// bumps, verified by direct simulation. Tries the single terminal bump along
// the true orbit first, then a graph-path realization, halving delta between
// rounds.
inline CloseResult close_orbit(const ImpulsiveSystem& sys, const Vec& x, const Vec& y, double eps,
                               CloseOpts opts = {}) {
    CloseResult res;
    res.impulse = sys.impulse;
    if (eps < 0) throw BadParams("close_orbit: negative budget");
    const CrossSection& S = sys.Dhat;

    // Route 1: terminal bump on the true orbit.
    if (eps > 0 || S.chart_dist(x, y) == 0.0) {
        detail::DirectPlan dp = eps > 0 ? detail::direct_search(sys, x, y, eps, opts)
                                        : detail::DirectPlan{};
        if (eps == 0.0) {
            // zero budget: only an exact orbit passage will do
            Vec w = x;
            int settled = 0;
            for (long k = 1; k <= std::min<long>(opts.direct_steps_cap, 100000); ++k) {
                PoincareResult pr = poincare(sys, w);
                if (pr.status != HitStatus::ok) break;
                if (S.chart_dist(pr.value, w) < 1e-13 && ++settled > 8) break;
                w = pr.value;
                if (S.chart_dist(w, y) <= opts.verify_tol) {
                    dp.found = true;
                    dp.steps = int(k);
                    dp.landing = w;
                    dp.gap = 0.0;
                    break;
                }
            }
            if (!dp.found) dp.failure = CloseFailure::budget;
        }
        if (dp.found) {
            Impulse J = sys.impulse;
            ClosingPlan plan;
            plan.budget = eps;
            if (dp.gap > 0) {
                J = bump_translate(sys.impulse, S, dp.landing, y, eps, opts.bump);
                ClosingJump j;
                j.index = dp.steps - 1;
                j.landing = dp.landing;
                j.target = y;
                j.gap = dp.gap;
                j.radius = J.bumps.back().radius;
                j.cost = std::max(J.bumps.back().value_bound(), J.bumps.back().slope_bound());
                plan.jumps.push_back(j);
                plan.cost_bound = j.cost;
            }
            plan.feasible = true;
            // verification by direct simulation under J
            ImpulsiveSystem pert = sys;
            pert.impulse = J;
            Vec w = x;
            bool verified = false;
            for (int k = 0; k < dp.steps; ++k) {
                PoincareResult pr = poincare(pert, w);
                if (pr.status != HitStatus::ok) break;
                w = pr.value;
                if (k + 1 == dp.steps) verified = S.chart_dist(w, y) <= opts.verify_tol;
            }
            if (verified) {
                res.ok = true;
                res.failure = CloseFailure::none;
                res.impulse = J;
                res.plan = std::move(plan);
                res.c1_cost = res.plan.cost_bound;
                res.bump_count = int(res.plan.jumps.size());
                res.orbit_steps = dp.steps;
                return res;
            }
            res.failure = CloseFailure::verification;
        } else {
            res.failure = dp.failure;
        }
    } else {
        res.failure = CloseFailure::budget;
    }

    // Route 2: pseudo-orbit realization with one bump per deviating step.
    if (eps <= 0) return res;
    double delta = opts.delta0;
    for (int round = 0; round <= opts.max_halvings; ++round, delta /= 2) {
        long cells_est = long(std::ceil(S.box_width(0) / delta));
        if (S.chart_dim == 2) cells_est *= long(std::ceil(S.box_width(1) / delta));
        if (cells_est > opts.graph_cells_cap) break;
        PseudoOrbitGraph g = build_graph(sys, delta, delta);
        const int ca = g.grid.locate(x), cb = g.grid.locate(y);
        const double lambda = std::max(opts.bump.lambda_min, kBumpSlope / eps * 1.0000001);
        const double sep = 3.0 * lambda * 1.5 * delta;
        std::vector<int> path;
        if (!find_pseudo_orbit(g, ca, cb, sep, path)) {
            // the chain precondition is stated at delta0; a later round that
            // loses the path keeps the more specific earlier failure
            if (round == 0 && !chain_reaches(g, ca, cb)) {
                res.failure = CloseFailure::no_chain;
                break;
            }
            continue;
        }
        // realize the path on the true dynamics
        Impulse J = sys.impulse;
        ClosingPlan plan;
        plan.budget = eps;
        Vec w = x;
        plan.pseudo_orbit.push_back(w);
        bool bad = false;
        std::vector<Vec> visited;
        const double per_bump = eps / double(path.size());
        ImpulsiveSystem pert = sys;
        for (size_t step = 1; step < path.size() && !bad; ++step) {
            pert.impulse = J;
            PoincareResult pr = poincare(pert, w);
            if (pr.status != HitStatus::ok) {
                bad = true;
                res.failure = CloseFailure::not_found;
                break;
            }
            Vec landing = pr.value;
            const bool last = step + 1 == path.size();
            Vec target = last ? y : g.grid.center(path[step]);
            double gap = S.chart_dist(landing, target);
            if (!last && gap <= 1.5 * delta && g.grid.locate(landing) == path[step]) {
                // already inside the planned cell: no bump
                w = landing;
            } else {
                if (gap > per_bump) {
                    bad = true;
                    res.failure = CloseFailure::budget;
                    break;
                }
                const double radius =
                    std::max(opts.bump.lambda_min, kBumpSlope / per_bump * 1.0000001) * gap;
                bool clear = true;
                for (const Vec& p : visited)
                    if (S.chart_dist(p, y) > opts.verify_tol &&
                        S.chart_dist(p, landing) < radius)
                        clear = false;
                try {
                    check_support(S, landing, radius);
                } catch (const SupportOutsideChart&) {
                    clear = false;
                }
                for (const ClosingJump& jj : plan.jumps)
                    if (S.chart_dist(jj.landing, landing) < jj.radius + radius) clear = false;
                if (!clear) {
                    bad = true;
                    res.failure = CloseFailure::supports;
                    break;
                }
                try {
                    J = bump_translate(J, S, landing, target, per_bump, opts.bump);
                } catch (const Error&) {
                    bad = true;
                    res.failure = CloseFailure::budget;
                    break;
                }
                ClosingJump j;
                j.index = int(step) - 1;
                j.landing = landing;
                j.target = target;
                j.gap = gap;
                j.radius = radius;
                j.cost = std::max(J.bumps.back().value_bound(), J.bumps.back().slope_bound());
                plan.cost_bound += j.cost;
                plan.jumps.push_back(j);
                w = target;
            }
            visited.push_back(w);
            plan.pseudo_orbit.push_back(w);
        }
        if (bad) continue;
        if (plan.cost_bound > eps) {
            res.failure = CloseFailure::budget;
            continue;
        }
        // verification
        ImpulsiveSystem pert2 = sys;
        pert2.impulse = J;
        Vec w2 = x;
        bool verified = false;
        for (size_t k = 1; k < path.size(); ++k) {
            PoincareResult pr = poincare(pert2, w2);
            if (pr.status != HitStatus::ok) break;
            w2 = pr.value;
            if (k + 1 == path.size()) verified = S.chart_dist(w2, y) <= opts.verify_tol;
        }
        if (!verified) {
            res.failure = CloseFailure::verification;
            continue;
        }
        plan.feasible = true;
        res.ok = true;
        res.failure = CloseFailure::none;
        res.impulse = J;
        res.plan = std::move(plan);
        res.c1_cost = res.plan.cost_bound;
        res.bump_count = int(res.plan.jumps.size());
        res.orbit_steps = int(path.size()) - 1;
        return res;
    }
    return res;
}

struct CloseToPeriodicOpts {
    CloseOpts close;
    double proximity = 0.02;  // h + delta of the calling grid
    int direct_returns = 3;   // plain find_periodic attempts before closing
    PeriodicOpts periodic;
    int hyper_attempts = 8;
    std::uint64_t seed = 2024;
    double budget_split = 0.5;
};

struct CloseToPeriodicResult {
    bool ok = false;
    CloseFailure failure = CloseFailure::not_found;
    Impulse impulse;
    PeriodicOrbit orbit;
    double c1_cost = 0.0;
    int bump_count = 0;
};

// Orbit closing: make q periodic by a (possibly empty)
// closing perturbation, then hyperbolize with the remaining budget. An
// existing hyperbolic orbit within the proximity radius is returned as-is.
inline CloseToPeriodicResult close_to_periodic(const ImpulsiveSystem& sys, const Vec& q, double eps,
                                               const CloseToPeriodicOpts& opts = {}) {
    CloseToPeriodicResult out;
    out.impulse = sys.impulse;
    auto orbit_near = [&](const PeriodicOrbit& orb) {
        for (const Vec& p : orb.points)
            if (sys.Dhat.chart_dist(p, q) <= opts.proximity) return true;
        return false;
    };
    // 0: an orbit may already pass nearby
    for (int N = 1; N <= opts.direct_returns; ++N) {
        PeriodicSearch s = find_periodic(sys, q, N, opts.periodic);
        if (s.status != SolveStatus::ok || !orbit_near(s.orbit)) continue;
        if (s.orbit.tag == OrbitTag::hyperbolic) {
            out.ok = true;
            out.failure = CloseFailure::none;
            out.orbit = s.orbit;
            return out;
        }
        HyperbolizationResult h = make_hyperbolic(sys, s.orbit, eps * (1.0 - opts.budget_split),
                                                  opts.hyper_attempts, opts.seed, opts.periodic);
        if (h.ok && orbit_near(h.orbit)) {
            out.ok = true;
            out.failure = CloseFailure::none;
            out.impulse = h.impulse;
            out.orbit = h.orbit;
            out.bump_count = int(h.impulse.bumps.size() - sys.impulse.bumps.size());
            out.c1_cost = sys.impulse.c1_extension_bound(
                std::vector<Bump>(h.impulse.bumps.begin() + sys.impulse.bumps.size(),
                                  h.impulse.bumps.end()));
            return out;
        }
        break;
    }
    // 1: close q to itself, then re-solve and hyperbolize
    CloseResult cr = close_orbit(sys, q, q, eps * opts.budget_split, opts.close);
    if (!cr.ok) {
        out.failure = cr.failure;
        return out;
    }
    ImpulsiveSystem pert = sys;
    pert.impulse = cr.impulse;
    PeriodicSearch s = find_periodic(pert, q, std::max(1, cr.orbit_steps), opts.periodic);
    if (s.status != SolveStatus::ok) {
        out.failure = CloseFailure::not_found;
        return out;
    }
    if (s.orbit.tag != OrbitTag::hyperbolic) {
        HyperbolizationResult h = make_hyperbolic(pert, s.orbit, eps * (1.0 - opts.budget_split),
                                                  opts.hyper_attempts, opts.seed, opts.periodic);
        if (!h.ok) {
            out.failure = CloseFailure::not_found;
            return out;
        }
        pert.impulse = h.impulse;
        s.orbit = h.orbit;
    }
    if (!orbit_near(s.orbit)) {
        out.failure = CloseFailure::verification;
        return out;
    }
    out.ok = true;
    out.failure = CloseFailure::none;
    out.impulse = pert.impulse;
    out.orbit = s.orbit;
    out.bump_count = int(pert.impulse.bumps.size() - sys.impulse.bumps.size());
    out.c1_cost = sys.impulse.c1_extension_bound(std::vector<Bump>(
        pert.impulse.bumps.begin() + sys.impulse.bumps.size(), pert.impulse.bumps.end()));
    return out;
}

struct DensityCellRecord {
    int cell_id = -1;
    Vec center;
    bool success = false;
    CloseFailure failure = CloseFailure::none;
    int bump_count = 0;
    double c1_cost = 0.0;
    double orbit_period = 0.0;
    std::vector<std::complex<double>> multipliers;
};

struct DensityReport {
    int recurrent_cells = 0;
    int attempted = 0;
    int successes = 0;
    double fraction = 0.0;
    std::vector<DensityCellRecord> cells;
};

// Empirical density experiment: try to plant a
// nearby hyperbolic periodic orbit at every chain-recurrent cell with C1
// budget eps; failures are reported by kind, never dropped.
inline DensityReport density_experiment(const ImpulsiveSystem& sys, double eps, double h,
                                        double delta, int cap = 100000,
                                        std::uint64_t seed = 777) {
    PseudoOrbitGraph g = build_graph(sys, h, delta);
    std::vector<int> rec = chain_recurrent_cells(g);
    DensityReport rep;
    rep.recurrent_cells = int(rec.size());
    std::vector<int> picked = rec;
    if (int(picked.size()) > cap) {
        Rng rng(seed);
        for (size_t i = picked.size() - 1; i > 0; --i)
            std::swap(picked[i], picked[rng.uniform_int(int(i + 1))]);
        picked.resize(cap);
        std::sort(picked.begin(), picked.end());
    }
    CloseToPeriodicOpts opts;
    // self-looping cells sit up to h/2 + 2 delta from the genuine orbit, so
    // the proximity target covers the whole recurrent spread
    opts.proximity = h + 2.0 * delta;
    opts.close.delta0 = delta;
    opts.seed = seed;
    for (int c : picked) {
        DensityCellRecord recd;
        recd.cell_id = c;
        recd.center = g.grid.center(c);
        CloseToPeriodicResult r = close_to_periodic(sys, recd.center, eps, opts);
        recd.success = r.ok;
        recd.failure = r.failure;
        recd.bump_count = r.bump_count;
        recd.c1_cost = r.c1_cost;
        if (r.ok) {
            recd.orbit_period = r.orbit.period;
            recd.multipliers = r.orbit.multipliers;
            ++rep.successes;
        }
        ++rep.attempted;
        rep.cells.push_back(std::move(recd));
    }
    rep.fraction = rep.attempted ? double(rep.successes) / rep.attempted : 0.0;
    return rep;
}

}  // namespace impdyn
