#pragma once

#include <set>

#include "impdyn/periodic.hpp"

namespace impdyn {

// Uniform cell decomposition of a landing chart box. Periodic first axes
// wrap both indexing and distances.
struct ChartGrid {
    const CrossSection* section = nullptr;
    double h = 0.0;
    int n0 = 0, n1 = 1;  // n1 == 1 for 1-D charts

    int cells() const { return n0 * n1; }
    int id(int i, int j) const { return i * n1 + j; }
    int i_of(int c) const { return c / n1; }
    int j_of(int c) const { return c % n1; }

    Vec center(int c) const {
        Vec u(section->chart_dim);
        u[0] = section->box_lo[0] + (i_of(c) + 0.5) * section->box_width(0) / n0;
        if (section->chart_dim == 2)
            u[1] = section->box_lo[1] + (j_of(c) + 0.5) * section->box_width(1) / n1;
        return u;
    }

    // chart-metric distance from a point to a cell box
    double dist_to_cell(const Vec& u, int c) const {
        const double w0 = section->box_width(0) / n0;
        double lo0 = section->box_lo[0] + i_of(c) * w0, hi0 = lo0 + w0;
        double d0;
        if (section->chart_periodic0) {
            const double x = wrap_angle(u[0]);
            if (x >= lo0 && x <= hi0)
                d0 = 0;
            else
                d0 = std::min(circle_dist(x, lo0), circle_dist(x, hi0));
        } else {
            d0 = std::max({section->box_lo[0] + i_of(c) * w0 - u[0],
                           u[0] - (section->box_lo[0] + (i_of(c) + 1) * w0), 0.0});
        }
        if (section->chart_dim == 1) return d0;
        const double w1 = section->box_width(1) / n1;
        const double lo1 = section->box_lo[1] + j_of(c) * w1;
        const double d1 = std::max({lo1 - u[1], u[1] - (lo1 + w1), 0.0});
        return std::hypot(d0, d1);
    }

    int locate(const Vec& u) const {
        double x0 = u[0];
        if (section->chart_periodic0) x0 = wrap_angle(x0);
        int i = int((x0 - section->box_lo[0]) / (section->box_width(0) / n0));
        i = std::clamp(i, 0, n0 - 1);
        int j = 0;
        if (section->chart_dim == 2) {
            j = int((u[1] - section->box_lo[1]) / (section->box_width(1) / n1));
            j = std::clamp(j, 0, n1 - 1);
        }
        return id(i, j);
    }
};

enum class CellStatus { ok, no_return, grazing, boundary, domain_error };

struct CellData {
    CellStatus status = CellStatus::no_return;
    Vec image;   // poincare at the cell center, when ok
    double tau = kInf;
};

struct PseudoOrbitGraph {
    ChartGrid grid;
    double delta = 0.0;
    double resolution = 0.0;
    std::vector<CellData> cells;
    std::vector<std::vector<int>> edges;  // delta-jump adjacency
};

// delta-pseudo-orbit graph on the landing grid: edge A -> B whenever the
// Poincare image of A's center lies within delta (chart metric) of cell B.
// Error cells get no outgoing edges.
inline PseudoOrbitGraph build_graph(const ImpulsiveSystem& sys, double h, double delta) {
    if (h <= 0 || delta <= 0) throw BadParams("build_graph: h and delta must be positive");
    PseudoOrbitGraph g;
    g.delta = delta;
    g.resolution = h;
    g.grid.section = &sys.Dhat;
    g.grid.h = h;
    g.grid.n0 = std::max(1, int(std::ceil(sys.Dhat.box_width(0) / h)));
    g.grid.n1 = sys.Dhat.chart_dim == 2 ? std::max(1, int(std::ceil(sys.Dhat.box_width(1) / h))) : 1;
    const int n = g.grid.cells();
    g.cells.resize(n);
    g.edges.resize(n);
    for (int c = 0; c < n; ++c) {
        Vec u = g.grid.center(c);
        CellData cd;
        try {
            PoincareResult pr = poincare(sys, u);
            switch (pr.status) {
                case HitStatus::ok:
                    cd.status = CellStatus::ok;
                    cd.image = pr.value;
                    cd.tau = pr.tau;
                    break;
                case HitStatus::no_return: cd.status = CellStatus::no_return; break;
                case HitStatus::grazing: cd.status = CellStatus::grazing; break;
                case HitStatus::boundary: cd.status = CellStatus::boundary; break;
            }
        } catch (const DomainError&) {
            cd.status = CellStatus::domain_error;
        } catch (const ChartError&) {
            cd.status = CellStatus::domain_error;
        }
        g.cells[c] = cd;
        if (cd.status != CellStatus::ok) continue;
        // candidate target cells within delta of the image point
        const int reach0 = int(std::ceil(delta / (sys.Dhat.box_width(0) / g.grid.n0))) + 1;
        const int i_img = g.grid.i_of(g.grid.locate(cd.image));
        const int j_img = g.grid.j_of(g.grid.locate(cd.image));
        const int reach1 =
            sys.Dhat.chart_dim == 2
                ? int(std::ceil(delta / (sys.Dhat.box_width(1) / g.grid.n1))) + 1
                : 0;
        for (int di = -reach0; di <= reach0; ++di) {
            int i = i_img + di;
            if (sys.Dhat.chart_periodic0)
                i = (i % g.grid.n0 + g.grid.n0) % g.grid.n0;
            else if (i < 0 || i >= g.grid.n0)
                continue;
            for (int dj = -reach1; dj <= reach1; ++dj) {
                const int j = j_img + dj;
                if (j < 0 || j >= g.grid.n1) continue;
                const int b = g.grid.id(i, j);
                if (g.grid.dist_to_cell(cd.image, b) <= delta) g.edges[c].push_back(b);
            }
        }
    }
    return g;
}

inline bool chain_reaches(const PseudoOrbitGraph& g, int a, int b) {
    if (a < 0 || b < 0 || a >= g.grid.cells() || b >= g.grid.cells())
        throw BadParams("chain_reaches: cell out of range");
    std::vector<char> seen(g.grid.cells(), 0);
    std::vector<int> stack{a};
    while (!stack.empty()) {
        const int c = stack.back();
        stack.pop_back();
        for (int d : g.edges[c]) {
            if (d == b) return true;
            if (!seen[d]) {
                seen[d] = 1;
                stack.push_back(d);
            }
        }
    }
    return false;
}

// Chain-recurrent cells: members of strongly connected components that carry
// a cycle (size > 1 or a self-edge). Iterative Tarjan, deterministic.
inline std::vector<int> chain_recurrent_cells(const PseudoOrbitGraph& g) {
    const int n = g.grid.cells();
    std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
    std::vector<char> on_stack(n, 0);
    std::vector<int> stack;
    int next_index = 0, next_comp = 0;
    struct Frame {
        int v;
        size_t edge;
    };
    std::vector<Frame> call;
    for (int root = 0; root < n; ++root) {
        if (index[root] != -1) continue;
        call.push_back({root, 0});
        index[root] = low[root] = next_index++;
        stack.push_back(root);
        on_stack[root] = 1;
        while (!call.empty()) {
            Frame& f = call.back();
            if (f.edge < g.edges[f.v].size()) {
                const int w = g.edges[f.v][f.edge++];
                if (index[w] == -1) {
                    index[w] = low[w] = next_index++;
                    stack.push_back(w);
                    on_stack[w] = 1;
                    call.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[f.v] = std::min(low[f.v], index[w]);
                }
            } else {
                if (low[f.v] == index[f.v]) {
                    while (true) {
                        const int w = stack.back();
                        stack.pop_back();
                        on_stack[w] = 0;
                        comp[w] = next_comp;
                        if (w == f.v) break;
                    }
                    ++next_comp;
                }
                const int v = f.v;
                call.pop_back();
                if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
            }
        }
    }
    std::vector<int> comp_size(next_comp, 0);
    for (int v = 0; v < n; ++v)
        if (comp[v] >= 0) ++comp_size[comp[v]];
    std::vector<char> has_cycle(next_comp, 0);
    for (int v = 0; v < n; ++v)
        for (int w : g.edges[v])
            if (comp[v] == comp[w] && (comp_size[comp[v]] > 1 || v == w)) has_cycle[comp[v]] = 1;
    std::vector<int> out;
    for (int v = 0; v < n; ++v)
        if (comp[v] >= 0 && has_cycle[comp[v]]) out.push_back(v);
    return out;
}

struct OmegaScale {
    double h = 0, delta = 0;
    std::vector<int> recurrent;
    std::vector<Vec> centers;
};

struct OmegaReport {
    std::vector<OmegaScale> scales;
    bool nested = true;  // coarser contains finer after one-cell dilation
};

inline OmegaReport omega_estimate(const ImpulsiveSystem& sys, const std::vector<double>& h_seq,
                                  const std::vector<double>& delta_seq) {
    if (h_seq.size() != delta_seq.size() || h_seq.empty())
        throw BadParams("omega_estimate: sequences must match and be nonempty");
    OmegaReport rep;
    for (size_t k = 0; k < h_seq.size(); ++k) {
        if (k > 0 && (h_seq[k] > h_seq[k - 1] || delta_seq[k] > delta_seq[k - 1]))
            throw BadParams("omega_estimate: sequences must be nonincreasing");
        PseudoOrbitGraph g = build_graph(sys, h_seq[k], delta_seq[k]);
        OmegaScale sc;
        sc.h = h_seq[k];
        sc.delta = delta_seq[k];
        sc.recurrent = chain_recurrent_cells(g);
        for (int c : sc.recurrent) sc.centers.push_back(g.grid.center(c));
        rep.scales.push_back(std::move(sc));
    }
    for (size_t k = 1; k < rep.scales.size(); ++k) {
        const OmegaScale& coarse = rep.scales[k - 1];
        const OmegaScale& fine = rep.scales[k];
        for (const Vec& c : fine.centers) {
            double best = kInf;
            for (const Vec& d : coarse.centers) best = std::min(best, sys.Dhat.chart_dist(c, d));
            if (best > coarse.h + fine.h) rep.nested = false;
        }
    }
    return rep;
}

// --- tiled cubes and perturbation boxes -----------------------------------

struct Tile {
    int level = -1;       // -1: central tile, i >= 0: dyadic ring level
    Vec lo, hi;           // template coordinates
    double side = 0.0;    // template side length: 2 for center, 2^-i for rings
};

// Dyadic tiling of the cube [-alpha_depth, alpha_depth]^m: central tile
// [-1,1]^m, then one-tile-thick rings of side 2^-i between radii
// alpha_(i-1) and alpha_i, alpha_i = 1 + sum_{j<=i} 2^-j.
struct TiledCube {
    Vec center;
    double half_width = 0;  // chart units of the full tiled cube
    int depth = 0;
    int dim = 1;
    double alpha = 1.0;     // template outer radius
    std::vector<Tile> tiles;

    double scale() const { return half_width / alpha; }
};

inline TiledCube tile_cube(const Vec& center, double half_width, int depth, int dim) {
    if (depth > 8) throw BadParams("tile_cube: depth must be <= 8");
    if (dim < 1 || dim > 2) throw BadParams("tile_cube: dimension must be 1 or 2");
    TiledCube tc;
    tc.center = center;
    tc.half_width = half_width;
    tc.depth = depth;
    tc.dim = dim;
    double alpha_prev = 1.0;
    double alpha = 1.0;
    for (int j = 0; j <= depth; ++j) alpha += std::pow(2.0, -j);
    tc.alpha = alpha;
    {
        Tile t;
        t.level = -1;
        t.side = 2.0;
        t.lo = Vec(dim);
        t.hi = Vec(dim);
        for (int i = 0; i < dim; ++i) {
            t.lo[i] = -1.0;
            t.hi[i] = 1.0;
        }
        tc.tiles.push_back(t);
    }
    for (int lvl = 0; lvl <= depth; ++lvl) {
        const double side = std::pow(2.0, -lvl);
        const double outer = alpha_prev + side;  // alpha_lvl
        const long cells = long(std::llround(2.0 * outer / side));
        if (dim == 1) {
            for (long k : {-cells / 2, cells / 2 - 1}) {
                Tile t;
                t.level = lvl;
                t.side = side;
                t.lo = Vec{double(k) * side};
                t.hi = Vec{double(k + 1) * side};
                tc.tiles.push_back(t);
            }
        } else {
            for (long i = -cells / 2; i < cells / 2; ++i)
                for (long j = -cells / 2; j < cells / 2; ++j) {
                    // ring condition: touch the outer boundary of the level grid
                    const bool edge = i == -cells / 2 || i == cells / 2 - 1 || j == -cells / 2 ||
                                      j == cells / 2 - 1;
                    if (!edge) continue;
                    Tile t;
                    t.level = lvl;
                    t.side = side;
                    t.lo = Vec{double(i) * side, double(j) * side};
                    t.hi = Vec{double(i + 1) * side, double(j + 1) * side};
                    tc.tiles.push_back(t);
                }
        }
        alpha_prev = outer;
    }
    return tc;
}

struct BoxCertificate {
    Vec center;
    double half_width = 0;
    int order = 0;
    double epsilon = 0;
    bool disjoint = false;
    int witness_a = -1, witness_b = -1;  // first violating iterate pair
    std::string note;
};

namespace detail {

// Sampled image of the inflated cube under f_I^k, tracked as a point cloud.
inline std::vector<Vec> cube_samples(const Vec& center, double hw, int dim, int per_edge) {
    std::vector<Vec> pts;
    if (dim == 1) {
        for (int i = 0; i <= per_edge; ++i)
            pts.push_back(Vec{center[0] - hw + 2.0 * hw * i / per_edge});
    } else {
        for (int i = 0; i <= per_edge; ++i)
            for (int j = 0; j <= per_edge; ++j) {
                const bool edge = i == 0 || j == 0 || i == per_edge || j == per_edge;
                if (!edge && (i % 4 != 0 || j % 4 != 0)) continue;  // edges dense, interior coarse
                pts.push_back(
                    Vec{center[0] - hw + 2.0 * hw * i / per_edge, center[1] - hw + 2.0 * hw * j / per_edge});
            }
    }
    return pts;
}

}  // namespace detail

// Perturbation-box certificate: the first N iterates of the inflated cube
// (1+2eps)C under f_I = I^-1 . P_I . I must stay pairwise disjoint inside
// the impulsive-region chart.
inline BoxCertificate verify_box(const ImpulsiveSystem& sys, const Vec& center, double half_width,
                                 int order, double epsilon, int per_edge = 24) {
    BoxCertificate cert;
    cert.center = center;
    cert.half_width = half_width;
    cert.order = order;
    cert.epsilon = epsilon;
    const int dim = sys.D.chart_dim;
    const double hw = (1.0 + 2.0 * epsilon) * half_width;
    for (int i = 0; i < dim; ++i) {
        if (i == 0 && sys.D.chart_periodic0) continue;
        if (center[i] - hw < sys.D.box_lo[i] || center[i] + hw > sys.D.box_hi[i]) {
            cert.disjoint = false;
            cert.note = "inflated cube leaves the chart interior";
            return cert;
        }
    }
    std::vector<std::vector<Vec>> clouds;
    clouds.push_back(detail::cube_samples(center, hw, dim, per_edge));
    for (int k = 1; k <= order; ++k) {
        std::vector<Vec> next;
        for (const Vec& u : clouds.back()) {
            Vec v = sys.impulse.apply(u);
            PoincareResult pr = poincare(sys, v);
            if (pr.status != HitStatus::ok) {
                cert.disjoint = false;
                cert.note = std::string("iterate lost: ") + hit_status_name(pr.status);
                cert.witness_a = k - 1;
                cert.witness_b = k;
                return cert;
            }
            next.push_back(sys.impulse.apply_inverse(pr.value));
        }
        clouds.push_back(std::move(next));
    }
    // pairwise separation of the sampled clouds
    double sep_guard = 2.0 * hw / per_edge;
    for (size_t a = 0; a < clouds.size(); ++a)
        for (size_t b = a + 1; b < clouds.size(); ++b) {
            double best = kInf;
            for (const Vec& u : clouds[a])
                for (const Vec& v : clouds[b]) best = std::min(best, sys.D.chart_dist(u, v));
            if (best <= sep_guard) {
                cert.disjoint = false;
                cert.witness_a = int(a);
                cert.witness_b = int(b);
                cert.note = "sampled iterates touch";
                return cert;
            }
        }
    cert.disjoint = true;
    return cert;
}

// max_k || T_k T_{k-1}^-1 || with T_k = DI^-1 . DP_I^k . DI along the orbit
// of the impulsive-region point u.
inline double transition_norm_bound(const ImpulsiveSystem& sys, const Vec& u, int order) {
    Vec fku = u;  // f_I^{k-1}(u)
    double worst = 0.0;
    for (int k = 1; k <= order; ++k) {
        const Vec v = sys.impulse.apply(fku);  // P_I^{k-1}(I u) base point
        PoincareResult pr = poincare(sys, v);
        if (pr.status != HitStatus::ok)
            throw Error(std::string("transition_norm_bound: poincare failed: ") +
                        hit_status_name(pr.status));
        Mat DP = poincare_jacobian(sys, v, &pr);
        const Vec fk = sys.impulse.apply_inverse(pr.value);
        Mat quotient = inverse(sys.impulse.jacobian(fk)) * (DP * sys.impulse.jacobian(fku));
        worst = std::max(worst, norm_op(quotient));
        fku = fk;
    }
    return worst;
}

}  // namespace impdyn
