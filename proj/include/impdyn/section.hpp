#pragma once

#include <limits>
#include <optional>
#include <string>

#include "impdyn/field.hpp"

namespace impdyn {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class SectionKind {
    axis_segment_pos,  // u -> (u, 0),  g = y          (annulus impulsive region)
    axis_segment_neg,  // u -> (-u, 0), g = y          (annulus landing region)
    vertical_segment,  // u -> (c, u),  g = x - c      (predator-prey sections)
    circle,            // u -> R(cos u, sin u), g = x^2+y^2-R^2, periodic chart
    torus_circle,      // u -> (c, u) on T^2, g = sin(x - c), periodic chart
    billiard_arc,      // (x,theta) -> (x,theta,0), g = s - 0 at collisions
    lorenz_base,       // (x,y) -> (x,y,0), g = s
    lorenz_wing,       // (x,y) -> (x,y,roof(x)), g = s - roof(x)
};

inline const char* section_kind_name(SectionKind k) {
    switch (k) {
        case SectionKind::axis_segment_pos: return "axis_segment_pos";
        case SectionKind::axis_segment_neg: return "axis_segment_neg";
        case SectionKind::vertical_segment: return "vertical_segment";
        case SectionKind::circle: return "circle";
        case SectionKind::torus_circle: return "torus_circle";
        case SectionKind::billiard_arc: return "billiard_arc";
        case SectionKind::lorenz_base: return "lorenz_base";
        case SectionKind::lorenz_wing: return "lorenz_wing";
    }
    return "?";
}

// Codimension-one section patch given by an explicit chart, an implicit
// event function g with the section inside {g = 0}, and a chart box.
struct CrossSection {
    SectionKind kind = SectionKind::axis_segment_pos;
    std::string name;
    int chart_dim = 1;
    int ambient_dim = 2;
    Vec box_lo{0.0};
    Vec box_hi{1.0};
    double boundary_margin = 1e-3;
    double c = 0.0;                  // offset parameter (vertical/torus sections)
    double radius = 1.0;             // circle radius
    LorenzParams lorenz;             // used by lorenz_wing geometry
    bool chart_periodic0 = false;    // chart axis 0 lives on a circle

    bool in_box(const Vec& u, double slack = 1e-12) const {
        for (int i = 0; i < chart_dim; ++i) {
            if (i == 0 && chart_periodic0) continue;
            if (u[i] < box_lo[i] - slack || u[i] > box_hi[i] + slack) return false;
        }
        return true;
    }

    Vec chart(const Vec& u) const {
        if (!in_box(u)) throw ChartError(name + ": point outside chart box " + format_vec(u));
        switch (kind) {
            case SectionKind::axis_segment_pos: return Vec{u[0], 0.0};
            case SectionKind::axis_segment_neg: return Vec{-u[0], 0.0};
            case SectionKind::vertical_segment: return Vec{c, u[0]};
            case SectionKind::circle: return Vec{radius * std::cos(u[0]), radius * std::sin(u[0])};
            case SectionKind::torus_circle: return Vec{c, wrap_angle(u[0])};
            case SectionKind::billiard_arc: return Vec{wrap_angle(u[0]), u[1], 0.0};
            case SectionKind::lorenz_base: return Vec{u[0], u[1], 0.0};
            case SectionKind::lorenz_wing: return Vec{u[0], u[1], lorenz.roof(u[0])};
        }
        return Vec(ambient_dim);
    }

    // Partial inverse; empty when the ambient point is not on this patch.
    std::optional<Vec> chart_inverse(const Vec& x, double tol = 1e-9) const {
        Vec u(chart_dim);
        switch (kind) {
            case SectionKind::axis_segment_pos:
                if (std::abs(x[1]) > tol || x[0] <= 0) return std::nullopt;
                u[0] = x[0];
                break;
            case SectionKind::axis_segment_neg:
                if (std::abs(x[1]) > tol || x[0] >= 0) return std::nullopt;
                u[0] = -x[0];
                break;
            case SectionKind::vertical_segment:
                if (std::abs(x[0] - c) > tol) return std::nullopt;
                u[0] = x[1];
                break;
            case SectionKind::circle: {
                const double r = std::hypot(x[0], x[1]);
                if (std::abs(r - radius) > tol) return std::nullopt;
                u[0] = wrap_angle(std::atan2(x[1], x[0]));
                break;
            }
            case SectionKind::torus_circle:
                if (circle_dist(x[0], c) > tol) return std::nullopt;
                u[0] = wrap_angle(x[1]);
                break;
            case SectionKind::billiard_arc:
                if (std::abs(x[2]) > tol) return std::nullopt;
                u[0] = wrap_angle(x[0]);
                u[1] = x[1];
                break;
            case SectionKind::lorenz_base:
                if (std::abs(x[2]) > tol) return std::nullopt;
                u[0] = x[0];
                u[1] = x[1];
                break;
            case SectionKind::lorenz_wing:
                if (std::abs(x[2] - lorenz.roof(x[0])) > tol) return std::nullopt;
                u[0] = x[0];
                u[1] = x[1];
                break;
        }
        // Periodic arc charts store boxes in unwrapped coordinates.
        if (kind == SectionKind::billiard_arc && !chart_periodic0) {
            if (u[0] > box_hi[0] + kPi) u[0] -= kTwoPi;
            if (u[0] < box_lo[0] - kPi) u[0] += kTwoPi;
        }
        if (!in_box(u, 1e-9)) return std::nullopt;
        return u;
    }

    double event_g(const Vec& x) const {
        switch (kind) {
            case SectionKind::axis_segment_pos:
            case SectionKind::axis_segment_neg: return x[1];
            case SectionKind::vertical_segment: return x[0] - c;
            case SectionKind::circle: return x[0] * x[0] + x[1] * x[1] - radius * radius;
            case SectionKind::torus_circle: return std::sin(x[0] - c);
            case SectionKind::billiard_arc: return x[2];
            case SectionKind::lorenz_base: return x[2];
            case SectionKind::lorenz_wing: return x[2] - lorenz.roof(x[0]);
        }
        return 0.0;
    }

    Vec grad_g(const Vec& x) const {
        switch (kind) {
            case SectionKind::axis_segment_pos:
            case SectionKind::axis_segment_neg: return Vec{0.0, 1.0};
            case SectionKind::vertical_segment: return Vec{1.0, 0.0};
            case SectionKind::circle: return Vec{2.0 * x[0], 2.0 * x[1]};
            case SectionKind::torus_circle: return Vec{std::cos(x[0] - c), 0.0};
            case SectionKind::billiard_arc: return Vec{0.0, 0.0, 1.0};
            case SectionKind::lorenz_base: return Vec{0.0, 0.0, 1.0};
            case SectionKind::lorenz_wing: return Vec{-lorenz.roof_prime(x[0]), 0.0, 1.0};
        }
        return Vec(ambient_dim);
    }

    // d(ambient)/d(u): ambient_dim x chart_dim.
    Mat chart_tangent(const Vec& u) const {
        Mat t(ambient_dim, chart_dim);
        switch (kind) {
            case SectionKind::axis_segment_pos: t(0, 0) = 1.0; break;
            case SectionKind::axis_segment_neg: t(0, 0) = -1.0; break;
            case SectionKind::vertical_segment: t(1, 0) = 1.0; break;
            case SectionKind::circle:
                t(0, 0) = -radius * std::sin(u[0]);
                t(1, 0) = radius * std::cos(u[0]);
                break;
            case SectionKind::torus_circle: t(1, 0) = 1.0; break;
            case SectionKind::billiard_arc:
                t(0, 0) = 1.0;
                t(1, 1) = 1.0;
                break;
            case SectionKind::lorenz_base:
                t(0, 0) = 1.0;
                t(1, 1) = 1.0;
                break;
            case SectionKind::lorenz_wing:
                t(0, 0) = 1.0;
                t(1, 1) = 1.0;
                t(2, 0) = lorenz.roof_prime(u[0]);
                break;
        }
        return t;
    }

    // Left inverse of the chart tangent: chart_dim x ambient_dim, valid on
    // vectors tangent to the section.
    Mat chart_cotangent(const Vec& u) const {
        Mat t = chart_tangent(u);
        Mat g = transpose(t) * t;
        return inverse(g) * transpose(t);
    }

    // Chart-space distance to the boundary of the chart box; +inf for
    // boundaryless (fully periodic) charts.
    double boundary_distance(const Vec& u) const {
        if (!in_box(u)) throw ChartError(name + ": point outside chart box");
        double d = kInf;
        for (int i = 0; i < chart_dim; ++i) {
            if (i == 0 && chart_periodic0) continue;
            d = std::min(d, std::min(u[i] - box_lo[i], box_hi[i] - u[i]));
        }
        return d;
    }

    // Chart metric respecting periodic axes.
    double chart_dist(const Vec& u, const Vec& v) const {
        double s = 0;
        for (int i = 0; i < chart_dim; ++i) {
            double d = (i == 0 && chart_periodic0) ? circle_dist(u[i], v[i]) : u[i] - v[i];
            s += d * d;
        }
        return std::sqrt(s);
    }

    double box_width(int i) const { return box_hi[i] - box_lo[i]; }
};

inline Vec chart_to_ambient(const CrossSection& s, const Vec& u) { return s.chart(u); }

// min over a chart grid of |grad g . X| / (|grad g| |X|); positive iff the
// flow is numerically transversal to the section patch. Grid stays a
// boundary margin away from the chart box edges.
inline double transversality_margin(const CrossSection& s, const SystemField& f, int grid = 64) {
    double worst = kInf;
    const double m = std::max(s.boundary_margin, 1e-3);
    Vec u(s.chart_dim);
    auto probe = [&](const Vec& uu) {
        Vec x = s.chart(uu);
        Vec X = f.eval(x);
        const double nx = norm(X);
        if (nx < 1e-14)
            throw SingularityError(s.name + ": vector field vanishes on the section (hypothesis (H))");
        Vec gg = s.grad_g(x);
        worst = std::min(worst, std::abs(dot(gg, X)) / (norm(gg) * nx));
    };
    if (s.chart_dim == 1) {
        for (int i = 0; i <= grid; ++i) {
            u[0] = s.box_lo[0] + m + (s.box_width(0) - 2 * m) * i / grid;
            probe(u);
        }
    } else {
        for (int i = 0; i <= grid; ++i)
            for (int j = 0; j <= grid; ++j) {
                u[0] = s.box_lo[0] + m + (s.box_width(0) - 2 * m) * i / grid;
                u[1] = s.box_lo[1] + m + (s.box_width(1) - 2 * m) * j / grid;
                if (s.kind == SectionKind::lorenz_base || s.kind == SectionKind::lorenz_wing)
                    if (std::abs(u[0]) < 1e-3) continue;  // singular line of the model
                probe(u);
            }
    }
    return worst;
}

// --- shipped section constructors ----------------------------------------

inline CrossSection section_axis_segment(bool positive, double lo, double hi, double margin,
                                         const std::string& name) {
    CrossSection s;
    s.kind = positive ? SectionKind::axis_segment_pos : SectionKind::axis_segment_neg;
    s.name = name;
    s.chart_dim = 1;
    s.ambient_dim = 2;
    s.box_lo = Vec{lo};
    s.box_hi = Vec{hi};
    s.boundary_margin = margin;
    return s;
}

inline CrossSection section_vertical_segment(double x0, double lo, double hi, double margin,
                                             const std::string& name) {
    CrossSection s;
    s.kind = SectionKind::vertical_segment;
    s.name = name;
    s.chart_dim = 1;
    s.ambient_dim = 2;
    s.c = x0;
    s.box_lo = Vec{lo};
    s.box_hi = Vec{hi};
    s.boundary_margin = margin;
    return s;
}

inline CrossSection section_circle(double radius, const std::string& name) {
    CrossSection s;
    s.kind = SectionKind::circle;
    s.name = name;
    s.chart_dim = 1;
    s.ambient_dim = 2;
    s.radius = radius;
    s.box_lo = Vec{0.0};
    s.box_hi = Vec{kTwoPi};
    s.chart_periodic0 = true;
    return s;
}

inline CrossSection section_torus_circle(double x0, const std::string& name) {
    CrossSection s;
    s.kind = SectionKind::torus_circle;
    s.name = name;
    s.chart_dim = 1;
    s.ambient_dim = 2;
    s.c = x0;
    s.box_lo = Vec{0.0};
    s.box_hi = Vec{kTwoPi};
    s.chart_periodic0 = true;
    return s;
}

inline CrossSection section_billiard_arc(double arc_lo, double arc_hi, double theta_max,
                                         double margin, const std::string& name) {
    CrossSection s;
    s.kind = SectionKind::billiard_arc;
    s.name = name;
    s.chart_dim = 2;
    s.ambient_dim = 3;
    s.box_lo = Vec{arc_lo, -theta_max};
    s.box_hi = Vec{arc_hi, theta_max};
    s.boundary_margin = margin;
    return s;
}

inline CrossSection section_lorenz(bool wing, const LorenzParams& lp, double margin,
                                   const std::string& name) {
    CrossSection s;
    s.kind = wing ? SectionKind::lorenz_wing : SectionKind::lorenz_base;
    s.name = name;
    s.chart_dim = 2;
    s.ambient_dim = 3;
    s.lorenz = lp;
    s.box_lo = Vec{-1.0, -1.0};
    s.box_hi = Vec{1.0, 1.0};
    s.boundary_margin = margin;
    return s;
}

}  // namespace impdyn
