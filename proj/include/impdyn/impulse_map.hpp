#pragma once

#include <vector>

#include "impdyn/section.hpp"

namespace impdyn {

// Quintic C1 bump profile: beta(0)=1, beta(1)=0, beta'(0)=beta'(1)=0.
// beta'(s) = -30 s^2 (1-s)^2, so max|beta'| = 15/8 at s=1/2.
inline double bump_profile(double s) {
    if (s <= 0) return 1.0;
    if (s >= 1) return 0.0;
    const double s2 = s * s, s3 = s2 * s;
    return 1.0 - 10.0 * s3 + 15.0 * s3 * s - 6.0 * s3 * s2;
}
inline double bump_profile_deriv(double s) {
    if (s <= 0 || s >= 1) return 0.0;
    const double t = s * (1.0 - s);
    return -30.0 * t * t;
}

inline constexpr double kBumpSlope = 15.0 / 8.0;  // max |beta'|
// max over [0,1] of beta(s) + s|beta'(s)|, attained at s = 1/2.
inline constexpr double kBumpLinearSlope = 23.0 / 16.0;
// upper bound on max s*beta(s) (true max ~0.2731 near s=0.42).
inline constexpr double kBumpLinearValue = 0.28;

struct Bump {
    enum class Kind { translate, linear };
    Kind kind = Kind::translate;
    Vec center;       // target-chart point p
    double radius = 0;
    Vec shift;        // q - p (translate)
    Mat linear;       // E (linear)

    Vec apply(const Vec& v, bool periodic0) const {
        const double d = chart_gap(v, periodic0);
        if (d >= radius) return v;
        const double b = bump_profile(d / radius);
        if (kind == Kind::translate) return v + b * shift;
        Vec w = v;
        Vec rel = diff(v, periodic0);
        Vec lv = linear * rel;
        for (int i = 0; i < v.n; ++i) w[i] += b * lv[i];
        return w;
    }

    Mat jacobian(const Vec& v, bool periodic0) const {
        const int n = v.n;
        Mat j = Mat::identity(n);
        const double d = chart_gap(v, periodic0);
        if (d >= radius || radius <= 0) return j;
        const double s = d / radius;
        const double b = bump_profile(s);
        Vec rel = diff(v, periodic0);
        Vec grad_s(n);
        if (d > 1e-300)
            for (int i = 0; i < n; ++i) grad_s[i] = rel[i] / (d * radius);
        const double db = bump_profile_deriv(s);
        if (kind == Kind::translate) {
            j += db * outer(shift, grad_s);
        } else {
            j += b * linear;
            j += db * outer(linear * rel, grad_s);
        }
        return j;
    }

    // Analytic C1 value / slope bounds of the perturbation h - id.
    double value_bound() const {
        if (kind == Kind::translate) return norm(shift);
        return norm_op(linear) * radius * kBumpLinearValue;
    }
    double slope_bound() const {
        if (kind == Kind::translate) return radius > 0 ? norm(shift) * kBumpSlope / radius : 0.0;
        return norm_op(linear) * kBumpLinearSlope;
    }

   private:
    Vec diff(const Vec& v, bool periodic0) const {
        Vec r = v - center;
        if (periodic0) {
            double d = v[0] - center[0];
            d = std::remainder(d, kTwoPi);
            r[0] = d;
        }
        return r;
    }
    double chart_gap(const Vec& v, bool periodic0) const { return norm(diff(v, periodic0)); }
};

// Impulse between section charts: a named closed-form base map (per-axis
// affine, covering every shipped example) post-composed with a stack of
// localized bumps on the target chart.
struct Impulse {
    std::string source;  // section names, checked when systems are assembled
    std::string target;
    int dim = 1;
    Vec base_offset;   // a_i
    Vec base_scale;    // b_i, all nonzero (invertible base)
    bool wrap0 = false;  // target chart axis 0 is a circle
    std::vector<Bump> bumps;

    Vec base(const Vec& u) const {
        Vec v(dim);
        for (int i = 0; i < dim; ++i) v[i] = base_offset[i] + base_scale[i] * u[i];
        if (wrap0) v[0] = wrap_angle(v[0]);
        return v;
    }
    Vec base_inverse(const Vec& v) const {
        Vec u(dim);
        for (int i = 0; i < dim; ++i) u[i] = (v[i] - base_offset[i]) / base_scale[i];
        if (wrap0) u[0] = wrap_angle(u[0]);
        return u;
    }
    Mat base_jacobian() const {
        Mat j(dim, dim);
        for (int i = 0; i < dim; ++i) j(i, i) = base_scale[i];
        return j;
    }

    Vec apply(const Vec& u) const {
        Vec v = base(u);
        for (const Bump& b : bumps) v = b.apply(v, wrap0);
        return v;
    }

    Mat jacobian(const Vec& u) const {
        Mat j = base_jacobian();
        Vec v = base(u);
        for (const Bump& b : bumps) {
            j = b.jacobian(v, wrap0) * j;
            v = b.apply(v, wrap0);
        }
        return j;
    }

    // Newton inverse of the full map (base inverse seeds; bumps are small).
    Vec apply_inverse(const Vec& v) const {
        Vec u = base_inverse(v);
        for (int it = 0; it < 64; ++it) {
            Vec r = apply(u) - v;
            if (wrap0) r[0] = std::remainder(r[0], kTwoPi);
            if (norm(r) < 1e-13) return u;
            u = u - solve(jacobian(u), r);
        }
        throw Error("impulse inverse did not converge");
    }

    // Sup-norm bound for the Jacobian of the full stack.
    double jac_norm_bound() const {
        double m = 0;
        for (int i = 0; i < dim; ++i) m = std::max(m, std::abs(base_scale[i]));
        for (const Bump& b : bumps) m *= 1.0 + b.slope_bound();
        return m;
    }

    // Analytic bound for d_C1(*this, bumps-extended copy): per-bump
    // max(value, slope * inner-Jacobian bound), summed over the new bumps.
    double c1_extension_bound(const std::vector<Bump>& extra) const {
        Impulse running = *this;
        double total = 0;
        for (const Bump& b : extra) {
            const double inner = running.jac_norm_bound();
            total += std::max(b.value_bound(), b.slope_bound() * inner);
            running.bumps.push_back(b);
        }
        return total;
    }
};

inline Impulse make_affine_impulse(const std::string& source, const std::string& target, int dim,
                                   const Vec& offset, const Vec& scale, bool wrap0 = false) {
    Impulse im;
    im.source = source;
    im.target = target;
    im.dim = dim;
    im.base_offset = offset;
    im.base_scale = scale;
    im.wrap0 = wrap0;
    for (int i = 0; i < dim; ++i)
        if (scale[i] == 0.0) throw BadParams("impulse base must be invertible");
    return im;
}

// True when J equals I with extra bumps appended (analytic C1 route applies).
inline bool is_bump_extension(const Impulse& i1, const Impulse& i2) {
    if (i1.dim != i2.dim || i1.bumps.size() > i2.bumps.size()) return false;
    for (int k = 0; k < i1.dim; ++k)
        if (i1.base_offset[k] != i2.base_offset[k] || i1.base_scale[k] != i2.base_scale[k])
            return false;
    for (size_t k = 0; k < i1.bumps.size(); ++k) {
        const Bump &a = i1.bumps[k], &b = i2.bumps[k];
        if (a.kind != b.kind || a.radius != b.radius || dist(a.center, b.center) != 0) return false;
        if (a.kind == Bump::Kind::translate) {
            if (dist(a.shift, b.shift) != 0) return false;
        } else {
            for (int i = 0; i < a.linear.rows * a.linear.cols; ++i)
                if (a.linear.a[i] != b.linear.a[i]) return false;
        }
    }
    return true;
}

// d_C1 = max(sup |I1 - I2|, sup ||DI1 - DI2||). Analytic when one impulse
// extends the other by bumps; otherwise dense chart-grid sampling with step
// bounded by the source boundary margin.
inline double c1_distance(const Impulse& i1, const Impulse& i2, const CrossSection& source_chart) {
    if (i1.source != i2.source || i1.target != i2.target)
        throw IncompatibleSections("impulses act between different sections");
    if (is_bump_extension(i1, i2)) {
        std::vector<Bump> extra(i2.bumps.begin() + i1.bumps.size(), i2.bumps.end());
        return i1.c1_extension_bound(extra);
    }
    if (is_bump_extension(i2, i1)) {
        std::vector<Bump> extra(i1.bumps.begin() + i2.bumps.size(), i1.bumps.end());
        return i2.c1_extension_bound(extra);
    }
    // grid sampling
    const int dim = i1.dim;
    double step = source_chart.boundary_margin > 0 ? source_chart.boundary_margin : 1e-3;
    double worst = 0;
    auto probe = [&](const Vec& u) {
        Vec d = i1.apply(u) - i2.apply(u);
        if (i1.wrap0) d[0] = std::remainder(d[0], kTwoPi);
        worst = std::max(worst, norm(d));
        worst = std::max(worst, norm_op(i1.jacobian(u) - i2.jacobian(u)));
    };
    if (dim == 1) {
        const double w = source_chart.box_width(0);
        const int n = std::min(20000, std::max(8, int(w / step)));
        for (int i = 0; i <= n; ++i) probe(Vec{source_chart.box_lo[0] + w * i / n});
    } else {
        const double w0 = source_chart.box_width(0), w1 = source_chart.box_width(1);
        const int n0 = std::min(512, std::max(8, int(w0 / step)));
        const int n1 = std::min(512, std::max(8, int(w1 / step)));
        for (int i = 0; i <= n0; ++i)
            for (int j = 0; j <= n1; ++j)
                probe(Vec{source_chart.box_lo[0] + w0 * i / n0, source_chart.box_lo[1] + w1 * j / n1});
    }
    return worst;
}

struct BumpBudgetOpts {
    double lambda_min = 4.0;  // default support factor, exposed as config
};

// Support ball must stay inside the target chart box.
inline void check_support(const CrossSection& target, const Vec& p, double radius) {
    for (int i = 0; i < target.chart_dim; ++i) {
        if (i == 0 && target.chart_periodic0) {
            if (2.0 * radius >= kTwoPi) throw SupportOutsideChart("support wraps the whole circle");
            continue;
        }
        if (p[i] - radius < target.box_lo[i] || p[i] + radius > target.box_hi[i])
            throw SupportOutsideChart("bump ball leaves the target chart");
    }
}

// Translation bump moving p to q exactly, with analytic C1 bound <= eps.
// Support radius is lambda * |q-p| with lambda = max(lambda_min,
// kBumpSlope/eps); for small budgets the radius grows accordingly.
inline Impulse bump_translate(const Impulse& I, const CrossSection& target, const Vec& p,
                              const Vec& q, double eps, BumpBudgetOpts opts = {}) {
    Vec shift = q - p;
    if (I.wrap0) shift[0] = std::remainder(shift[0], kTwoPi);
    const double jump = norm(shift);
    if (jump == 0.0) return I;  // zero bump is dropped
    if (jump > eps) throw BudgetExceeded("translation jump exceeds the C1 value budget");
    const double lambda = std::max(opts.lambda_min, kBumpSlope / eps * 1.0000001);
    const double radius = lambda * jump;
    check_support(target, p, radius);
    Bump b;
    b.kind = Bump::Kind::translate;
    b.center = p;
    b.radius = radius;
    b.shift = shift;
    if (std::max(b.value_bound(), b.slope_bound()) > eps)
        throw BudgetExceeded("translation bump bound exceeds eps");
    Impulse J = I;
    J.bumps.push_back(b);
    return J;
}

// Linear (Franks-type) bump: h(p) = p, Dh(p) = Id + E, h = id outside the
// ball of the given radius.
inline Impulse bump_linear(const Impulse& I, const CrossSection& target, const Vec& p, const Mat& E,
                           double radius, double eps = kInf) {
    bool zero = true;
    for (int i = 0; i < E.rows * E.cols; ++i)
        if (E.a[i] != 0.0) zero = false;
    if (zero) return I;
    check_support(target, p, radius);
    Bump b;
    b.kind = Bump::Kind::linear;
    b.center = p;
    b.radius = radius;
    b.linear = E;
    if (std::max(b.value_bound(), b.slope_bound()) > eps)
        throw BudgetExceeded("linear bump bound exceeds eps");
    Impulse J = I;
    J.bumps.push_back(b);
    return J;
}

}  // namespace impdyn
