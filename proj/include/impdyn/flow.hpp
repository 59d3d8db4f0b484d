#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "impdyn/errors.hpp"
#include "impdyn/field.hpp"

namespace impdyn {

struct IntegratorOpts {
    double step = 1e-3;   // fixed RK4 base step
    double tol = 1e-10;   // endpoint verification tolerance for the halving pass
    int max_halvings = 8;
    bool record_path = false;
    double record_stride = 0.0;  // 0: every base step when recording
};

struct FlowResult {
    Vec endpoint;
    std::vector<std::pair<double, Vec>> path;  // (time, point), strictly increasing
    std::optional<Mat> jacobian;               // D phi_t when requested
};

namespace detail {

// Single classical RK4 step for the point (and optionally the variational
// matrix, integrated column-wise alongside).
inline void rk4_step(const SystemField& f, double h, Vec& x, Mat* dphi) {
    const int d = f.dim;
    auto rhs = [&](const Vec& p, const Mat* m, Vec& dx, Mat& dm) {
        dx = f.eval(p);
        if (m) dm = f.jacobian(p) * (*m);
    };
    Vec k1(d), k2(d), k3(d), k4(d);
    Mat m1, m2, m3, m4;
    Mat dummy;
    rhs(x, dphi, k1, m1);
    {
        Vec p = x + (h / 2) * k1;
        Mat m = dphi ? *dphi + (h / 2) * m1 : Mat();
        rhs(p, dphi ? &m : nullptr, k2, m2);
    }
    {
        Vec p = x + (h / 2) * k2;
        Mat m = dphi ? *dphi + (h / 2) * m2 : Mat();
        rhs(p, dphi ? &m : nullptr, k3, m3);
    }
    {
        Vec p = x + h * k3;
        Mat m = dphi ? *dphi + h * m3 : Mat();
        rhs(p, dphi ? &m : nullptr, k4, m4);
    }
    x += (h / 6) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (dphi) *dphi += (h / 6) * (m1 + 2.0 * m2 + 2.0 * m3 + m4);
}

// Fixed-step integration over [0, t] (t may be negative), with optional
// per-step callback. The callback sees every step endpoint in order.
inline Vec rk4_integrate(const SystemField& f, Vec x, double t, double step, Mat* dphi,
                         const std::function<void(double, const Vec&)>& on_step = nullptr) {
    if (!f.in_domain(x)) throw DomainError("initial point outside phase domain");
    if (step <= 0) throw StepError("non-positive step");
    if (t == 0) return x;
    const double dir = t > 0 ? 1.0 : -1.0;
    const double tend = std::abs(t);
    double done = 0.0;
    while (done < tend) {
        double h = std::min(step, tend - done);
        if (h < 1e-300) throw StepError("step underflow");
        rk4_step(f, dir * h, x, dphi);
        done += h;
        if (!f.in_domain(x)) throw DomainError("trajectory left phase domain at t=" + std::to_string(dir * done));
        if (on_step) on_step(dir * done, x);
    }
    return x;
}

// --- exact flows ---------------------------------------------------------

// Billiard suspension state (x, theta, s): x boundary angle of the chord
// start, theta incidence angle from the inward normal, s time along the
// chord. Collision wrap: (x, theta, r(theta)) -> (x + pi - 2 theta, theta, 0)
// with flight r(theta) = 2 cos theta.
inline FlowResult billiard_flow(const SystemField&, Vec x, double t, bool want_jac,
                                const IntegratorOpts& opts) {
    FlowResult out;
    Mat J = Mat::identity(3);
    double remaining = t;
    if (t < 0) throw DomainError("billiard suspension flow is forward-only");
    double s = x[2];
    double theta = x[1];
    double pos = x[0];
    if (std::abs(theta) >= kPi / 2) throw DomainError("billiard grazing fiber");
    const double roof = 2.0 * std::cos(theta);
    if (opts.record_path) out.path.push_back({0.0, x});
    double now = 0.0;
    // wraps within 1e-9 of the requested horizon are taken, so flowing to an
    // exact collision-sum time lands on the post-collision state
    while (true) {
        const double to_wrap = roof - s;
        if (remaining < to_wrap - 1e-9 || remaining <= 0) {
            s += std::max(remaining, 0.0);
            now += std::max(remaining, 0.0);
            break;
        }
        // advance to the collision and reflect
        s = 0.0;
        pos = wrap_angle(pos + kPi - 2.0 * theta);
        remaining -= to_wrap;
        now += to_wrap;
        if (want_jac) {
            Mat W = Mat::identity(3);
            W(0, 1) = -2.0;
            W(2, 1) = 2.0 * std::sin(theta);  // d(roof)/d(theta) enters the new s
            J = W * J;
        }
        if (opts.record_path) out.path.push_back({now, Vec{pos, theta, 0.0}});
    }
    out.endpoint = Vec{pos, theta, s};
    if (opts.record_path && (out.path.empty() || out.path.back().first < now))
        out.path.push_back({now, out.endpoint});
    if (want_jac) out.jacobian = J;
    return out;
}

// Lorenz suspension state (x, y, s), 0 <= s < total(x); wrap at
// s = total(x): (x, y) -> (f(x), H(x, y)), s -> 0.
inline FlowResult lorenz_flow(const SystemField& f, Vec p, double t, bool want_jac,
                              const IntegratorOpts& opts) {
    if (t < 0) throw DomainError("lorenz suspension flow is forward-only");
    const LorenzParams& lp = f.lorenz;
    FlowResult out;
    Mat J = Mat::identity(3);
    double x = p[0], y = p[1], s = p[2];
    double remaining = t;
    double now = 0.0;
    if (opts.record_path) out.path.push_back({0.0, p});
    while (true) {
        if (x == 0.0) throw DomainError("lorenz orbit on the singular line x=0");
        const double total = lp.total(x);
        const double to_wrap = total - s;
        if (remaining < to_wrap - 1e-9 || remaining <= 0) {
            s += std::max(remaining, 0.0);
            now += std::max(remaining, 0.0);
            break;
        }
        if (want_jac) {
            Mat W(3, 3);
            W(0, 0) = lp.fprime(x);
            W(1, 0) = lp.Hx();
            W(1, 1) = lp.Hy();
            W(2, 0) = -lp.total_prime(x);
            W(2, 2) = 1.0;
            J = W * J;
        }
        const double nx = lp.f(x);
        const double ny = lp.H(x, y);
        x = nx;
        y = ny;
        s = 0.0;
        remaining -= to_wrap;
        now += to_wrap;
        if (opts.record_path) out.path.push_back({now, Vec{x, y, 0.0}});
    }
    out.endpoint = Vec{x, y, s};
    if (opts.record_path && (out.path.empty() || out.path.back().first < now))
        out.path.push_back({now, out.endpoint});
    if (want_jac) out.jacobian = J;
    return out;
}

}  // namespace detail

// phi_t(x). Exact kinds use closed forms; the rest use fixed-step RK4 with a
// halving verification pass on the endpoint.
inline FlowResult flow(const SystemField& f, const Vec& x, double t, IntegratorOpts opts = {}) {
    FlowResult out;
    if (f.kind == FieldKind::disk_billiard) return detail::billiard_flow(f, x, t, false, opts);
    if (f.kind == FieldKind::lorenz_skew) return detail::lorenz_flow(f, x, t, false, opts);

    auto run = [&](double step, bool record) {
        FlowResult r;
        if (record) r.path.push_back({0.0, x});
        auto cb = record ? std::function<void(double, const Vec&)>([&](double tt, const Vec& p) {
            r.path.push_back({tt, p});
        })
                         : std::function<void(double, const Vec&)>();
        r.endpoint = detail::rk4_integrate(f, x, t, step, nullptr, cb);
        return r;
    };
    double step = opts.step;
    FlowResult coarse = run(step, false);
    for (int k = 0;; ++k) {
        FlowResult fine = run(step / 2, false);
        if (dist(fine.endpoint, coarse.endpoint) <= opts.tol) {
            coarse = std::move(fine);
            step /= 2;
            break;
        }
        coarse = std::move(fine);
        step /= 2;
        if (k + 1 >= opts.max_halvings) throw StepError("endpoint did not settle under halving");
    }
    if (opts.record_path) {
        out = run(step, true);
    } else {
        out = std::move(coarse);
    }
    return out;
}

// phi_t with the variational matrix D phi_t, d/dt Dphi = DX(phi_t) Dphi.
inline FlowResult flow_with_jacobian(const SystemField& f, const Vec& x, double t,
                                     IntegratorOpts opts = {}) {
    if (f.kind == FieldKind::disk_billiard) return detail::billiard_flow(f, x, t, true, opts);
    if (f.kind == FieldKind::lorenz_skew) return detail::lorenz_flow(f, x, t, true, opts);
    FlowResult out;
    Mat J = Mat::identity(f.dim);
    out.endpoint = detail::rk4_integrate(f, x, t, opts.step, &J);
    // Halving verification on the endpoint only; the variational matrix is
    // re-integrated at the accepted step.
    Mat J2 = Mat::identity(f.dim);
    Vec e2 = detail::rk4_integrate(f, x, t, opts.step / 2, &J2);
    if (dist(e2, out.endpoint) > opts.tol) {
        double step = opts.step / 2;
        Vec prev = e2;
        Mat Jp = J2;
        for (int k = 0;; ++k) {
            if (k >= opts.max_halvings) throw StepError("endpoint did not settle under halving");
            step /= 2;
            Mat Jn = Mat::identity(f.dim);
            Vec en = detail::rk4_integrate(f, x, t, step, &Jn);
            if (dist(en, prev) <= opts.tol) {
                prev = en;
                Jp = Jn;
                break;
            }
            prev = en;
            Jp = Jn;
        }
        out.endpoint = prev;
        out.jacobian = Jp;
    } else {
        out.endpoint = e2;
        out.jacobian = J2;
    }
    return out;
}

}  // namespace impdyn
