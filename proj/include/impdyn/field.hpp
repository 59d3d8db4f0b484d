#pragma once

#include <cmath>
#include <map>
#include <string>

#include "impdyn/errors.hpp"
#include "impdyn/linalg.hpp"

namespace impdyn {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

inline double wrap_angle(double x) {
    double y = std::fmod(x, kTwoPi);
    if (y < 0) y += kTwoPi;
    return y;
}

// Distance on the circle of circumference 2*pi.
inline double circle_dist(double a, double b) {
    double d = std::abs(wrap_angle(a) - wrap_angle(b));
    return std::min(d, kTwoPi - d);
}

enum class FieldKind {
    annulus_rotation,  // X = (-y, x) on the annulus 1 <= r <= 2
    predator_prey,     // x' = x(3-x-y), y' = y(-1+x-y) on [0,4]x[0,2]
    radial_disk,       // X = -x on the disk r <= 3
    torus_linear,      // X = (1, alpha) on T^2, both coordinates mod 2*pi
    disk_billiard,     // unit-disk billiard in suspension coordinates ((x,theta), s)
    lorenz_skew,       // suspension model of the geometric Lorenz section map
};

inline const char* field_kind_name(FieldKind k) {
    switch (k) {
        case FieldKind::annulus_rotation: return "annulus_rotation";
        case FieldKind::predator_prey: return "predator_prey";
        case FieldKind::radial_disk: return "radial_disk";
        case FieldKind::torus_linear: return "torus_linear";
        case FieldKind::disk_billiard: return "disk_billiard";
        case FieldKind::lorenz_skew: return "lorenz_skew";
    }
    return "?";
}

// Lorenz quotient map f(x) = sign(x) * (c|x|^a - 1) and fiber map
// H(x,y) = -sign(x) * (h0 + h1|x|) + hy*y.  Constraints checked at
// construction: |f| < 1, f' > sqrt(2), |H| < 1, |dH/dx| < 1, |dH/dy| < 1.
struct LorenzParams {
    double a = 0.8;
    double c = 1.85;
    double h0 = 0.5;
    double h1 = 0.2;
    double hy = 0.25;
    double kappa = 0.5;  // roof h(x) = t1 - kappa * ln|x|
    double t1 = 1.0;     // passage time to the wing at |x| = 1
    double t2 = 1.0;     // flight time wing -> base

    double f(double x) const { return (x >= 0 ? 1.0 : -1.0) * (c * std::pow(std::abs(x), a) - 1.0); }
    double fprime(double x) const { return c * a * std::pow(std::abs(x), a - 1.0); }
    double H(double x, double y) const { return -(x >= 0 ? 1.0 : -1.0) * (h0 + h1 * std::abs(x)) + hy * y; }
    double Hx() const { return -h1; }  // d/dx of -sign(x)*h1*|x|, constant on each half
    double Hy() const { return hy; }

    double roof(double x) const { return t1 - kappa * std::log(std::abs(x)); }
    double roof_prime(double x) const { return -kappa / x; }
    double total(double x) const { return roof(x) + t2; }
    double total_prime(double x) const { return roof_prime(x); }
};

struct SystemField {
    FieldKind kind = FieldKind::annulus_rotation;
    int dim = 2;
    std::map<std::string, double> params;

    // Resolved parameters (map lookups are too slow for the inner loops).
    double alpha = 0.0;    // torus slope
    double delta = 0.0;    // radial_disk impulse inflation, kept for reporting
    double theta_max = 1.4;  // billiard chart half-width in theta
    LorenzParams lorenz;

    bool is_exact() const {
        return kind == FieldKind::disk_billiard || kind == FieldKind::lorenz_skew;
    }

    bool axis_periodic(int i) const {
        switch (kind) {
            case FieldKind::torus_linear: return i == 0 || i == 1;
            case FieldKind::disk_billiard: return i == 0;  // boundary position
            default: return false;
        }
    }

    bool in_domain(const Vec& x) const {
        constexpr double pad = 1e-6;
        switch (kind) {
            case FieldKind::annulus_rotation: {
                const double r = std::hypot(x[0], x[1]);
                return r >= 1.0 - pad && r <= 2.0 + pad;
            }
            case FieldKind::predator_prey:
                return x[0] >= -pad && x[0] <= 4.0 + pad && x[1] >= -pad && x[1] <= 2.0 + pad;
            case FieldKind::radial_disk:
                return std::hypot(x[0], x[1]) <= 3.0 + pad;
            case FieldKind::torus_linear:
                return true;
            case FieldKind::disk_billiard:
                return std::abs(x[1]) <= theta_max + pad && x[2] >= -pad &&
                       x[2] <= 2.0 * std::cos(x[1]) + pad;
            case FieldKind::lorenz_skew:
                return std::abs(x[0]) <= 1.0 + pad && std::abs(x[0]) > 0.0 &&
                       std::abs(x[1]) <= 1.0 + pad && x[2] >= -pad &&
                       x[2] <= lorenz.total(x[0]) + pad;
        }
        return false;
    }

    Vec eval(const Vec& x) const {
        switch (kind) {
            case FieldKind::annulus_rotation:
                return Vec{-x[1], x[0]};
            case FieldKind::predator_prey:
                return Vec{x[0] * (3.0 - x[0] - x[1]), x[1] * (-1.0 + x[0] - x[1])};
            case FieldKind::radial_disk:
                return Vec{-x[0], -x[1]};
            case FieldKind::torus_linear:
                return Vec{1.0, alpha};
            case FieldKind::disk_billiard:
            case FieldKind::lorenz_skew:
                // Suspension direction; the wrap maps carry the dynamics.
                return Vec{0.0, 0.0, 1.0};
        }
        return Vec(dim);
    }

    Vec eval_checked(const Vec& x) const {
        if (!in_domain(x)) throw DomainError(field_kind_name(kind) + (" point outside phase domain " + format_vec(x)));
        return eval(x);
    }

    // DX, needed by the variational equation.
    Mat jacobian(const Vec& x) const {
        Mat j(dim, dim);
        switch (kind) {
            case FieldKind::annulus_rotation:
                j(0, 1) = -1.0;
                j(1, 0) = 1.0;
                return j;
            case FieldKind::predator_prey:
                j(0, 0) = 3.0 - 2.0 * x[0] - x[1];
                j(0, 1) = -x[0];
                j(1, 0) = x[1];
                j(1, 1) = -1.0 + x[0] - 2.0 * x[1];
                return j;
            case FieldKind::radial_disk:
                j(0, 0) = -1.0;
                j(1, 1) = -1.0;
                return j;
            case FieldKind::torus_linear:
            case FieldKind::disk_billiard:
            case FieldKind::lorenz_skew:
                return j;
        }
        return j;
    }

    // Upper bound on ||X|| over the phase domain.
    double speed_bound() const {
        switch (kind) {
            case FieldKind::annulus_rotation: return 2.0;
            case FieldKind::predator_prey: return 14.0;
            case FieldKind::radial_disk: return 3.0;
            case FieldKind::torus_linear: return std::hypot(1.0, alpha);
            case FieldKind::disk_billiard:
            case FieldKind::lorenz_skew: return 1.0;
        }
        return 1.0;
    }
};

inline SystemField make_field(FieldKind kind, const std::map<std::string, double>& params = {}) {
    SystemField f;
    f.kind = kind;
    f.params = params;
    auto get = [&](const char* name, double dflt) {
        auto it = params.find(name);
        return it == params.end() ? dflt : it->second;
    };
    switch (kind) {
        case FieldKind::annulus_rotation:
        case FieldKind::predator_prey:
            f.dim = 2;
            break;
        case FieldKind::radial_disk:
            f.dim = 2;
            f.delta = get("delta", 0.5);
            break;
        case FieldKind::torus_linear:
            f.dim = 2;
            f.alpha = get("alpha", 0.6180339887498949);
            break;
        case FieldKind::disk_billiard:
            f.dim = 3;
            f.theta_max = get("theta_max", 1.4);
            if (f.theta_max <= 0.0 || f.theta_max >= kPi / 2) throw BadParams("billiard theta_max outside (0, pi/2)");
            break;
        case FieldKind::lorenz_skew: {
            f.dim = 3;
            LorenzParams& lp = f.lorenz;
            lp.a = get("a", 0.8);
            lp.c = get("c", 1.85);
            lp.h0 = get("h0", 0.5);
            lp.h1 = get("h1", 0.2);
            lp.hy = get("hy", 0.25);
            lp.kappa = get("kappa", 0.5);
            lp.t1 = get("t1", 1.0);
            lp.t2 = get("t2", 1.0);
            // Geometric-Lorenz inequalities, checked on a sample of the domain.
            const double sqrt2 = std::sqrt(2.0);
            for (int i = 1; i <= 200; ++i) {
                const double x = double(i) / 200.0;
                if (lp.fprime(x) <= sqrt2) throw BadParams("lorenz quotient map not sqrt(2)-expanding at x=" + std::to_string(x));
                if (std::abs(lp.f(x)) >= 1.0) throw BadParams("lorenz quotient map leaves [-1,1]");
                if (lp.H(x, 1.0) >= 0.0 || lp.H(-x, -1.0) <= 0.0) throw BadParams("lorenz fiber map sign condition fails");
            }
            if (std::abs(lp.hy) >= 1.0 || std::abs(lp.h1) >= 1.0) throw BadParams("lorenz fiber map not contracting");
            if (lp.h0 + lp.h1 + lp.hy >= 1.0) throw BadParams("lorenz fiber map image leaves [-1,1]");
            break;
        }
    }
    return f;
}

// The vector field X of the underlying flow, with the domain check.
inline Vec eval_field(const SystemField& f, const Vec& x) { return f.eval_checked(x); }

}  // namespace impdyn
