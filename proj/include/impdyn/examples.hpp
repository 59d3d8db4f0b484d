#pragma once

#include "impdyn/connect.hpp"

namespace impdyn {

enum class Provenance { cited, derived, trivial };

inline const char* provenance_name(Provenance p) {
    switch (p) {
        case Provenance::cited: return "cited";
        case Provenance::derived: return "derived";
        case Provenance::trivial: return "trivial";
    }
    return "?";
}

struct Fact {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    Provenance provenance = Provenance::derived;
    std::string note;
};

struct ExampleSpec {
    std::string name;
    SystemField field;
    CrossSection D;
    CrossSection Dhat;
    Impulse impulse;
    SemiflowOpts opts;
    bool valid = true;  // false for deliberately inadmissible demos
    std::vector<Fact> facts;
};

inline std::vector<std::string> example_names() {
    return {"annulus", "predator_prey", "radial_disk", "torus_linear", "disk_billiard",
            "lorenz_skew"};
}

// Torus return rotation is tuned near 1/7 of a turn with a small irrational
// drift; the crawl structure keeps closing-bump supports clear of earlier
// orbit points at modest C1 budgets.
inline double torus_default_alpha(double x0 = 1.0, double beta = 0.5) {
    return (kTwoPi / 7.0 + 2e-4 - beta) / (kTwoPi - x0);
}

inline ExampleSpec make_example(const std::string& name,
                                const std::map<std::string, double>& params = {}) {
    auto get = [&](const char* key, double dflt) {
        auto it = params.find(key);
        return it == params.end() ? dflt : it->second;
    };
    ExampleSpec ex;
    ex.name = name;
    if (name == "annulus") {
        // Unit-speed rotation on the annulus; the impulse averages the radius
        // with 1, contracting onto the circle r = 1.
        ex.field = make_field(FieldKind::annulus_rotation);
        // The recurrent orbit sits on the chart edge r = 1, so these sections
        // ship with a zero boundary margin.
        ex.D = section_axis_segment(true, 1.0, 2.0, 0.0, "annulus_D");
        ex.Dhat = section_axis_segment(false, 1.0, 1.6, 0.0, "annulus_Dhat");
        ex.impulse = make_affine_impulse("annulus_D", "annulus_Dhat", 1,
                                         Vec{get("offset", 0.5)}, Vec{get("slope", 0.5)});
        ex.facts = {
            {"fixed_radius", 1.0, 1e-8, Provenance::derived, "fixed point of r -> (1+r)/2"},
            {"orbit_period", kPi, 1e-8, Provenance::derived, "half turn at unit angular speed"},
            {"multiplier", 0.5, 1e-8, Provenance::derived, "slope of the radius map"},
            {"section_gap", 2.0, 1e-6, Provenance::derived,
             "ambient distance between the image segment and the impulsive segment"},
            {"tau1_sup", 0.0, 1e-8, Provenance::derived, "flight time is identically pi"},
            {"omega_arc_lo", kPi, 1e-6, Provenance::derived,
             "recurrent arc spans angles [pi, 2pi] at radius 1"},
        };
    } else if (name == "predator_prey") {
        ex.field = make_field(FieldKind::predator_prey);
        ex.D = section_vertical_segment(1.0, 0.0, 2.0, 0.0, "prey_D");
        ex.Dhat = section_vertical_segment(0.5, 0.0, 2.0, 0.0, "prey_Dhat");
        ex.impulse = make_affine_impulse("prey_D", "prey_Dhat", 1, Vec{0.0}, Vec{0.5});
        const double period = std::log(2.5) / 3.0;  // quadrature-confirmed closed form
        ex.facts = {
            {"interior_fixed_x", 2.0, 0.0, Provenance::cited, "field vanishes at (2,1) exactly"},
            {"interior_fixed_y", 1.0, 0.0, Provenance::cited, ""},
            {"segment_period", period, 1e-9, Provenance::derived,
             "(1/3) ln(x/(3-x)) evaluated between 1/2 and 1"},
            {"segment_multiplier_max", 0.5, 0.0, Provenance::derived,
             "multiplier (1/2) exp(int (x-1) dt) stays below 1/2"},
        };
    } else if (name == "radial_disk") {
        const double delta = get("delta", 0.5);
        if (delta < 0 || delta > 2.0) throw BadParams("radial_disk delta outside [0, 2]");
        std::map<std::string, double> p{{"delta", delta}};
        ex.field = make_field(FieldKind::radial_disk, p);
        // orbits contract like e^{-t}: anything that has not hit the unit
        // circle by t = 60 never will
        ex.opts.t_max = 60.0;
        ex.D = section_circle(1.0, "disk_D");
        ex.Dhat = section_circle(1.0 + delta, "disk_Dhat");
        ex.impulse = make_affine_impulse("disk_D", "disk_Dhat", 1, Vec{0.0}, Vec{1.0}, true);
        ex.valid = delta > 0;
        ex.facts = {
            {"tau1", std::log(1.0 + delta), 1e-9, Provenance::derived, "r(t) = (1+delta) e^{-t}"},
            {"section_gap", delta, 1e-6, Provenance::derived, "distance between the circles"},
            {"omega_explosion_lower", 1.0, 0.0, Provenance::cited,
             "coordinate computation of the recurrent-set jump gives 1+delta"},
        };
    } else if (name == "torus_linear") {
        const double x0 = get("x0", 1.0);
        const double beta = get("beta", 0.5);
        const double alpha = get("alpha", torus_default_alpha(x0, beta));
        std::map<std::string, double> p{{"alpha", alpha}};
        ex.field = make_field(FieldKind::torus_linear, p);
        ex.opts.integrator.step = 0.05;  // constant field, RK4 is exact per step
        ex.D = section_torus_circle(0.0, "torus_D");
        ex.Dhat = section_torus_circle(x0, "torus_Dhat");
        ex.impulse = make_affine_impulse("torus_D", "torus_Dhat", 1, Vec{beta}, Vec{1.0}, true);
        ex.facts = {
            {"tau1", kTwoPi - x0, 1e-9, Provenance::derived, "constant flight at unit x-speed"},
            {"return_rotation", wrap_angle(alpha * (kTwoPi - x0) + beta), 1e-9,
             Provenance::derived, "rigid rotation of the landing circle"},
            {"wandering_band_lo", 0.0, 0.0, Provenance::cited,
             "open cylinder between D and I(D) is wandering"},
            {"wandering_band_hi", x0, 0.0, Provenance::cited, ""},
        };
    } else if (name == "disk_billiard") {
        const double theta_max = get("theta_max", 1.4);
        std::map<std::string, double> p{{"theta_max", theta_max}};
        ex.field = make_field(FieldKind::disk_billiard, p);
        // Landing arc = impulsive arc rotated by pi/2, so theta = pi/4 fibers
        // close after three chords: x + 3(pi - pi/2) + pi/2 = x + 2 pi.
        const double lo = get("arc_lo", 0.3), hi = get("arc_hi", 0.5);
        ex.D = section_billiard_arc(lo, hi, theta_max, 1e-3, "billiard_D");
        ex.Dhat = section_billiard_arc(lo + kPi / 2, hi + kPi / 2, theta_max, 1e-3, "billiard_Dhat");
        ex.impulse = make_affine_impulse("billiard_D", "billiard_Dhat", 2, Vec{kPi / 2, 0.0},
                                         Vec{1.0, 1.0});
        ex.facts = {
            {"flight_pi4", 2.0 * std::cos(kPi / 4), 1e-12, Provenance::cited,
             "chord length at incidence pi/4"},
            {"pure_orbit_period_pi4", 8.0 * std::cos(kPi / 4), 1e-9, Provenance::cited,
             "four chords close the free orbit at theta = pi/4"},
            {"impulsive_cycle_period_pi4", 6.0 * std::cos(kPi / 4), 1e-9, Provenance::derived,
             "three chords plus the quarter-turn impulse close a cycle"},
            {"tau1_x_derivative_sup", 0.0, 1e-8, Provenance::cited,
             "hitting time is locally constant along each fiber"},
        };
    } else if (name == "lorenz_skew") {
        std::map<std::string, double> p;
        for (const char* k : {"a", "c", "h0", "h1", "hy", "kappa", "t1", "t2"})
            if (params.count(k)) p[k] = params.at(k);
        ex.field = make_field(FieldKind::lorenz_skew, p);
        ex.D = section_lorenz(false, ex.field.lorenz, 1e-3, "lorenz_D");
        ex.Dhat = section_lorenz(true, ex.field.lorenz, 1e-3, "lorenz_Dhat");
        ex.impulse = make_affine_impulse("lorenz_D", "lorenz_Dhat", 2, Vec{0.0, 0.0}, Vec{1.0, 1.0});
        ex.facts = {
            {"quotient_expansion_min", std::sqrt(2.0), 0.0, Provenance::cited,
             "f' > sqrt(2) on the sampled domain"},
            {"fiber_contraction_max", 1.0, 0.0, Provenance::cited, "|dH/dy| < 1"},
            {"tau1_sup_correct", 0.0, 1e-8, Provenance::derived,
             "wing-to-base flight time is constant"},
            {"tau1_sup_interchanged_infinite", 1.0, 0.0, Provenance::cited,
             "sections cannot be interchanged"},
        };
    } else {
        throw UnknownExample("unknown example '" + name + "'");
    }
    return ex;
}

inline std::vector<Fact> expected_facts(const std::string& name) { return make_example(name).facts; }

inline ImpulsiveSystem make_example_system(const std::string& name,
                                           const std::map<std::string, double>& params = {},
                                           bool allow_invalid = false) {
    ExampleSpec ex = make_example(name, params);
    return make_impulsive_system(ex.field, ex.D, ex.Dhat, ex.impulse, ex.opts,
                                 allow_invalid || !ex.valid);
}

// The interchanged-section variant of the Lorenz model; its tau1 derivative
// sup is infinite, so validation must fail.
inline ImpulsiveSystem make_lorenz_interchanged(const std::map<std::string, double>& params = {}) {
    ExampleSpec ex = make_example("lorenz_skew", params);
    CrossSection D = ex.Dhat;   // wing becomes the impulsive region
    CrossSection Dhat = ex.D;   // base becomes the landing region
    Impulse I = make_affine_impulse(D.name, Dhat.name, 2, Vec{0.0, 0.0}, Vec{1.0, 1.0});
    return make_impulsive_system(ex.field, D, Dhat, I, ex.opts, /*allow_invalid=*/true);
}

}  // namespace impdyn
