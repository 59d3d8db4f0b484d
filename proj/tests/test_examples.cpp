#include "doctest.h"

#include "test_util.hpp"

using namespace impdyn;
using namespace testutil;

TEST_CASE("make_example knows exactly the shipped systems") {
    for (const std::string& name : example_names()) {
        ExampleSpec ex = make_example(name);
        CHECK(ex.name == name);
        CHECK_FALSE(ex.facts.empty());
    }
    CHECK_THROWS_AS(make_example("lorenz"), UnknownExample);
    CHECK_THROWS_AS(expected_facts("anything"), UnknownExample);
    CHECK_THROWS_AS(make_example("radial_disk", {{"delta", 5.0}}), BadParams);
}

TEST_CASE("validation verdicts across the catalogue") {
    for (const std::string& name : example_names()) {
        ExampleSpec ex = make_example(name);
        ImpulsiveSystem sys = make_impulsive_system(ex.field, ex.D, ex.Dhat, ex.impulse, ex.opts,
                                                    !ex.valid);
        CAPTURE(name);
        CHECK(sys.validation.verdict == ex.valid);
    }
    // degenerate variants are constructible only with the override
    ExampleSpec flat = make_example("radial_disk", {{"delta", 0.0}});
    CHECK_FALSE(flat.valid);
    CHECK_THROWS_AS(
        make_impulsive_system(flat.field, flat.D, flat.Dhat, flat.impulse, flat.opts, false),
        ConstructionError);
}

TEST_CASE("facts carry their provenance and hold numerically") {
    // annulus: closed forms
    {
        auto sys = make_example_system("annulus");
        auto facts = expected_facts("annulus");
        PeriodicSearch s = find_periodic(sys, Vec{1.3}, 1);
        REQUIRE(s.status == SolveStatus::ok);
        for (const Fact& f : facts) {
            if (f.name == "fixed_radius")
                CHECK(std::abs(s.orbit.points[0][0] - f.value) < f.tolerance);
            if (f.name == "orbit_period") CHECK(std::abs(s.orbit.period - f.value) < f.tolerance);
            if (f.name == "multiplier")
                CHECK(std::abs(std::abs(s.orbit.multipliers[0]) - f.value) < f.tolerance);
            if (f.name == "section_gap")
                CHECK(std::abs(sys.validation.hausdorff_gap - f.value) < f.tolerance);
        }
    }
    // predator-prey: quadrature oracles
    {
        auto facts = expected_facts("predator_prey");
        for (const Fact& f : facts) {
            if (f.name == "segment_period") {
                CHECK(std::abs(f.value - prey_period_oracle()) < 1e-9);
                CHECK(f.provenance == Provenance::derived);
            }
            if (f.name == "interior_fixed_x") CHECK(f.provenance == Provenance::cited);
        }
    }
    // billiard arithmetic
    {
        auto facts = expected_facts("disk_billiard");
        for (const Fact& f : facts) {
            if (f.name == "flight_pi4") CHECK(f.value == doctest::Approx(std::sqrt(2.0)));
            if (f.name == "pure_orbit_period_pi4")
                CHECK(f.value == doctest::Approx(4.0 * std::sqrt(2.0)));
            if (f.name == "impulsive_cycle_period_pi4")
                CHECK(f.value == doctest::Approx(3.0 * std::sqrt(2.0)));
        }
    }
}

TEST_CASE("lorenz skew model satisfies the stated inequalities") {
    ExampleSpec ex = make_example("lorenz_skew");
    const LorenzParams& lp = ex.field.lorenz;
    const double sqrt2 = std::sqrt(2.0);
    Rng rng(31);
    for (int k = 0; k < 500; ++k) {
        const double x = rng.uniform(-1.0, 1.0);
        if (std::abs(x) < 1e-6) continue;
        const double y = rng.uniform(-1.0, 1.0);
        CHECK(lp.fprime(x) > sqrt2);
        CHECK(std::abs(lp.f(x)) < 1.0);
        CHECK(std::abs(lp.H(x, y)) < 1.0);
        if (x > 0) CHECK(lp.H(x, y) < 0.0);
        if (x < 0) CHECK(lp.H(x, y) > 0.0);
        CHECK(std::abs(lp.Hy()) < 1.0);
        CHECK(std::abs(lp.Hx()) < 1.0);
    }
    // bad parameter families are rejected at construction
    CHECK_THROWS_AS(make_field(FieldKind::lorenz_skew, {{"a", 0.5}}), BadParams);
    CHECK_THROWS_AS(make_field(FieldKind::lorenz_skew, {{"hy", 1.2}}), BadParams);
}

TEST_CASE("torus default rotation stays clear of low resonances") {
    ExampleSpec ex = make_example("torus_linear");
    double rho = 0.0;
    for (const Fact& f : ex.facts)
        if (f.name == "return_rotation") rho = f.value;
    REQUIRE(rho > 0.0);
    const double xi = rho / kTwoPi;
    // tuned near 1/7 with a small positive drift
    CHECK(std::abs(xi - 1.0 / 7.0) > 1e-6);
    CHECK(std::abs(xi - 1.0 / 7.0) < 1e-4);
}

TEST_CASE("lorenz orientation dichotomy as shipped facts") {
    auto correct = make_example_system("lorenz_skew");
    CHECK(correct.validation.verdict);
    CHECK(correct.validation.tau1_finite);
    CHECK(correct.validation.tau1_sup_bound < 1e-8);

    auto swapped = make_lorenz_interchanged();
    CHECK_FALSE(swapped.validation.verdict);
    CHECK_FALSE(swapped.validation.tau1_finite);
}
