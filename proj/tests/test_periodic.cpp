#include "doctest.h"

#include "test_util.hpp"

using namespace impdyn;
using namespace testutil;

TEST_CASE("annulus fixed point of the radius map") {
    auto sys = make_example_system("annulus");
    PeriodicSearch s = find_periodic(sys, Vec{1.35}, 1);
    REQUIRE(s.status == SolveStatus::ok);
    CHECK(s.orbit.points[0][0] == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(s.orbit.period == doctest::Approx(kPi).epsilon(1e-8));
    CHECK(std::abs(s.orbit.multipliers[0]) == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(s.orbit.tag == OrbitTag::hyperbolic);
}

TEST_CASE("predator-prey axis cycle against the quadrature oracles") {
    auto sys = make_example_system("predator_prey");
    PeriodicSearch s = find_periodic(sys, Vec{0.2}, 1);
    REQUIRE(s.status == SolveStatus::ok);
    CHECK(s.orbit.points[0][0] == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(s.orbit.period == doctest::Approx(prey_period_oracle()).epsilon(1e-8));
    const double mult = std::abs(s.orbit.multipliers[0]);
    CHECK(mult == doctest::Approx(prey_multiplier_oracle()).epsilon(1e-5));
    CHECK(mult < 0.5);
    CHECK(s.orbit.tag == OrbitTag::hyperbolic);
}

TEST_CASE("radial disk carries a continuum of neutral fixed points") {
    auto sys = make_example_system("radial_disk");
    PeriodicSearch s = find_periodic(sys, Vec{2.4}, 1);
    REQUIRE(s.status == SolveStatus::ok);
    CHECK(sys.Dhat.chart_dist(s.orbit.points[0], Vec{2.4}) < 1e-10);
    CHECK(std::abs(s.orbit.multipliers[0]) == doctest::Approx(1.0));
    CHECK(s.orbit.tag == OrbitTag::non_hyperbolic);
    CHECK(s.orbit.period == doctest::Approx(std::log(1.5)).epsilon(1e-9));
}

TEST_CASE("billiard rational fiber: unit multipliers on the impulsive cycle") {
    auto sys = make_example_system("disk_billiard");
    Vec seed{kPi / 2 + 0.4, kPi / 4};
    PeriodicSearch s = find_periodic(sys, seed, 1);
    REQUIRE(s.status == SolveStatus::ok);
    CHECK(s.orbit.period == doctest::Approx(6.0 * std::cos(kPi / 4)).epsilon(1e-10));
    for (const auto& m : s.orbit.multipliers) CHECK(std::abs(m) == doctest::Approx(1.0));
    CHECK(s.orbit.tag == OrbitTag::non_hyperbolic);
}

TEST_CASE("monodromy matches finite differences of the return map") {
    // the saddle 2-cycle sits in the chart interior, where a central stencil
    // of P^2 is well posed
    auto sys = make_example_system("lorenz_skew");
    PeriodicSearch s = find_periodic(sys, Vec{0.3, 0.45}, 2);
    REQUIRE(s.status == SolveStatus::ok);
    Mat fd = fd_jacobian(
        [&](const Vec& u) {
            PoincareResult r1 = poincare(sys, u);
            REQUIRE(r1.status == HitStatus::ok);
            PoincareResult r2 = poincare(sys, r1.value);
            REQUIRE(r2.status == HitStatus::ok);
            return r2.value;
        },
        s.orbit.points[0], 1e-6);
    CHECK(max_abs_diff(s.orbit.monodromy, fd) < 1e-4);
}

TEST_CASE("multiplier spectrum is invariant under cyclic re-basing") {
    // symmetric saddle 2-cycle of the skew-product section map
    auto sys = make_example_system("lorenz_skew");
    PeriodicSearch s1 = find_periodic(sys, Vec{0.3, 0.45}, 2);
    REQUIRE(s1.status == SolveStatus::ok);
    REQUIRE(sys.Dhat.chart_dist(s1.orbit.points[0], s1.orbit.points[1]) > 0.5);
    PeriodicSearch s2 = find_periodic(sys, s1.orbit.points[1], 2);
    REQUIRE(s2.status == SolveStatus::ok);
    int n1 = 0, n2 = 0;
    auto e1 = eigenvalues2(s1.orbit.monodromy, &n1);
    auto e2 = eigenvalues2(s2.orbit.monodromy, &n2);
    REQUIRE(n1 == n2);
    // similar matrices: the spectra agree up to ordering
    for (int i = 0; i < n1; ++i) {
        double best = kInf;
        for (int j = 0; j < n2; ++j) best = std::min(best, std::abs(e1[i] - e2[j]));
        CHECK(best < 1e-8);
    }
    CHECK(s1.orbit.tag == OrbitTag::hyperbolic);
}

TEST_CASE("classification boundary") {
    std::vector<std::complex<double>> on_circle{{1.0, 0.0}};
    CHECK(classify(on_circle, 1e-6) == OrbitTag::non_hyperbolic);
    std::vector<std::complex<double>> off{{0.5, 0.0}, {2.0, 0.0}};
    CHECK(classify(off, 1e-6) == OrbitTag::hyperbolic);
    std::vector<std::complex<double>> just_off{{1.0 + 2e-6, 0.0}};
    CHECK(classify(just_off, 1e-6) == OrbitTag::hyperbolic);
}

TEST_CASE("continue_orbit under the identity perturbation returns the same orbit") {
    auto sys = make_example_system("annulus");
    PeriodicSearch s = find_periodic(sys, Vec{1.2}, 1);
    REQUIRE(s.status == SolveStatus::ok);
    ContinuationResult c = continue_orbit(sys, s.orbit, sys.impulse, 0.1);
    REQUIRE(c.ok);
    CHECK(sys.Dhat.chart_dist(c.orbit.points[0], s.orbit.points[0]) < 1e-10);
    CHECK(std::abs(c.orbit.period - s.orbit.period) < 1e-10);
}

TEST_CASE("continue_orbit follows a base-slope perturbation") {
    auto sys = make_example_system("annulus");
    PeriodicSearch s = find_periodic(sys, Vec{1.1}, 1);
    REQUIRE(s.status == SolveStatus::ok);
    Impulse J = make_affine_impulse("annulus_D", "annulus_Dhat", 1, Vec{0.5}, Vec{0.51});
    ContinuationResult c = continue_orbit(sys, s.orbit, J, 0.05);
    REQUIRE(c.ok);
    // new fixed radius solves rho = 0.5 + 0.51 rho
    CHECK(c.orbit.points[0][0] == doctest::Approx(0.5 / 0.49).epsilon(1e-8));
    CHECK(std::abs(c.orbit.multipliers[0]) == doctest::Approx(0.51).epsilon(1e-8));
    CHECK(c.orbit.period == doctest::Approx(kPi).epsilon(1e-8));
}

TEST_CASE("continue_orbit reports the failing segment") {
    auto sys = make_example_system("annulus");
    PeriodicSearch s = find_periodic(sys, Vec{1.1}, 1);
    REQUIRE(s.status == SolveStatus::ok);
    // push the image outside the landing chart: the crossing is lost
    Impulse J = make_affine_impulse("annulus_D", "annulus_Dhat", 1, Vec{-0.6}, Vec{0.5});
    ContinuationResult c = continue_orbit(sys, s.orbit, J, 0.1);
    CHECK_FALSE(c.ok);
    CHECK(c.failed_segment == 0);
}

TEST_CASE("make_hyperbolic pushes the radial multiplier off the unit circle") {
    auto sys = make_example_system("radial_disk");
    PeriodicSearch s = find_periodic(sys, Vec{1.0}, 1);
    REQUIRE(s.status == SolveStatus::ok);
    REQUIRE(s.orbit.tag == OrbitTag::non_hyperbolic);
    HyperbolizationResult h = make_hyperbolic(sys, s.orbit, 0.1);
    REQUIRE(h.ok);
    CHECK(h.orbit.tag == OrbitTag::hyperbolic);
    CHECK(sys.Dhat.chart_dist(h.orbit.points[0], s.orbit.points[0]) < 1e-9);
    CHECK(std::abs(h.orbit.multipliers[0]) > 1.0 + 1e-6);
    CHECK(c1_distance(sys.impulse, h.impulse, sys.D) <= 0.1 + 1e-12);

    // points outside the bump support remain neutral fixed points
    ImpulsiveSystem pert = sys;
    pert.impulse = h.impulse;
    PeriodicSearch far = find_periodic(pert, Vec{4.0}, 1);
    REQUIRE(far.status == SolveStatus::ok);
    CHECK(far.orbit.tag == OrbitTag::non_hyperbolic);
}

TEST_CASE("make_hyperbolic scales both billiard multipliers") {
    auto sys = make_example_system("disk_billiard");
    PeriodicSearch s = find_periodic(sys, Vec{kPi / 2 + 0.4, kPi / 4}, 1);
    REQUIRE(s.status == SolveStatus::ok);
    REQUIRE(s.orbit.tag == OrbitTag::non_hyperbolic);
    HyperbolizationResult h = make_hyperbolic(sys, s.orbit, 0.05);
    REQUIRE(h.ok);
    CHECK(h.orbit.tag == OrbitTag::hyperbolic);
    for (const auto& m : h.orbit.multipliers) CHECK(std::abs(std::abs(m) - 1.0) > 1e-6);
}

TEST_CASE("make_hyperbolic returns an already-hyperbolic orbit unchanged") {
    auto sys = make_example_system("annulus");
    PeriodicSearch s = find_periodic(sys, Vec{1.2}, 1);
    REQUIRE(s.status == SolveStatus::ok);
    HyperbolizationResult h = make_hyperbolic(sys, s.orbit, 0.1);
    REQUIRE(h.ok);
    CHECK(h.impulse.bumps.empty());
}

TEST_CASE("audit_kupka_smale verdicts") {
    auto ann = make_example_system("annulus");
    AuditReport a = audit_kupka_smale(ann, 2.0 * kPi + 0.5, 0.0, 12);
    CHECK(a.orbits.size() == 1);
    CHECK(a.all_hyperbolic);

    auto disk = make_example_system("radial_disk");
    AuditReport d = audit_kupka_smale(disk, 1.0, 0.0, 12);
    CHECK(d.orbits.size() >= 10);  // continuum detected as many neutral orbits
    CHECK_FALSE(d.all_hyperbolic);

    // irrational-fiber seeds: the billiard search finds nothing, vacuous pass
    auto bil = make_example_system("disk_billiard");
    AuditReport b = audit_kupka_smale(bil, 3.0, 1e-3, 3);
    CHECK(b.all_hyperbolic);
    CHECK(b.orbits.empty());
}
