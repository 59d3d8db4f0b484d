#include "doctest.h"

#include "test_util.hpp"

using namespace impdyn;
using namespace testutil;

namespace {

std::vector<std::pair<CrossSection, SystemField>> shipped_pairs() {
    std::vector<std::pair<CrossSection, SystemField>> out;
    for (const std::string& name : example_names()) {
        ExampleSpec ex = make_example(name);
        out.push_back({ex.D, ex.field});
        out.push_back({ex.Dhat, ex.field});
    }
    return out;
}

}  // namespace

TEST_CASE("chart_to_ambient at reference points") {
    ExampleSpec ann = make_example("annulus");
    Vec a = chart_to_ambient(ann.D, Vec{1.5});
    CHECK(a[0] == 1.5);
    CHECK(a[1] == 0.0);

    ExampleSpec prey = make_example("predator_prey");
    Vec p = chart_to_ambient(prey.D, Vec{0.7});
    CHECK(p[0] == 1.0);
    CHECK(p[1] == 0.7);

    CrossSection torus = section_torus_circle(0.0, "torus_D");
    Vec t = chart_to_ambient(torus, Vec{0.9});
    CHECK(t[0] == 0.0);
    CHECK(t[1] == doctest::Approx(0.9));
}

TEST_CASE("chart outside the box raises ChartError") {
    ExampleSpec ann = make_example("annulus");
    CHECK_THROWS_AS(chart_to_ambient(ann.D, Vec{2.5}), ChartError);
    CHECK_THROWS_AS(ann.D.boundary_distance(Vec{0.5}), ChartError);
}

TEST_CASE("chart round-trips through chart_inverse on random points") {
    Rng rng(5);
    for (auto& [sec, field] : shipped_pairs()) {
        for (int k = 0; k < 1000; ++k) {
            Vec u(sec.chart_dim);
            for (int i = 0; i < sec.chart_dim; ++i)
                u[i] = rng.uniform(sec.box_lo[i] + 1e-6, sec.box_hi[i] - 1e-6);
            if ((sec.kind == SectionKind::lorenz_base || sec.kind == SectionKind::lorenz_wing) &&
                std::abs(u[0]) < 1e-3)
                continue;
            Vec x = sec.chart(u);
            auto back = sec.chart_inverse(x);
            REQUIRE(back.has_value());
            CHECK(sec.chart_dist(*back, u) < 1e-10);
            CHECK(std::abs(sec.event_g(x)) < 1e-10);  // section sits inside {g = 0}
        }
    }
}

TEST_CASE("transversality margins of the shipped pairs are positive") {
    ExampleSpec ann = make_example("annulus");
    // rotation field crosses the radial segment orthogonally
    CHECK(transversality_margin(ann.D, ann.field) == doctest::Approx(1.0).epsilon(1e-12));

    ExampleSpec disk = make_example("radial_disk");
    CHECK(transversality_margin(disk.D, disk.field) == doctest::Approx(1.0).epsilon(1e-12));

    ExampleSpec prey = make_example("predator_prey");
    CHECK(transversality_margin(prey.D, prey.field) > 0.0);

    for (auto& [sec, field] : shipped_pairs()) CHECK(transversality_margin(sec, field) > 0.0);
}

TEST_CASE("transversality_margin reports a singular field on the section") {
    // vertical line through the interior fixed point (2,1) of the prey field
    CrossSection bad = section_vertical_segment(2.0, 0.5, 1.5, 1e-3, "through_fixed_point");
    auto prey = make_field(FieldKind::predator_prey);
    CHECK_THROWS_AS(transversality_margin(bad, prey), SingularityError);
}

TEST_CASE("boundary_distance") {
    ExampleSpec ann = make_example("annulus");
    CHECK(ann.D.boundary_distance(Vec{1.25}) == doctest::Approx(0.25));

    CrossSection circ = section_circle(1.0, "c");
    CHECK(circ.boundary_distance(Vec{0.3}) == kInf);  // boundaryless chart

    ExampleSpec bil = make_example("disk_billiard");
    const Vec mid{0.4, 0.0};
    // half the smaller chart half-width: the arc is the narrow direction
    CHECK(bil.D.boundary_distance(mid) == doctest::Approx(0.1));
}

TEST_CASE("chart metric wraps on periodic charts") {
    CrossSection circ = section_circle(1.5, "c");
    CHECK(circ.chart_dist(Vec{0.1}, Vec{kTwoPi - 0.1}) == doctest::Approx(0.2));
    ExampleSpec ann = make_example("annulus");
    CHECK(ann.D.chart_dist(Vec{1.2}, Vec{1.5}) == doctest::Approx(0.3));
}
