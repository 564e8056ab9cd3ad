#include <doctest.h>

#include <cmath>
#include <random>

#include "hrma/convex_analysis.hpp"
#include "oracles.hpp"

using namespace hrma;

namespace {

ScalarFieldOnP segment_bump(std::shared_ptr<const DelzantPolytope> P, double scale) {
    // scale * y(1-y)
    return polynomial_field(P, {{scale, {1}}, {-scale, {2}}});
}

}  // namespace

TEST_CASE("legendre of the Guillemin potential on the segment") {
    auto P = make_polytope_preset("segment");
    ScalarFieldOnP uG = guillemin_field(P);

    MaximizerSet m = legendre_on_polytope(uG, vec1(0.0));
    // closed form sup = log(1 + e^x)
    CHECK(m.value == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    REQUIRE(m.points.size() == 1);
    CHECK(m.points[0][0] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(m.diameter == 0.0);

    // cross-check against the dense-scan oracle at a few x
    for (double x : {-3.0, -0.7, 1.3, 4.0}) {
        double direct = kahler_potential(uG, vec1(x));
        CHECK(direct == doctest::Approx(std::log1p(std::exp(x))).epsilon(1e-12));
        CHECK(direct ==
              doctest::Approx(oracles::conjugate_segment(oracles::guillemin_segment, x))
                  .epsilon(1e-10));
    }
}

TEST_CASE("legendre support function of a linear field") {
    auto P = make_polytope_preset("segment");
    ScalarFieldOnP lin = affine_field(P, vec1(0.2), 0.0);
    MaximizerSet m = legendre_on_polytope(lin, vec1(1.0));
    CHECK(m.value == doctest::Approx(0.8).epsilon(1e-12));
    REQUIRE(m.points.size() == 1);
    CHECK(m.points[0][0] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("flagship tie: two maximizers beyond the convex lifespan") {
    auto P = make_polytope_preset("segment");
    ScalarFieldOnP g = field_sum(guillemin_field(P), segment_bump(P, 3.0));
    MaximizerSet m = legendre_on_polytope(g, vec1(0.0));
    // frozen from the dense-scan oracle (10^5 grid + golden refinement):
    // maximizers 0.0707201816799448 and 0.9292798183200552
    REQUIRE(m.points.size() == 2);
    CHECK(m.value == doctest::Approx(0.0583413494414400).epsilon(1e-10));
    CHECK(m.points[0][0] == doctest::Approx(0.0707201816799448).epsilon(1e-7));
    CHECK(m.points[1][0] == doctest::Approx(0.9292798183200552).epsilon(1e-7));
    CHECK(m.diameter == doctest::Approx(0.8585596366401104).epsilon(1e-7));

    double oracle = oracles::conjugate_segment(
        [](double y) { return oracles::guillemin_segment(y) + 3 * y * (1 - y); }, 0.0);
    CHECK(m.value == doctest::Approx(oracle).epsilon(1e-10));
}

TEST_CASE("kahler potential closed forms") {
    auto P = make_polytope_preset("segment");
    ScalarFieldOnP uG = guillemin_field(P);
    CHECK(kahler_potential(uG, vec1(2.0)) ==
          doctest::Approx(2.1269280110429725).epsilon(1e-12));
    CHECK(kahler_potential(uG, vec1(0.0)) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

    // self-dual quadratic in the interior regime of a large box
    auto box = make_polytope("{\"normals\": [[1],[-1]], \"offsets\": [-4,-4]}");
    ScalarFieldOnP q = polynomial_field(box, {{0.5, {2}}});
    CHECK(kahler_potential(q, vec1(0.3)) == doctest::Approx(0.045).epsilon(1e-10));
}

TEST_CASE("dual gradient check") {
    auto P = make_polytope_preset("segment");
    ScalarFieldOnP uG = guillemin_field(P);
    // grad psi(x) = e^x / (1 + e^x); x* = grad u(y) = log(y / (1-y))
    CHECK(dual_gradient_check(uG, vec1(0.5)) <= 1e-6);
    CHECK(dual_gradient_check(uG, vec1(0.9)) <= 1e-6);

    auto box = make_polytope("{\"normals\": [[1],[-1]], \"offsets\": [-4,-4]}");
    ScalarFieldOnP q = polynomial_field(box, {{0.5, {2}}});
    CHECK(dual_gradient_check(q, vec1(0.7)) <= 1e-8);
}

TEST_CASE("min hessian eigenvalue") {
    auto P = make_polytope_preset("segment");
    ScalarFieldOnP uG = guillemin_field(P);
    CHECK(min_hessian_eigenvalue(uG, vec1(0.5)) == doctest::Approx(4.0).epsilon(1e-13));

    ScalarFieldOnP us = field_sum(uG, segment_bump(P, 2.0));
    CHECK(min_hessian_eigenvalue(us, vec1(0.5)) == doctest::Approx(0.0).epsilon(1e-12));

    auto box = make_polytope_preset("square");
    ScalarFieldOnP q = polynomial_field(box, {{0.5, {2, 0}}, {1.5, {0, 2}}});
    CHECK(min_hessian_eigenvalue(q, vec2(0.4, 0.6)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("convex lifespan of the flagship data") {
    auto P = make_polytope_preset("segment");
    ScalarFieldOnP u0 = guillemin_field(P);
    ScalarFieldOnP bump = segment_bump(P, 1.0);

    Vec ystar;
    double T = convex_lifespan(u0, bump, {}, &ystar);
    CHECK(T == doctest::Approx(2.0).epsilon(1e-3));
    CHECK(ystar[0] == doctest::Approx(0.5).epsilon(1e-3));

    // affine velocity: zero hessian
    CHECK(std::isinf(convex_lifespan(u0, affine_field(P, vec1(0.7), 0.1))));
    // convex velocity -y(1-y)
    CHECK(std::isinf(convex_lifespan(u0, segment_bump(P, -1.0))));
    // zero velocity
    CHECK(std::isinf(convex_lifespan(u0, constant_field(P, 0.0))));
}

TEST_CASE("convex lifespan invariances") {
    auto P = make_polytope_preset("segment");
    ScalarFieldOnP u0 = guillemin_field(P);
    ScalarFieldOnP bump = segment_bump(P, 1.0);
    double T = convex_lifespan(u0, bump);

    // adding an affine part to the velocity leaves T unchanged
    ScalarFieldOnP shifted = field_sum(bump, affine_field(P, vec1(1.3), -0.4));
    CHECK(convex_lifespan(u0, shifted) == doctest::Approx(T).epsilon(1e-12));

    // scaling the velocity by c > 0 divides T by c
    for (double c : {2.0, 0.25}) {
        CHECK(convex_lifespan(u0, field_scale(c, bump)) ==
              doctest::Approx(T / c).epsilon(1e-12));
    }
}

TEST_CASE("convex lifespan precondition") {
    auto P = make_polytope_preset("segment");
    // concave u0 fails the strict convexity precondition
    ScalarFieldOnP bad = polynomial_field(P, {{-1.0, {2}}});
    CHECK_THROWS_AS(convex_lifespan(bad, constant_field(P, 0.0)), std::invalid_argument);
}

TEST_CASE("involution: double conjugation returns the field") {
    LegendreOptions fast;
    fast.coarse_per_dim = 96;

    auto P = make_polytope_preset("segment");
    ScalarFieldOnP uG = guillemin_field(P);
    auto box = make_polytope("{\"normals\": [[1],[-1]], \"offsets\": [-8,-8]}");
    ScalarFieldOnP psi = conjugate_field(uG, box, fast);

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uni(0.1, 0.9);
    for (int k = 0; k < 12; ++k) {
        Vec y = vec1(uni(rng));
        double twice = legendre_on_polytope(psi, y, fast).value;
        CHECK(std::abs(twice - uG.value(y)) <= 1e-6);
    }
}

TEST_CASE("legendre value is convex in x and obeys Fenchel-Young") {
    auto P = make_polytope_preset("segment");
    ScalarFieldOnP g = field_sum(guillemin_field(P), segment_bump(P, 3.0));
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ux(-4.0, 4.0), ut(0.0, 1.0), uy(1e-3, 1.0 - 1e-3);
    for (int k = 0; k < 20; ++k) {
        double x1 = ux(rng), x2 = ux(rng), t = ut(rng);
        double v1 = kahler_potential(g, vec1(x1));
        double v2 = kahler_potential(g, vec1(x2));
        double vm = kahler_potential(g, vec1(t * x1 + (1 - t) * x2));
        CHECK(vm <= t * v1 + (1 - t) * v2 + 1e-9);

        double x = ux(rng), y = uy(rng);
        double value = kahler_potential(g, vec1(x));
        CHECK(x * y <= g.value(vec1(y)) + value + 1e-10);
    }
}

TEST_CASE("interior grid respects the collar") {
    auto P = make_polytope_preset("segment");
    for (const Vec& y : interior_grid(*P, 64, 0.1)) {
        CHECK(P->boundary_distance(y) > 0.1);
    }
    CHECK(interior_grid(*P, 64, 0.0).size() == 64);
}

TEST_CASE("explicit tie tolerance widens the maximizer set") {
    auto P = make_polytope_preset("segment");
    // two local maxima with a small value gap at x slightly off the kink
    ScalarFieldOnP g = field_sum(guillemin_field(P), segment_bump(P, 3.0));
    Vec x = vec1(0.001);
    MaximizerSet tight = legendre_on_polytope(g, x);
    CHECK(tight.points.size() == 1);
    // the secondary branch sits within ~ |x| * diameter of the best value
    MaximizerSet loose = legendre_on_polytope(g, x, 1e-2);
    CHECK(loose.points.size() == 2);
    CHECK(loose.value == tight.value);
}
