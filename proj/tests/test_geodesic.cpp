#include <doctest.h>

#include <cmath>
#include <random>

#include "hrma/geodesic.hpp"
#include "hrma/numerics.hpp"
#include "oracles.hpp"

using namespace hrma;

namespace {

ProblemData flagship() {
    auto P = make_polytope_preset("segment");
    return make_problem(P, guillemin_field(P),
                        polynomial_field(P, {{1.0, {1}}, {-1.0, {2}}}));
}

ProblemData linear_ray(double a, double b) {
    auto P = make_polytope_preset("segment");
    return make_problem(P, guillemin_field(P), affine_field(P, vec1(a), b));
}

}  // namespace

TEST_CASE("velocity from metric-side data is a sign flip") {
    ProblemData prob = flagship();
    ScalarFieldOnP phidot = constant_field(prob.polytope, 2.5);
    ScalarFieldOnP v = velocity_from_kahler_data(prob, phidot);
    CHECK(v.value(vec1(0.3)) == doctest::Approx(-2.5));

    ScalarFieldOnP bump_down = polynomial_field(prob.polytope, {{-1.0, {1}}, {1.0, {2}}});
    ScalarFieldOnP flipped = velocity_from_kahler_data(prob, bump_down);
    CHECK(flipped.value(vec1(0.25)) == doctest::Approx(0.25 * 0.75).epsilon(1e-14));

    ScalarFieldOnP lin = affine_field(prob.polytope, vec1(0.7), 0.0);
    CHECK(velocity_from_kahler_data(prob, lin).value(vec1(0.5)) ==
          doctest::Approx(-0.35).epsilon(1e-14));
}

TEST_CASE("psi of the linear-velocity ray is a shifted conjugate") {
    ProblemData prob = linear_ray(1.0, 0.0);
    GeodesicRay ray(prob);
    // (u + s<a,.>)*(x) = u*(x - s a): psi(s,x) = log(1 + e^{x-s})
    CHECK(ray.psi_value(1.0, vec1(1.0)) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    for (double s : {0.0, 0.5, 2.0})
        for (double x : {-2.0, 0.3, 3.0})
            CHECK(ray.psi_value(s, vec1(x)) ==
                  doctest::Approx(std::log1p(std::exp(x - s))).epsilon(1e-11));
    CHECK(std::isfinite(ray.psi_value(5.0, vec1(100.0))));
    CHECK_THROWS_AS(ray.psi_value(-0.1, vec1(0.0)), std::invalid_argument);
}

TEST_CASE("psi at s=0 is the initial potential") {
    ProblemData prob = flagship();
    GeodesicRay ray(prob);
    for (double x : {-4.0, -0.3, 0.0, 2.2})
        CHECK(ray.psi_value(0.0, vec1(x)) ==
              doctest::Approx(std::log1p(std::exp(x))).epsilon(1e-12));
}

TEST_CASE("flagship psi beyond the lifespan against the dense-scan oracle") {
    ProblemData prob = flagship();
    CHECK(prob.t_cvx == doctest::Approx(2.0).epsilon(1e-3));
    GeodesicRay ray(prob);

    PsiValue v = ray.psi(3.0, vec1(0.0));
    CHECK(v.value == doctest::Approx(0.0583413494414400).epsilon(1e-10));
    CHECK(v.maximizers.points.size() == 2);
    CHECK(v.maximizers.diameter == doctest::Approx(0.8585596366401104).epsilon(1e-7));

    for (double x : {-1.0, 0.4}) {
        double oracle = oracles::conjugate_segment(
            [&](double y) { return oracles::guillemin_segment(y) + 3.0 * y * (1 - y); }, x);
        CHECK(ray.psi_value(3.0, vec1(x)) == doctest::Approx(oracle).epsilon(1e-9));
    }
}

TEST_CASE("phi examples") {
    ProblemData prob = flagship();
    GeodesicRay ray(prob);
    for (double x : {-1.5, 0.0, 2.0}) CHECK(std::abs(ray.phi(0.0, vec1(x))) <= 1e-12);
    // at x=0, s=1 the maximizer sits at 1/2 by symmetry: phi = -s/4
    CHECK(ray.phi(1.0, vec1(0.0)) == doctest::Approx(-0.25).epsilon(1e-11));

    ProblemData lin = linear_ray(1.0, 0.0);
    GeodesicRay lin_ray(lin);
    // phi(s,x) = log(1+e^{x-s}) - log(1+e^x) -> -s for x -> +infinity
    CHECK(lin_ray.phi(0.7, vec1(36.0)) == doctest::Approx(-0.7).epsilon(1e-11));
}

TEST_CASE("singular indicator") {
    ProblemData prob = flagship();
    GeodesicRay ray(prob);
    double tol = ray.default_singular_tol();
    CHECK(tol < 1e-3);

    auto at3 = ray.singular_indicator(3.0, vec1(0.0), tol);
    CHECK(at3.singular);
    CHECK(at3.diameter > 0.5);

    auto at1 = ray.singular_indicator(1.0, vec1(0.0), tol);
    CHECK_FALSE(at1.singular);
    CHECK(at1.diameter == 0.0);

    ProblemData lin = linear_ray(1.0, 0.0);
    GeodesicRay lin_ray(lin);
    for (double s : {0.5, 3.0, 7.0})
        CHECK_FALSE(lin_ray.singular_indicator(s, vec1(0.0), tol).singular);
}

TEST_CASE("hrma residual") {
    ProblemData lin = linear_ray(1.0, 0.0);
    GeodesicRay ray(lin);
    // rank-one joint hessian of log(1+e^{x-s})
    CHECK(std::abs(ray.hrma_residual(1.0, vec1(0.5), 1e-3)) <= 1e-6);

    // non-solution probe: determinant of the identity hessian
    auto probe = [](const Vec& p) { return 0.5 * (p[0] * p[0] + p[1] * p[1]); };
    CHECK(fd_hessian(probe, vec2(0.7, -0.2), 1e-4).determinant() ==
          doctest::Approx(1.0).epsilon(1e-8));

    // flagship inside the lifespan: small residual away from the kink
    ProblemData prob = flagship();
    GeodesicRay fray(prob);
    double r1 = std::abs(fray.hrma_residual(1.5, vec1(0.8), 1e-3));
    CHECK(r1 <= 1e-4);
    CHECK_THROWS_AS(fray.hrma_residual(0.0, vec1(0.0), 1e-3), std::invalid_argument);
}

TEST_CASE("one-sided stencil near s = 0") {
    ProblemData lin = linear_ray(1.0, 0.0);
    GeodesicRay ray(lin);
    // s smaller than h forces the shifted stencil; O(h) accuracy documented
    double r = ray.hrma_residual(5e-4, vec1(0.3), 1e-3);
    CHECK(std::abs(r) <= 1e-3);
}

TEST_CASE("joint convexity of psi in (s,x)") {
    ProblemData prob = flagship();
    GeodesicRay ray(prob);
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> us(0.0, 3.5), ux(-5.0, 5.0), ut(0.0, 1.0);
    for (int k = 0; k < 20; ++k) {
        double s1 = us(rng), s2 = us(rng), x1 = ux(rng), x2 = ux(rng), t = ut(rng);
        double v1 = ray.psi_value(s1, vec1(x1));
        double v2 = ray.psi_value(s2, vec1(x2));
        double vm = ray.psi_value(t * s1 + (1 - t) * s2, vec1(t * x1 + (1 - t) * x2));
        CHECK(vm <= t * v1 + (1 - t) * v2 + 1e-9);
    }
}

TEST_CASE("lipschitz bounds of psi") {
    ProblemData prob = flagship();
    GeodesicRay ray(prob);
    double max_abs_y = 1.0;       // P = [0,1]
    double max_abs_udot = 0.25;   // max of y(1-y)
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> us(0.0, 3.0), ux(-5.0, 5.0);
    for (int k = 0; k < 15; ++k) {
        double s = us(rng), x = ux(rng), x2 = ux(rng), s2 = us(rng);
        double base = ray.psi_value(s, vec1(x));
        CHECK(std::abs(base - ray.psi_value(s, vec1(x2))) <=
              max_abs_y * std::abs(x - x2) + 1e-10);
        CHECK(std::abs(base - ray.psi_value(s2, vec1(x))) <=
              max_abs_udot * std::abs(s - s2) + 1e-10);
    }
}

TEST_CASE("affine-velocity translation identity") {
    const double a = 0.8, b = -0.3;
    ProblemData prob = linear_ray(a, b);
    GeodesicRay ray(prob);
    for (double s : {0.3, 1.7, 4.0})
        for (double x : {-2.0, 0.1, 3.3}) {
            double lhs = ray.psi_value(s, vec1(x));
            double rhs = ray.psi_value(0.0, vec1(x - s * a)) - s * b;
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-11));
        }
}

TEST_CASE("monotone velocity comparison") {
    auto P = make_polytope_preset("segment");
    ScalarFieldOnP u0 = guillemin_field(P);
    // y(1-y) <= y(1-y) + 0.2 pointwise, conjugation reverses the order
    ProblemData lo = make_problem(P, u0, polynomial_field(P, {{1.0, {1}}, {-1.0, {2}}}));
    ProblemData hi = make_problem(
        P, u0, field_sum(polynomial_field(P, {{1.0, {1}}, {-1.0, {2}}}), constant_field(P, 0.2)));
    GeodesicRay rlo(lo), rhi(hi);
    for (double s : {0.5, 2.5})
        for (double x : {-1.0, 0.0, 2.0})
            CHECK(rlo.psi_value(s, vec1(x)) >= rhi.psi_value(s, vec1(x)) - 1e-12);
}

TEST_CASE("kink diameter is stable under scan refinement") {
    auto P = make_polytope_preset("segment");
    for (int coarse : {512, 1024, 4096}) {
        LegendreOptions opt;
        opt.coarse_per_dim = coarse;
        ProblemData prob = make_problem(P, guillemin_field(P),
                                        polynomial_field(P, {{1.0, {1}}, {-1.0, {2}}}), 1e-12, opt);
        GeodesicRay ray(prob);
        auto sing = ray.singular_indicator(3.0, vec1(0.0), ray.default_singular_tol());
        CHECK(sing.singular);
        CHECK(sing.diameter == doctest::Approx(0.8585596366401104).epsilon(1e-6));
    }
}
