#include <doctest.h>

#include <cmath>
#include <random>

#include "hrma/numerics.hpp"

using namespace hrma;

TEST_CASE("quadrature on intervals and the simplex") {
    auto seg = make_polytope_preset("segment");
    auto one = [](const Vec&) { return 1.0; };
    QuadratureResult r = integrate_on_polytope(*seg, one, 1e-10);
    CHECK(r.value == doctest::Approx(1.0).epsilon(1e-14));

    auto bump = [](const Vec& y) { return y[0] * (1 - y[0]); };
    CHECK(integrate_on_polytope(*seg, bump, 1e-12).value ==
          doctest::Approx(1.0 / 6).epsilon(1e-13));

    auto sx = make_polytope_preset("simplex2");
    CHECK(integrate_on_polytope(*sx, one, 1e-10).value == doctest::Approx(0.5).epsilon(1e-13));

    auto sq = make_polytope_preset("square");
    auto xy = [](const Vec& y) { return y[0] * y[1]; };
    CHECK(integrate_on_polytope(*sq, xy, 1e-12).value == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("quadrature polynomial exactness") {
    auto seg = make_polytope_preset("segment");
    for (int k : {5, 13, 24, 31}) {
        auto f = [k](const Vec& y) { return std::pow(y[0], k); };
        double exact = 1.0 / (k + 1);
        QuadratureResult r = integrate_on_polytope(*seg, f, 1e-12);
        CHECK(std::abs(r.value - exact) <= 1e-13 * exact + 1e-16);
    }
}

TEST_CASE("quadrature adapts near a boundary singularity in the derivative") {
    auto seg = make_polytope_preset("segment");
    // integrand continuous on [0,1] with infinite derivative at 0
    auto f = [](const Vec& y) { return std::sqrt(y[0]); };
    QuadratureResult r = integrate_on_polytope(*seg, f, 1e-10);
    CHECK(r.value == doctest::Approx(2.0 / 3).epsilon(1e-9));
    CHECK(r.panels_used > 1);
}

TEST_CASE("quadrature panel budget failure carries estimates") {
    auto seg = make_polytope_preset("segment");
    auto f = [](const Vec& y) { return std::sqrt(std::abs(y[0] - 0.377)); };
    QuadratureOptions opt;
    opt.max_panels = 4;
    try {
        integrate_on_polytope(*seg, f, 1e-14, opt);
        FAIL("expected QuadratureError");
    } catch (const QuadratureError& e) {
        CHECK(e.requested_tol == 1e-14);
        CHECK(e.last_estimate > 0);
    }
}

TEST_CASE("shared-node multi integration") {
    auto seg = make_polytope_preset("segment");
    auto f = [](const Vec& y, double* out) {
        out[0] = y[0] * (1 - y[0]);
        out[1] = y[0] * out[0];
    };
    MultiQuadratureResult r = integrate_on_polytope_multi(*seg, 2, f, 1e-12);
    CHECK(r.values[0] == doctest::Approx(1.0 / 6).epsilon(1e-13));
    CHECK(r.values[1] == doctest::Approx(1.0 / 12).epsilon(1e-13));
}

TEST_CASE("log_sum_exp") {
    std::vector<double> a{0.0, 0.0};
    CHECK(log_sum_exp(a) == doctest::Approx(std::log(2.0)).epsilon(1e-15));

    std::vector<double> big{1000.0, 1000.0};
    CHECK(log_sum_exp(big) == doctest::Approx(1000.0 + std::log(2.0)).epsilon(1e-15));

    std::vector<double> one{3.0};
    std::vector<double> w{2.0};
    CHECK(log_sum_exp(one, w) == doctest::Approx(3.0 + std::log(2.0)).epsilon(1e-15));

    CHECK_THROWS_AS(log_sum_exp(std::vector<double>{}), std::invalid_argument);

    // permutation invariance under compensated summation
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(-30.0, 30.0);
    std::vector<double> xs(257);
    for (auto& v : xs) v = uni(rng);
    double base = log_sum_exp(xs);
    for (int trial = 0; trial < 5; ++trial) {
        std::shuffle(xs.begin(), xs.end(), rng);
        CHECK(std::abs(log_sum_exp(xs) - base) <= 1e-14 * std::abs(base) + 1e-15);
    }
}

TEST_CASE("finite difference hessians") {
    auto quad = [](const Vec& p) { return 0.5 * (p[0] * p[0] + p[1] * p[1]); };
    Mat H = fd_hessian(quad, vec2(0.3, -0.2), 1e-4);
    CHECK((H - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-8);

    auto cross = [](const Vec& p) { return p[0] * p[1]; };
    Mat C = fd_hessian(cross, vec2(0.5, 0.25), 1e-4);
    CHECK(C(0, 0) == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(C(0, 1) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(C(1, 0) == C(0, 1));

    // logistic ridge log(1 + e^{x-s}): hessian [[p,-p],[-p,p]], p = 1/4 at 0
    auto ridge = [](const Vec& p) { return std::log1p(std::exp(p[1] - p[0])); };
    Mat R = fd_hessian(ridge, vec2(0.0, 0.0), 1e-4);
    CHECK(R(0, 0) == doctest::Approx(0.25).epsilon(1e-7));
    CHECK(R(1, 1) == doctest::Approx(0.25).epsilon(1e-7));
    CHECK(R(0, 1) == doctest::Approx(-0.25).epsilon(1e-7));
    CHECK(std::abs(R.determinant()) <= 1e-8);
}

TEST_CASE("symmetric eigen bounds") {
    Mat D = Mat::Zero(2, 2);
    D(0, 0) = 1;
    D(1, 1) = 3;
    CHECK(min_symmetric_eigenvalue(D) == doctest::Approx(1.0));
    CHECK(max_symmetric_eigenvalue(D) == doctest::Approx(3.0));
}
