#include <doctest.h>

#include <cstring>

#include "hrma/config.hpp"

using namespace hrma;

TEST_CASE("flagship preset file parses") {
    StudyConfig cfg = parse_config(std::string(HRMA_SOURCE_DIR) + "/configs/flagship.cfg");
    CHECK(cfg.polytope == "segment");
    CHECK(cfg.velocity == "bump");
    CHECK(cfg.n_ladder == std::vector<int>{8, 16, 32, 64, 128});
    CHECK(cfg.t_max == 3.0);
    CHECK(cfg.x_window == 6.0);
    CHECK(cfg.ma_resolutions == std::vector<int>{128, 256, 512});

    ProblemData prob = problem_from_config(cfg);
    CHECK(prob.polytope->dimension() == 1);
    CHECK(prob.t_cvx == doctest::Approx(2.0).epsilon(1e-3));
    CHECK(prob.udot0.value(vec1(0.5)) == doctest::Approx(0.25));
}

TEST_CASE("missing required keys are reported by name") {
    try {
        parse_config_text("[study]\nt_max = 1\n", "inline");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::strstr(e.what(), "problem.polytope") != nullptr);
        CHECK(std::strstr(e.what(), "problem.velocity") != nullptr);
    }
}

TEST_CASE("unknown keys are rejected, all of them by name") {
    try {
        parse_config_text(
            "[problem]\npolytope = segment\nvelocity = bump\nfoo = 1\n[study]\nbar = 2\n",
            "inline");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::strstr(e.what(), "problem.foo") != nullptr);
        CHECK(std::strstr(e.what(), "study.bar") != nullptr);
    }
}

TEST_CASE("ladder validation") {
    CHECK_THROWS_AS(
        parse_config_text("[problem]\npolytope = segment\nvelocity = bump\n[study]\nn_ladder "
                          "= 16,8\n",
                          "inline"),
        ConfigError);
    CHECK_THROWS_AS(
        parse_config_text("[problem]\npolytope = segment\nvelocity = bump\n[study]\nt_max = "
                          "-1\n",
                          "inline"),
        ConfigError);
}

TEST_CASE("velocity specs") {
    auto P = make_polytope_preset("segment");
    CHECK(velocity_field_from_spec(P, "bump").value(vec1(0.25)) ==
          doctest::Approx(0.1875).epsilon(1e-14));
    CHECK(velocity_field_from_spec(P, "linear:2,0.5").value(vec1(0.25)) ==
          doctest::Approx(1.0).epsilon(1e-14));
    // y(1-y) as an explicit coefficient table
    CHECK(velocity_field_from_spec(P, "poly:0,1,-1").value(vec1(0.3)) ==
          doctest::Approx(0.21).epsilon(1e-14));
    CHECK(velocity_field_from_spec(P, "constant:-2").value(vec1(0.9)) == doctest::Approx(-2.0));

    auto sq = make_polytope_preset("square");
    ScalarFieldOnP mono = velocity_field_from_spec(sq, "monomials:[[1.5,1,1],[0.5,2,0]]");
    CHECK(mono.value(vec2(0.5, 0.4)) == doctest::Approx(1.5 * 0.2 + 0.5 * 0.25).epsilon(1e-14));

    CHECK_THROWS_AS(velocity_field_from_spec(sq, "bump"), ConfigError);
    CHECK_THROWS_AS(velocity_field_from_spec(P, "nonsense"), ConfigError);
    CHECK_THROWS_AS(velocity_field_from_spec(P, "linear:1"), ConfigError);
}

TEST_CASE("inline polytope JSON and smooth part") {
    StudyConfig cfg = parse_config_text(
        "[problem]\n"
        "polytope = {\"normals\": [[1],[-1]], \"offsets\": [0,-1]}\n"
        "u0_smooth = poly:0,0,0.5\n"
        "velocity = bump\n",
        "inline");
    ProblemData prob = problem_from_config(cfg);
    // u0 = u_G + y^2/2 at y = 1/2
    CHECK(prob.u0.value(vec1(0.5)) ==
          doctest::Approx(-std::log(2.0) + 0.125).epsilon(1e-12));
    CHECK_FALSE(prob.u0.smooth_up_to_boundary());
}

TEST_CASE("nonexistent config path is a config error") {
    CHECK_THROWS_AS(parse_config("/nonexistent/path.cfg"), ConfigError);
}
