#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "ivpinn/problem.hpp"

using namespace ivpinn;

TEST_CASE("smooth case point values") {
    auto tc = case_smooth();
    CHECK(tc.problem.exact->value({0.0, 0.0}) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(tc.problem.mu({0.0, 0.0}) == doctest::Approx(2.0));
    CHECK(tc.problem.beta({0.0, 0.0}).x == doctest::Approx(std::sqrt(5.0)));
    CHECK(tc.problem.sigma({0.0, 0.0}) == doctest::Approx(3.0));
}

TEST_CASE("every registered case passes the manufactured-data check") {
    for (const auto& name : registered_case_names()) {
        auto tc = case_by_name(name);
        CAPTURE(name);
        CHECK(manufactured_consistency_error(tc.problem, 100, 2024) <= 1e-6);
    }
    auto far = case_parametric_nonlinear(1.7);
    CHECK(manufactured_consistency_error(far.problem, 100, 11) <= 1e-6);
}

TEST_CASE("exact gradients match finite differences") {
    for (const auto& name : registered_case_names()) {
        auto tc = case_by_name(name);
        CAPTURE(name);
        CHECK(exact_gradient_fd_error(tc.problem, 50, 31) <= 1e-7);
    }
}

TEST_CASE("liftings match the Dirichlet data on Gamma_D") {
    auto smooth = case_smooth();
    for (int i = 0; i <= 20; ++i) {
        double y = i / 20.0;
        CHECK(smooth.lifting.ubar.value({0.0, y}) ==
              doctest::Approx(smooth.problem.exact->value({0.0, y})).epsilon(1e-13));
        CHECK(smooth.lifting.ubar.value({1.0, y}) ==
              doctest::Approx(smooth.problem.exact->value({1.0, y})).epsilon(1e-13));
        CHECK(std::abs(smooth.lifting.phi.value({0.0, y})) <= 1e-13);
        CHECK(std::abs(smooth.lifting.phi.value({1.0, y})) <= 1e-13);
    }

    auto par = case_parametric_nonlinear(1.3);
    for (int i = 0; i <= 10; ++i) {
        double t = i / 10.0;
        for (Vec2 p : {Vec2{t, 0.0}, Vec2{t, 1.0}, Vec2{0.0, t}, Vec2{1.0, t}}) {
            CHECK(par.lifting.ubar.value(p) ==
                  doctest::Approx(par.problem.exact->value(p)).epsilon(1e-12));
            CHECK(std::abs(par.lifting.phi.value(p)) <= 1e-13);
        }
    }
}

TEST_CASE("corner case values and singularity handling") {
    auto tc = case_corner_singularity();
    CHECK(tc.problem.exact->value({0.0, 0.0}) == 0.0);
    // on the positive x-axis (theta = 0): u = r^{2/3} sin(pi/3)
    double r = 0.37;
    CHECK(tc.problem.exact->value({r, 0.0}) ==
          doctest::Approx(std::pow(r, 2.0 / 3.0) * std::sin(M_PI / 3.0)).epsilon(1e-14));
    CHECK(std::isinf(tc.problem.exact->grad({0.0, 0.0}).x));
    CHECK(tc.regularity_limit == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("parametric case values and training set") {
    auto tc = case_parametric_nonlinear(1.0);
    CHECK(tc.problem.exact->value({0.0, 0.0}) == doctest::Approx(0.5));
    auto tc2 = case_parametric_nonlinear(0.5);
    CHECK(tc2.problem.exact->value({0.0, 0.0}) == doctest::Approx(1.0 / 1.5));

    auto ps = parametric_training_set();
    REQUIRE(ps.size() == 13);
    CHECK(ps.front() == doctest::Approx(0.5));
    CHECK(ps.back() == doctest::Approx(2.0));
    for (std::size_t i = 1; i < ps.size(); ++i)
        CHECK(ps[i] - ps[i - 1] == doctest::Approx(1.5 / 12.0).epsilon(1e-13));

    CHECK(parametric_in_range(1.0));
    CHECK_FALSE(parametric_in_range(2.5));
}

TEST_CASE("zero-data case is trivial") {
    auto tc = case_zero_data(1);
    CHECK(tc.problem.f({0.3, 0.0}) == 0.0);
    CHECK(tc.problem.exact->value({0.7, 0.0}) == 0.0);
    CHECK_THROWS_AS(case_zero_data(3), std::invalid_argument);
}

TEST_CASE("unknown case name is rejected") {
    CHECK_THROWS_AS(case_by_name("nope"), std::invalid_argument);
    auto tc = case_by_name("parametric@1.25");
    CHECK(tc.problem.p_param == doctest::Approx(1.25));
}
