#include <doctest.h>

#include <cmath>
#include <random>

#include "ivpinn/lifting.hpp"

using namespace ivpinn;

TEST_CASE("phi on the all-Dirichlet unit square") {
    auto phi = build_phi_rect(Rect{}, BoundarySpec::all_dirichlet());
    CHECK(phi.value({0.5, 0.5}) == doctest::Approx(1.0 / 16.0).epsilon(1e-15));
    // vanishes on each side, sampled densely
    for (int i = 0; i <= 20; ++i) {
        double t = i / 20.0;
        CHECK(std::abs(phi.value({0.0, t})) <= 1e-12);
        CHECK(std::abs(phi.value({1.0, t})) <= 1e-12);
        CHECK(std::abs(phi.value({t, 0.0})) <= 1e-12);
        CHECK(std::abs(phi.value({t, 1.0})) <= 1e-12);
    }
    CHECK(phi.value({0.25, 0.75}) > 0.0);
}

TEST_CASE("phi with Dirichlet only on x=0 and x=1") {
    BoundarySpec spec;
    spec.left = spec.right = BoundaryTag::dirichlet;
    spec.bottom = spec.top = BoundaryTag::neumann;
    auto phi = build_phi_rect(Rect{}, spec);
    for (int i = 0; i <= 10; ++i) {
        double y = i / 10.0;
        CHECK(phi.value({0.5, y}) == doctest::Approx(0.25).epsilon(1e-15));
        CHECK(std::abs(phi.value({0.0, y})) <= 1e-13);
        CHECK(std::abs(phi.value({1.0, y})) <= 1e-13);
    }
}

TEST_CASE("phi on the unit interval") {
    auto phi = build_phi_interval(0.0, 1.0);
    CHECK(phi.value({0.5, 0.0}) == doctest::Approx(0.25));
    CHECK(phi.value({0.0, 0.0}) == doctest::Approx(0.0));
    CHECK(phi.grad({0.25, 0.0}).x == doctest::Approx(0.5));
}

TEST_CASE("phi gradient matches finite differences") {
    auto phi = build_phi_rect(Rect{0, 0, 2, 1}, BoundarySpec::all_dirichlet());
    std::mt19937_64 rng(13);
    auto uniform = [&rng]() { return (rng() >> 11) * 0x1.0p-53; };
    const double d = 1e-6;
    for (int t = 0; t < 10; ++t) {
        Vec2 p{0.1 + 1.8 * uniform(), 0.1 + 0.8 * uniform()};
        Vec2 g = phi.grad(p);
        double fdx = (phi.value({p.x + d, p.y}) - phi.value({p.x - d, p.y})) / (2 * d);
        double fdy = (phi.value({p.x, p.y + d}) - phi.value({p.x, p.y - d})) / (2 * d);
        CHECK(g.x == doctest::Approx(fdx).epsilon(1e-7));
        CHECK(g.y == doctest::Approx(fdy).epsilon(1e-7));
    }
}

TEST_CASE("apply_B basics and affinity in w") {
    BoundaryLifting lifting;
    lifting.phi = build_phi_rect(Rect{}, BoundarySpec::all_dirichlet());
    lifting.ubar = {[](Vec2 p) { return p.x + 2.0 * p.y; }, [](Vec2) { return Vec2{1.0, 2.0}; }};

    std::vector<Vec2> pts = {{0.3, 0.4}, {0.7, 0.2}, {0.5, 0.5}};
    std::vector<double> zeros(pts.size(), 0.0), ones(pts.size(), 1.0);
    std::vector<Vec2> zero_grads(pts.size(), Vec2{0, 0});

    auto b0 = apply_B(lifting, pts, zeros, zero_grads);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        CHECK(b0.values[i] == doctest::Approx(lifting.ubar.value(pts[i])));
        CHECK(b0.grads[i].x == doctest::Approx(1.0));
        CHECK(b0.grads[i].y == doctest::Approx(2.0));
    }

    BoundaryLifting no_ubar{lifting.phi, zero_field()};
    auto b1 = apply_B(no_ubar, pts, ones, zero_grads);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        CHECK(b1.values[i] == doctest::Approx(lifting.phi.value(pts[i])));
        CHECK(b1.grads[i].x == doctest::Approx(lifting.phi.grad(pts[i]).x));
        CHECK(b1.grads[i].y == doctest::Approx(lifting.phi.grad(pts[i]).y));
    }

    // affinity: B(w1 + w2) - B(w1) = phi * w2 exactly
    std::vector<double> w1 = {0.5, -1.0, 2.0}, w2 = {1.5, 0.25, -0.75}, w12(3);
    for (int i = 0; i < 3; ++i) w12[i] = w1[i] + w2[i];
    auto bw1 = apply_B(lifting, pts, w1, zero_grads);
    auto bw12 = apply_B(lifting, pts, w12, zero_grads);
    for (std::size_t i = 0; i < pts.size(); ++i)
        CHECK(bw12.values[i] - bw1.values[i] ==
              doctest::Approx(lifting.phi.value(pts[i]) * w2[i]).epsilon(1e-15));
}

TEST_CASE("B gradient matches finite differences for a smooth w") {
    BoundaryLifting lifting;
    lifting.phi = build_phi_rect(Rect{}, BoundarySpec::all_dirichlet());
    lifting.ubar = {[](Vec2 p) { return std::sin(p.x) * std::cos(p.y); },
                    [](Vec2 p) {
                        return Vec2{std::cos(p.x) * std::cos(p.y), -std::sin(p.x) * std::sin(p.y)};
                    }};
    auto w = [](Vec2 p) { return std::exp(p.x - 0.5 * p.y); };
    auto wg = [&w](Vec2 p) { return Vec2{w(p), -0.5 * w(p)}; };

    auto bw_value = [&](Vec2 p) {
        std::vector<Vec2> pt{p};
        std::vector<double> wv{w(p)};
        std::vector<Vec2> wgr{wg(p)};
        return apply_B(lifting, pt, wv, wgr).values[0];
    };

    std::mt19937_64 rng(17);
    auto uniform = [&rng]() { return (rng() >> 11) * 0x1.0p-53; };
    const double d = 1e-6;
    for (int t = 0; t < 10; ++t) {
        Vec2 p{0.1 + 0.8 * uniform(), 0.1 + 0.8 * uniform()};
        std::vector<Vec2> pt{p};
        std::vector<double> wv{w(p)};
        std::vector<Vec2> wgr{wg(p)};
        auto b = apply_B(lifting, pt, wv, wgr);
        double fdx = (bw_value({p.x + d, p.y}) - bw_value({p.x - d, p.y})) / (2 * d);
        double fdy = (bw_value({p.x, p.y + d}) - bw_value({p.x, p.y - d})) / (2 * d);
        CHECK(b.grads[0].x == doctest::Approx(fdx).epsilon(1e-7));
        CHECK(b.grads[0].y == doctest::Approx(fdy).epsilon(1e-7));
    }
}
