#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <random>

#include "ivpinn/network.hpp"

using namespace ivpinn;

namespace {

// straightforward per-point evaluator, kept independent of the batched path
double reference_eval(const MlpNetwork& net, const double* x) {
    std::vector<double> cur(x, x + net.input_dim());
    for (int l = 0; l < net.n_layers(); ++l) {
        int rows = net.widths[l + 1], cols = net.widths[l];
        std::vector<double> next(rows);
        for (int r = 0; r < rows; ++r) {
            double s = net.biases[l][r];
            for (int c = 0; c < cols; ++c) s += net.weights[l][r * cols + c] * cur[c];
            bool last = l == net.n_layers() - 1;
            next[r] = last ? s
                           : (net.activation == Activation::tanh ? std::tanh(s)
                                                                 : std::max(0.0, s));
        }
        cur = std::move(next);
    }
    return cur[0];
}

std::vector<double> random_points(int n, int dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<double> pts(static_cast<std::size_t>(n) * dim);
    for (auto& p : pts) p = (rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
    return pts;
}

}  // namespace

TEST_CASE("zero weights give the output bias everywhere") {
    MlpNetwork net;
    net.widths = {2, 4, 1};
    net.weights = {std::vector<double>(8, 0.0), std::vector<double>(4, 0.0)};
    net.biases = {std::vector<double>(4, 0.0), {3.25}};
    auto out = mlp_forward(net, random_points(7, 2, 1));
    for (double v : out) CHECK(v == doctest::Approx(3.25));
}

TEST_CASE("one-hidden-layer tanh net at the origin") {
    MlpNetwork net;
    net.widths = {1, 1, 1};
    net.weights = {{1.0}, {2.0}};
    net.biases = {{0.0}, {1.0}};
    std::vector<double> x = {0.0};
    CHECK(mlp_forward(net, x)[0] == doctest::Approx(1.0));
}

TEST_CASE("batched forward matches the per-point reference evaluator") {
    auto net = init_weights({2, 10, 10, 1}, Activation::tanh, 42);
    auto pts = random_points(20, 2, 2);
    auto vals = mlp_forward(net, pts);
    for (int p = 0; p < 20; ++p)
        CHECK(vals[p] == doctest::Approx(reference_eval(net, &pts[2 * p])).epsilon(1e-14));
}

TEST_CASE("weight gradient: zero cotangents and the linear case") {
    auto net = init_weights({2, 5, 1}, Activation::tanh, 3);
    auto pts = random_points(4, 2, 4);
    std::vector<double> zero_cot(4, 0.0);
    for (double g : mlp_weight_gradient(net, pts, zero_cot)) CHECK(g == 0.0);

    // single linear layer: d/dA[0][j] of c * (A x + b) = c * x_j
    MlpNetwork lin;
    lin.widths = {2, 1};
    lin.weights = {{0.7, -0.3}};
    lin.biases = {{0.1}};
    std::vector<double> x = {2.0, -1.5};
    std::vector<double> cot = {3.0};
    auto g = mlp_weight_gradient(lin, x, cot);
    REQUIRE(g.size() == 3);
    CHECK(g[0] == doctest::Approx(3.0 * 2.0));
    CHECK(g[1] == doctest::Approx(3.0 * -1.5));
    CHECK(g[2] == doctest::Approx(3.0));
}

TEST_CASE("weight gradient matches central finite differences") {
    auto net = init_weights({2, 8, 8, 1}, Activation::tanh, 7);
    auto pts = random_points(5, 2, 8);
    std::vector<double> cot = {0.3, -1.1, 0.7, 2.0, -0.4};
    auto grad = mlp_weight_gradient(net, pts, cot);

    auto objective = [&](const std::vector<double>& flat) {
        MlpNetwork n2 = net;
        n2.from_flat(flat);
        auto v = mlp_forward(n2, pts);
        double s = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) s += cot[i] * v[i];
        return s;
    };
    auto flat = net.to_flat();
    std::mt19937_64 rng(9);
    const double d = 1e-6;
    for (int t = 0; t < 50; ++t) {
        std::size_t i = rng() % flat.size();
        auto fp = flat, fm = flat;
        fp[i] += d;
        fm[i] -= d;
        double fd = (objective(fp) - objective(fm)) / (2 * d);
        double denom = std::max(1e-12, std::abs(fd));
        CHECK(std::abs(grad[i] - fd) / denom <= 1e-6);
    }
}

TEST_CASE("input jacobian: constant nets and finite differences") {
    MlpNetwork flat_net;
    flat_net.widths = {2, 3, 1};
    flat_net.weights = {std::vector<double>(6, 0.0), std::vector<double>(3, 0.0)};
    flat_net.biases = {std::vector<double>(3, 0.5), {2.0}};
    auto jac0 = mlp_input_jacobian(flat_net, random_points(3, 2, 10));
    for (double j : jac0) CHECK(j == doctest::Approx(0.0));

    auto net = init_weights({2, 12, 12, 1}, Activation::tanh, 11);
    auto pts = random_points(10, 2, 12);
    auto jac = mlp_input_jacobian(net, pts);
    const double d = 1e-6;
    for (int p = 0; p < 10; ++p)
        for (int dim = 0; dim < 2; ++dim) {
            auto pp = pts, pm = pts;
            pp[2 * p + dim] += d;
            pm[2 * p + dim] -= d;
            double fd = (mlp_forward(net, pp)[p] - mlp_forward(net, pm)[p]) / (2 * d);
            CHECK(jac[2 * p + dim] == doctest::Approx(fd).epsilon(1e-7));
        }
}

TEST_CASE("input jacobian rejects relu") {
    auto bump = build_relu_bump(0.5, 0.1);
    std::vector<double> x = {0.2};
    CHECK_THROWS_AS(mlp_input_jacobian(bump, x), std::invalid_argument);
}

TEST_CASE("weight gradient of the jacobian matches finite differences") {
    auto net = init_weights({2, 6, 6, 1}, Activation::tanh, 13);
    auto pts = random_points(4, 2, 14);
    std::vector<double> cot_jac = {0.5, -0.2, 1.0, 0.3, -0.7, 0.9, 0.1, -1.2};
    auto grad = weight_gradient_of_jacobian(net, pts, cot_jac);

    auto objective = [&](const std::vector<double>& flat) {
        MlpNetwork n2 = net;
        n2.from_flat(flat);
        auto j = mlp_input_jacobian(n2, pts);
        double s = 0.0;
        for (std::size_t i = 0; i < j.size(); ++i) s += cot_jac[i] * j[i];
        return s;
    };
    auto flat = net.to_flat();
    std::mt19937_64 rng(15);
    const double d = 1e-5;
    for (int t = 0; t < 40; ++t) {
        std::size_t i = rng() % flat.size();
        auto fp = flat, fm = flat;
        fp[i] += d;
        fm[i] -= d;
        double fd = (objective(fp) - objective(fm)) / (2 * d);
        double denom = std::max(1e-10, std::abs(fd));
        CHECK(std::abs(grad[i] - fd) / denom <= 1e-5);
    }
}

TEST_CASE("directional forward/backward consistency") {
    auto net = init_weights({2, 10, 10, 10, 1}, Activation::tanh, 21);
    auto pts = random_points(6, 2, 22);
    std::vector<double> cot = {1.0, -0.5, 0.25, 2.0, -1.5, 0.75};
    auto grad = mlp_weight_gradient(net, pts, cot);

    auto flat = net.to_flat();
    std::mt19937_64 rng(23);
    std::vector<double> dir(flat.size());
    for (auto& v : dir) v = (rng() >> 11) * 0x1.0p-53 - 0.5;
    double gd = 0.0;
    for (std::size_t i = 0; i < flat.size(); ++i) gd += grad[i] * dir[i];

    const double d = 1e-6;
    auto eval = [&](double step) {
        MlpNetwork n2 = net;
        auto f2 = flat;
        for (std::size_t i = 0; i < f2.size(); ++i) f2[i] += step * dir[i];
        n2.from_flat(f2);
        auto v = mlp_forward(n2, pts);
        double s = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) s += cot[i] * v[i];
        return s;
    };
    double fd = (eval(d) - eval(-d)) / (2 * d);
    CHECK(gd == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("initialization is reproducible and Glorot-scaled") {
    auto a = init_weights({2, 50, 50, 1}, Activation::tanh, 99);
    auto b = init_weights({2, 50, 50, 1}, Activation::tanh, 99);
    CHECK(a.to_flat() == b.to_flat());
    auto c = init_weights({2, 50, 50, 1}, Activation::tanh, 100);
    CHECK(a.to_flat() != c.to_flat());

    // sample variance of the first layer ~ 2 / (N0 + N1) within 20%
    double mean = 0.0, var = 0.0;
    for (double v : a.weights[0]) mean += v;
    mean /= a.weights[0].size();
    for (double v : a.weights[0]) var += (v - mean) * (v - mean);
    var /= a.weights[0].size();
    double target = 2.0 / (2 + 50);
    CHECK(var > 0.8 * target);
    CHECK(var < 1.2 * target);
    for (double v : a.biases[0]) CHECK(v == 0.0);
}

TEST_CASE("relu bump matches the closed-form hat") {
    const double x_bar = 0.5, h = 0.125;
    auto bump = build_relu_bump(x_bar, h);
    std::vector<double> xs = {x_bar};
    CHECK(mlp_forward(bump, xs)[0] == doctest::Approx(1.0 / h).epsilon(1e-13));
    for (double x : {x_bar - h, x_bar + h, 0.0, 0.1, 0.9, 1.0}) {
        std::vector<double> q = {x};
        CHECK(std::abs(mlp_forward(bump, q)[0]) <= 1e-13);
    }
    // piecewise-linear interior values
    std::vector<double> mid = {x_bar - 0.5 * h};
    CHECK(mlp_forward(bump, mid)[0] == doctest::Approx(0.5 / h).epsilon(1e-12));

    // L1 norm over (0,1) is exactly 1: integrate on the two linear pieces
    double l1 = 0.0;
    for (int piece = 0; piece < 2; ++piece) {
        double a = x_bar + (piece == 0 ? -h : 0.0), b = a + h;
        for (double t : {0.2113248654051871, 0.7886751345948129}) {
            std::vector<double> q = {a + t * (b - a)};
            l1 += 0.5 * (b - a) * std::abs(mlp_forward(bump, q)[0]);
        }
    }
    CHECK(l1 == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("derivatives stay finite for weights up to 1e3") {
    auto net = init_weights({2, 8, 1}, Activation::tanh, 31);
    for (auto& layer : net.weights)
        for (auto& v : layer) v *= 900.0;
    auto pts = random_points(5, 2, 32);
    auto vals = mlp_forward(net, pts);
    auto jac = mlp_input_jacobian(net, pts);
    std::vector<double> cot(5, 1.0);
    auto grad = mlp_weight_gradient(net, pts, cot);
    for (double v : vals) CHECK(std::isfinite(v));
    for (double v : jac) CHECK(std::isfinite(v));
    for (double v : grad) CHECK(std::isfinite(v));
}

TEST_CASE("checkpoint round-trip") {
    auto net = init_weights({3, 7, 5, 1}, Activation::tanh, 77);
    std::string path = "test_network_checkpoint.bin";
    save_network(net, path);
    auto back = load_network(path);
    CHECK(back.widths == net.widths);
    CHECK(back.activation == net.activation);
    CHECK(back.to_flat() == net.to_flat());
    std::remove(path.c_str());
}
