#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "ivpinn/problem.hpp"
#include "ivpinn/reporting.hpp"
#include "ivpinn/training.hpp"

using namespace ivpinn;

namespace {

TrainingConfig quick_config(int adam = 200, int second = 200) {
    TrainingConfig cfg;
    cfg.adam_epochs = adam;
    cfg.second_order_max_iters = second;
    cfg.seed = 1;
    return cfg;
}

Objective quadratic(const std::vector<double>& target) {
    return [target](std::span<const double> x, std::span<double> g) {
        double f = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            double w = 1.0 + static_cast<double>(i % 5);
            double d = x[i] - target[i];
            f += 0.5 * w * d * d;
            g[i] = w * d;
        }
        return f;
    };
}

// central finite differences of a LossHandle on random weight coordinates
void check_loss_gradient(const LossHandle& loss, const MlpNetwork& net, int n_checks,
                         double tol, std::uint64_t seed) {
    std::vector<double> flat = net.to_flat();
    std::vector<double> grad(flat.size());
    loss.fn(flat, grad);
    std::mt19937_64 rng(seed);
    const double d = 1e-6;
    std::vector<double> dummy(flat.size());
    for (int t = 0; t < n_checks; ++t) {
        std::size_t i = rng() % flat.size();
        auto fp = flat, fm = flat;
        fp[i] += d;
        fm[i] -= d;
        double fd = (loss.fn(fp, dummy) - loss.fn(fm, dummy)) / (2 * d);
        double denom = std::max(1e-10, std::abs(fd));
        CAPTURE(i);
        CHECK(std::abs(grad[i] - fd) / denom <= tol);
    }
}

}  // namespace

TEST_CASE("config validation") {
    TrainingConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.wolfe_c1 = 0.95;  // >= c2
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = TrainingConfig{};
    cfg.adam_lr0 = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("optimizers drive a quadratic to its minimum") {
    std::mt19937_64 rng(5);
    std::vector<double> target(30);
    for (auto& t : target) t = (rng() >> 11) * 0x1.0p-53 - 0.5;
    auto obj = quadratic(target);

    for (auto method : {SecondOrderMethod::bfgs, SecondOrderMethod::lbfgs}) {
        std::vector<double> x(30, 0.0);
        TrainingConfig cfg = quick_config(50, 200);
        cfg.second_order = method;
        TrainingHistory hist;
        adam_minimize(obj, x, cfg, hist, nullptr);
        double f = second_order_minimize(obj, x, cfg, hist, nullptr);
        CHECK(f <= 1e-16);
        for (std::size_t i = 0; i < x.size(); ++i)
            CHECK(x[i] == doctest::Approx(target[i]).epsilon(1e-7));
        // second-order iterations never increase the loss
        char phase = method == SecondOrderMethod::bfgs ? 'B' : 'L';
        double prev = std::numeric_limits<double>::infinity();
        for (const auto& e : hist.entries)
            if (e.phase == phase) {
                CHECK(e.loss <= prev * (1.0 + 1e-12));
                prev = e.loss;
            }
    }
}

TEST_CASE("rosenbrock minimized by lbfgs with strong wolfe") {
    Objective rosen = [](std::span<const double> x, std::span<double> g) {
        double a = 1.0 - x[0], b = x[1] - x[0] * x[0];
        g[0] = -2.0 * a - 400.0 * x[0] * b;
        g[1] = 200.0 * b;
        return a * a + 100.0 * b * b;
    };
    std::vector<double> x = {-1.2, 1.0};
    TrainingConfig cfg = quick_config(0, 500);
    cfg.grad_tol = 1e-12;
    TrainingHistory hist;
    double f = second_order_minimize(rosen, x, cfg, hist, nullptr);
    CHECK(f <= 1e-16);
    CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(x[1] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("interpolated loss gradient matches finite differences") {
    auto tc = case_smooth();
    auto mesh = build_structured_mesh(2, 2, tc.problem.domain, tc.problem.boundary);
    auto sys = assemble_system(tc.problem, DiscretizationConfig::from_kq(1, 3), mesh);
    auto net = init_weights({2, 6, 6, 1}, Activation::tanh, 3);
    auto loss = make_ivpinn_loss(sys, tc.lifting, net);
    check_loss_gradient(loss, net, 25, 1e-5, 7);
}

TEST_CASE("non-interpolated loss gradient matches finite differences") {
    auto tc = case_smooth();
    auto mesh = build_structured_mesh(2, 2, tc.problem.domain, tc.problem.boundary);
    auto sys = assemble_system(tc.problem, DiscretizationConfig::from_kq(1, 3), mesh);
    auto net = init_weights({2, 5, 5, 1}, Activation::tanh, 5);
    auto loss = make_vpinn_noninterp_loss(sys, tc.lifting, net);
    check_loss_gradient(loss, net, 25, 1e-5, 9);
}

TEST_CASE("parametric loss gradient matches finite differences") {
    auto tc1 = case_parametric_nonlinear(0.8);
    auto tc2 = case_parametric_nonlinear(1.6);
    auto mesh = build_structured_mesh(2, 2, tc1.problem.domain, tc1.problem.boundary);
    auto sys1 = assemble_system(tc1.problem, DiscretizationConfig::from_kq(1, 3), mesh);
    auto sys2 = assemble_system(tc2.problem, DiscretizationConfig::from_kq(1, 3), mesh);
    auto net = init_weights({3, 6, 1}, Activation::tanh, 9);
    auto loss = make_parametric_loss({&sys1, &sys2}, {&tc1.lifting, &tc2.lifting}, net);
    check_loss_gradient(loss, net, 25, 1e-5, 11);
}

TEST_CASE("non-interpolated loss restrictions") {
    auto tc = case_parametric_nonlinear(1.0);
    auto mesh = build_structured_mesh(2, 2, tc.problem.domain, tc.problem.boundary);
    auto sys = assemble_system(tc.problem, DiscretizationConfig::from_kq(1, 3), mesh);
    auto net = init_weights({2, 4, 1}, Activation::tanh, 1);
    CHECK_THROWS_AS(make_vpinn_noninterp_loss(sys, tc.lifting, net), std::invalid_argument);

    auto zero = case_zero_data(2);
    auto zmesh = build_structured_mesh(2, 2, zero.problem.domain, zero.problem.boundary);
    auto zsys = assemble_system(zero.problem, DiscretizationConfig::from_kq(1, 3), zmesh);
    auto relu = build_relu_bump(0.5, 0.1);
    CHECK_THROWS_AS(make_vpinn_noninterp_loss(zsys, zero.lifting, relu), std::invalid_argument);
}

TEST_CASE("zero net on zero data has zero non-interpolated loss") {
    auto tc = case_zero_data(2);
    auto mesh = build_structured_mesh(2, 2, tc.problem.domain, tc.problem.boundary);
    auto sys = assemble_system(tc.problem, DiscretizationConfig::from_kq(1, 3), mesh);
    MlpNetwork net;
    net.widths = {2, 3, 1};
    net.activation = Activation::tanh;
    net.weights = {std::vector<double>(6, 0.0), std::vector<double>(3, 0.0)};
    net.biases = {std::vector<double>(3, 0.0), {0.0}};
    auto loss = make_vpinn_noninterp_loss(sys, tc.lifting, net);
    std::vector<double> g(net.n_weights());
    CHECK(loss.fn(net.to_flat(), g) == 0.0);
}

TEST_CASE("loss at the petrov-galerkin oracle nodal values is numerically zero") {
    auto tc = case_smooth();
    auto mesh = build_structured_mesh(2, 2, tc.problem.domain, tc.problem.boundary);
    auto sys = assemble_system(tc.problem, DiscretizationConfig::from_kq(1, 3), mesh);
    std::vector<double> dirichlet(sys.n_interp_nodes());
    for (int i = 0; i < sys.n_interp_nodes(); ++i)
        dirichlet[i] = tc.lifting.ubar.value(sys.space_U.nodes[i]);
    auto u_star = pg_solve(sys, dirichlet);
    CHECK(compute_residuals(sys, u_star).loss <= 1e-20);
}

TEST_CASE("interpolated training is deterministic and never calls the jacobian") {
    auto tc = case_zero_data(1);
    auto mesh = build_interval_mesh(2, 0.0, 1.0);
    auto sys = assemble_system(tc.problem, DiscretizationConfig::from_kq(1, 3), mesh);
    auto net = init_weights({1, 8, 1}, Activation::tanh, 11);
    TrainingConfig cfg = quick_config(40, 40);

    auto calls_before = jacobian_call_count();
    auto run1 = train_ivpinn(sys, tc.lifting, net, cfg);
    CHECK(jacobian_call_count() == calls_before);

    auto run2 = train_ivpinn(sys, tc.lifting, net, cfg);
    REQUIRE(run1.history.entries.size() == run2.history.entries.size());
    for (std::size_t i = 0; i < run1.history.entries.size(); ++i) {
        CHECK(run1.history.entries[i].loss == run2.history.entries[i].loss);
        CHECK(run1.history.entries[i].phase == run2.history.entries[i].phase);
    }
    CHECK(run1.net.to_flat() == run2.net.to_flat());
}

TEST_CASE("1d zero-data training drives the solution to numerical zero") {
    auto tc = case_zero_data(1);
    auto mesh = build_interval_mesh(2, 0.0, 1.0);  // H = 1/2, h = 1/8
    auto sys = assemble_system(tc.problem, DiscretizationConfig::from_kq(1, 3), mesh);
    auto net = init_weights({1, 10, 10, 1}, Activation::tanh, 3);
    TrainingConfig cfg = quick_config(300, 400);
    cfg.grad_tol = 1e-14;
    auto run = train_ivpinn(sys, tc.lifting, net, cfg);
    CHECK(run.final_loss <= run.history.entries.front().loss);

    auto u = interpolation_node_values(sys, tc.lifting, run.net);
    auto em = build_error_measure(sys.space_U, sys.config.q + 2);
    CHECK(h1_norm(em, u) <= 1e-5);
}

TEST_CASE("adam loss after the full phase does not exceed the first epoch") {
    auto tc = case_zero_data(1);
    auto mesh = build_interval_mesh(4, 0.0, 1.0);
    auto sys = assemble_system(tc.problem, DiscretizationConfig::from_kq(1, 3), mesh);
    auto net = init_weights({1, 10, 1}, Activation::tanh, 17);
    TrainingConfig cfg = quick_config(150, 0);
    cfg.second_order = SecondOrderMethod::none;
    auto run = train_ivpinn(sys, tc.lifting, net, cfg);
    CHECK(run.history.entries.back().loss <= run.history.entries.front().loss);
}

TEST_CASE("parametric training with one parameter reduces the loss sharply") {
    auto tc = case_parametric_nonlinear(1.0);
    auto mesh = build_structured_mesh(2, 2, tc.problem.domain, tc.problem.boundary);
    auto sys = assemble_system(tc.problem, DiscretizationConfig::from_kq(1, 3), mesh);
    auto net = init_weights({3, 8, 8, 1}, Activation::tanh, 5);
    TrainingConfig cfg = quick_config(200, 200);
    auto run = train_parametric({&sys}, {&tc.lifting}, net, cfg);
    CHECK(run.final_loss < 1e-2 * run.history.entries.front().loss);
}

TEST_CASE("non-interpolated error stays within 10x of the interpolated one") {
    auto tc = case_smooth();
    auto mesh = build_structured_mesh(2, 2, tc.problem.domain, tc.problem.boundary);
    auto sys = assemble_system(tc.problem, DiscretizationConfig::from_kq(1, 3), mesh);
    auto em = build_error_measure(sys.space_U, sys.config.q + 2);

    TrainingConfig cfg;
    cfg.adam_epochs = 1200;
    cfg.adam_lr0 = 2e-3;
    cfg.second_order_max_iters = 2500;
    cfg.lbfgs_memory = 30;
    cfg.grad_tol = 1e-12;
    cfg.stagnation_patience = 60;
    cfg.seed = 4;

    auto net = init_weights({2, 20, 20, 20, 1}, Activation::tanh, cfg.seed);
    auto interp = train_ivpinn(sys, tc.lifting, net, cfg);
    auto u_interp = interpolation_node_values(sys, tc.lifting, interp.net);
    double err_interp = h1_l2_error(em, u_interp, *tc.problem.exact).h1;

    auto noninterp = train_vpinn_noninterp(sys, tc.lifting, net, cfg);
    // the non-interpolated solution is the network itself
    std::vector<double> coords;
    for (const auto& p : em.points) {
        coords.push_back(p.x);
        coords.push_back(p.y);
    }
    MlpEvalCache cache;
    std::vector<double> jac;
    auto vals = mlp_forward_cached(noninterp.net, coords, cache, true, &jac);
    std::vector<Vec2> grads(em.points.size());
    for (std::size_t i = 0; i < em.points.size(); ++i) grads[i] = {jac[2 * i], jac[2 * i + 1]};
    auto bw = apply_B(tc.lifting, em.points, vals, grads);
    double err_noninterp = h1_l2_error_values(em, bw.values, bw.grads, *tc.problem.exact).h1;

    CAPTURE(err_interp);
    CAPTURE(err_noninterp);
    CHECK(err_noninterp <= 10.0 * err_interp);
    CHECK(err_interp <= 10.0 * err_noninterp);
}

TEST_CASE("history CSV and h1 recording") {
    auto tc = case_zero_data(1);
    auto mesh = build_interval_mesh(2, 0.0, 1.0);
    auto sys = assemble_system(tc.problem, DiscretizationConfig::from_kq(1, 3), mesh);
    auto net = init_weights({1, 6, 1}, Activation::tanh, 19);
    TrainingConfig cfg = quick_config(10, 5);
    cfg.record_h1 = true;
    auto em = build_error_measure(sys.space_U, sys.config.q + 2);
    NodeObserver obs = [&](std::span<const double> u) { return h1_norm(em, u); };
    auto run = train_ivpinn(sys, tc.lifting, net, cfg, &obs);
    REQUIRE(!run.history.entries.empty());
    for (const auto& e : run.history.entries) CHECK(std::isfinite(e.h1_error));

    write_history_csv(run.history, "test_history.csv");
    std::remove("test_history.csv");
}
