#include "ivpinn/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace ivpinn {

void TrainingConfig::validate() const {
    if (!(wolfe_c1 > 0.0 && wolfe_c1 < wolfe_c2 && wolfe_c2 < 1.0))
        throw std::invalid_argument("TrainingConfig: need 0 < c1 < c2 < 1");
    if (!(adam_lr0 > 0.0)) throw std::invalid_argument("TrainingConfig: positive learning rate required");
    if (adam_epochs < 0 || second_order_max_iters < 0 || lbfgs_memory < 1)
        throw std::invalid_argument("TrainingConfig: bad iteration limits");
}

void write_history_csv(const TrainingHistory& history, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_history_csv: cannot open " + path);
    out.precision(16);
    out << "epoch,loss,phase,elapsed_seconds,h1_error\n";
    for (const auto& e : history.entries) {
        out << e.epoch << ',' << e.loss << ',' << e.phase << ',' << e.elapsed_seconds << ',';
        if (std::isfinite(e.h1_error)) out << e.h1_error;
        out << '\n';
    }
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

double adam_minimize(const Objective& obj, std::vector<double>& x, const TrainingConfig& cfg,
                     TrainingHistory& history, const std::function<double()>* observer) {
    const auto t0 = Clock::now();
    const std::size_t n = x.size();
    std::vector<double> g(n), m(n, 0.0), v(n, 0.0);
    std::vector<double> checkpoint;
    int epoch0 = history.entries.empty() ? 0 : history.entries.back().epoch;
    double loss = 0.0;

    for (int t = 1; t <= cfg.adam_epochs; ++t) {
        loss = obj(x, g);
        if (!std::isfinite(loss)) {
            if (!checkpoint.empty()) x = checkpoint;
            history.aborted_nonfinite = true;
            return loss;
        }
        HistoryEntry e{epoch0 + t, loss, 'A', seconds_since(t0)};
        if (observer != nullptr) e.h1_error = (*observer)();
        history.entries.push_back(e);
        if (t % std::max(1, cfg.checkpoint_every) == 0) checkpoint = x;

        const double lr = cfg.adam_lr0 * std::pow(0.5, (t - 1) / cfg.lr_half_life);
        const double bc1 = 1.0 - std::pow(cfg.adam_beta1, t);
        const double bc2 = 1.0 - std::pow(cfg.adam_beta2, t);
        for (std::size_t i = 0; i < n; ++i) {
            m[i] = cfg.adam_beta1 * m[i] + (1.0 - cfg.adam_beta1) * g[i];
            v[i] = cfg.adam_beta2 * v[i] + (1.0 - cfg.adam_beta2) * g[i] * g[i];
            x[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + cfg.adam_eps);
        }
    }
    return loss;
}

namespace {

struct LineSearchPoint {
    double alpha = 0.0;
    double f = 0.0;
    double dphi = 0.0;
};

// Strong-Wolfe line search (bracket + zoom, quadratic interpolation with a
// bisection safeguard). Returns alpha > 0 on success; 0 if no acceptable step
// exists along d.
double strong_wolfe(const Objective& obj, std::span<const double> x0, std::span<const double> d,
                    double f0, double dphi0, const TrainingConfig& cfg, std::vector<double>& x_trial,
                    std::vector<double>& g_trial, double& f_out) {
    const std::size_t n = x0.size();
    auto eval = [&](double a) {
        for (std::size_t i = 0; i < n; ++i) x_trial[i] = x0[i] + a * d[i];
        double f = obj(x_trial, g_trial);
        double dphi = 0.0;
        for (std::size_t i = 0; i < n; ++i) dphi += g_trial[i] * d[i];
        return LineSearchPoint{a, f, dphi};
    };
    const double c1 = cfg.wolfe_c1, c2 = cfg.wolfe_c2;
    auto armijo_ok = [&](const LineSearchPoint& p) { return p.f <= f0 + c1 * p.alpha * dphi0; };
    auto curvature_ok = [&](const LineSearchPoint& p) { return std::abs(p.dphi) <= -c2 * dphi0; };

    auto zoom = [&](LineSearchPoint lo, LineSearchPoint hi) -> double {
        for (int it = 0; it < 30; ++it) {
            double a = 0.5 * (lo.alpha + hi.alpha);
            double denom = 2.0 * (hi.f - lo.f - lo.dphi * (hi.alpha - lo.alpha));
            if (denom != 0.0) {
                double cand =
                    lo.alpha - lo.dphi * (hi.alpha - lo.alpha) * (hi.alpha - lo.alpha) / denom;
                double lo_a = std::min(lo.alpha, hi.alpha), hi_a = std::max(lo.alpha, hi.alpha);
                double margin = 0.1 * (hi_a - lo_a);
                if (std::isfinite(cand) && cand > lo_a + margin && cand < hi_a - margin) a = cand;
            }
            LineSearchPoint p = eval(a);
            if (!std::isfinite(p.f)) {
                hi = p;
                continue;
            }
            if (!armijo_ok(p) || p.f >= lo.f) {
                hi = p;
            } else {
                if (curvature_ok(p)) {
                    f_out = p.f;
                    return p.alpha;
                }
                if (p.dphi * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
                lo = p;
            }
            if (std::abs(hi.alpha - lo.alpha) < 1e-14 * std::max(1.0, std::abs(lo.alpha))) break;
        }
        // fall back to the best sufficient-decrease point if curvature never held
        if (lo.alpha > 0.0 && armijo_ok(lo) && lo.f < f0) {
            LineSearchPoint p = eval(lo.alpha);
            f_out = p.f;
            return p.alpha;
        }
        return 0.0;
    };

    LineSearchPoint prev{0.0, f0, dphi0};
    double a = 1.0;
    const double a_max = 1e4;
    for (int it = 0; it < 20; ++it) {
        LineSearchPoint p = eval(a);
        if (!std::isfinite(p.f)) {
            a *= 0.25;
            continue;
        }
        if (!armijo_ok(p) || (it > 0 && p.f >= prev.f)) return zoom(prev, p);
        if (curvature_ok(p)) {
            f_out = p.f;
            return p.alpha;
        }
        if (p.dphi >= 0.0) return zoom(p, prev);
        prev = p;
        if (a >= a_max) break;
        a = std::min(2.0 * a, a_max);
    }
    return 0.0;
}

}  // namespace

double second_order_minimize(const Objective& obj, std::vector<double>& x, const TrainingConfig& cfg,
                             TrainingHistory& history, const std::function<double()>* observer) {
    const auto t0 = Clock::now();
    const std::size_t n = x.size();
    SecondOrderMethod method = cfg.second_order;
    if (method == SecondOrderMethod::none)
        return history.entries.empty() ? 0.0 : history.entries.back().loss;
    if (method == SecondOrderMethod::bfgs && n > 20000) method = SecondOrderMethod::lbfgs;
    const char phase = method == SecondOrderMethod::bfgs ? 'B' : 'L';

    std::vector<double> g(n), x_trial(n), g_trial(n), d(n);
    double f = obj(x, g);
    if (!std::isfinite(f)) {
        history.aborted_nonfinite = true;
        return f;
    }

    std::vector<double> hess;  // dense inverse Hessian (BFGS only)
    if (method == SecondOrderMethod::bfgs) {
        hess.assign(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) hess[i * n + i] = 1.0;
    }
    std::vector<std::vector<double>> s_hist, y_hist;
    std::vector<double> rho_hist;
    bool scaled = false;

    int epoch0 = history.entries.empty() ? 0 : history.entries.back().epoch;
    std::vector<double> checkpoint = x;
    int stagnant = 0;

    for (int it = 1; it <= cfg.second_order_max_iters; ++it) {
        double gnorm = norm2(g);
        if (gnorm <= cfg.grad_tol) break;

        if (method == SecondOrderMethod::bfgs) {
            for (std::size_t i = 0; i < n; ++i) {
                double s = 0.0;
                const double* row = &hess[i * n];
                for (std::size_t j = 0; j < n; ++j) s += row[j] * g[j];
                d[i] = -s;
            }
        } else {
            d = g;
            const int m = static_cast<int>(s_hist.size());
            std::vector<double> alpha(m);
            for (int i = m - 1; i >= 0; --i) {
                alpha[i] = rho_hist[i] * dot(s_hist[i], d);
                for (std::size_t j = 0; j < n; ++j) d[j] -= alpha[i] * y_hist[i][j];
            }
            if (m > 0) {
                double gamma = dot(s_hist[m - 1], y_hist[m - 1]) / dot(y_hist[m - 1], y_hist[m - 1]);
                for (auto& v : d) v *= gamma;
            }
            for (int i = 0; i < m; ++i) {
                double beta = rho_hist[i] * dot(y_hist[i], d);
                for (std::size_t j = 0; j < n; ++j) d[j] += s_hist[i][j] * (alpha[i] - beta);
            }
            for (auto& v : d) v = -v;
        }

        double dphi0 = dot(g, d);
        if (dphi0 >= 0.0) {  // lost descent; restart from steepest descent
            for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
            dphi0 = -gnorm * gnorm;
            if (method == SecondOrderMethod::bfgs) {
                std::fill(hess.begin(), hess.end(), 0.0);
                for (std::size_t i = 0; i < n; ++i) hess[i * n + i] = 1.0;
                scaled = false;
            } else {
                s_hist.clear();
                y_hist.clear();
                rho_hist.clear();
            }
        }

        double f_new = f;
        double alpha = strong_wolfe(obj, x, d, f, dphi0, cfg, x_trial, g_trial, f_new);
        if (alpha == 0.0) break;

        std::vector<double> s(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = x_trial[i] - x[i];
            y[i] = g_trial[i] - g[i];
        }
        double sy = dot(s, y);

        x = x_trial;
        g = g_trial;
        double f_prev = f;
        f = f_new;
        if (!std::isfinite(f)) {
            x = checkpoint;
            history.aborted_nonfinite = true;
            return f;
        }

        HistoryEntry e{epoch0 + it, f, phase, seconds_since(t0)};
        if (observer != nullptr) e.h1_error = (*observer)();
        history.entries.push_back(e);
        if (it % std::max(1, cfg.checkpoint_every) == 0) checkpoint = x;

        if (sy > 1e-12 * norm2(s) * norm2(y)) {
            if (method == SecondOrderMethod::bfgs) {
                if (!scaled) {
                    double gamma = sy / dot(y, y);
                    for (std::size_t i = 0; i < n; ++i) hess[i * n + i] = gamma;
                    scaled = true;
                }
                double rho = 1.0 / sy;
                std::vector<double> hy(n, 0.0);
                for (std::size_t i = 0; i < n; ++i) {
                    double acc = 0.0;
                    const double* row = &hess[i * n];
                    for (std::size_t j = 0; j < n; ++j) acc += row[j] * y[j];
                    hy[i] = acc;
                }
                double yhy = dot(y, hy);
                double coef = rho * rho * yhy + rho;
                for (std::size_t i = 0; i < n; ++i) {
                    double* row = &hess[i * n];
                    double si = s[i], hyi = hy[i];
                    for (std::size_t j = 0; j < n; ++j)
                        row[j] += coef * si * s[j] - rho * (si * hy[j] + hyi * s[j]);
                }
            } else {
                s_hist.push_back(std::move(s));
                y_hist.push_back(std::move(y));
                rho_hist.push_back(1.0 / sy);
                if (static_cast<int>(s_hist.size()) > cfg.lbfgs_memory) {
                    s_hist.erase(s_hist.begin());
                    y_hist.erase(y_hist.begin());
                    rho_hist.erase(rho_hist.begin());
                }
            }
        }

        double rel_drop = (f_prev - f) / std::max(1.0, std::abs(f_prev));
        stagnant = rel_drop <= cfg.stagnation_rtol ? stagnant + 1 : 0;
        if (stagnant >= cfg.stagnation_patience) break;
    }
    return f;
}

std::vector<double> interpolation_node_values(const AssembledSystem& system,
                                              const BoundaryLifting& lifting, const MlpNetwork& net,
                                              double p_input, bool with_p_input) {
    const auto& nodes = system.space_U.nodes;
    const int dim = system.dim;
    const int in_dim = with_p_input ? dim + 1 : dim;
    if (net.input_dim() != in_dim)
        throw std::invalid_argument("interpolation_node_values: network input dim mismatch");
    std::vector<double> coords;
    coords.reserve(nodes.size() * in_dim);
    for (const auto& p : nodes) {
        coords.push_back(p.x);
        if (dim == 2) coords.push_back(p.y);
        if (with_p_input) coords.push_back(p_input);
    }
    auto w = mlp_forward(net, coords);
    std::vector<double> u(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i)
        u[i] = lifting.ubar.value(nodes[i]) + lifting.phi.value(nodes[i]) * w[i];
    return u;
}

namespace {

struct IvpinnLossState {
    const AssembledSystem* system;
    MlpNetwork worker;
    std::vector<double> coords, phi, ubar, u_nodes;
};

struct NoninterpLossState {
    const AssembledSystem* system;
    MlpNetwork worker;
    std::vector<double> coords, phi, phi_x, phi_y, ubar, ubar_x, ubar_y, u_nodes;
    const BoundaryLifting* lifting;
};

struct ParametricLossState {
    std::vector<const AssembledSystem*> systems;
    MlpNetwork worker;
    std::vector<double> coords;
    std::vector<std::vector<double>> phi, ubar;
    std::vector<double> u_nodes;  // of the last parameter evaluated
};

}  // namespace

LossHandle make_ivpinn_loss(const AssembledSystem& system, const BoundaryLifting& lifting,
                            const MlpNetwork& prototype) {
    if (prototype.input_dim() != system.dim)
        throw std::invalid_argument("make_ivpinn_loss: network input dim must match the mesh dim");
    auto st = std::make_shared<IvpinnLossState>();
    st->system = &system;
    st->worker = prototype;
    const auto& nodes = system.space_U.nodes;
    st->phi.resize(nodes.size());
    st->ubar.resize(nodes.size());
    st->u_nodes.resize(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        st->coords.push_back(nodes[i].x);
        if (system.dim == 2) st->coords.push_back(nodes[i].y);
        st->phi[i] = lifting.phi.value(nodes[i]);
        st->ubar[i] = lifting.ubar.value(nodes[i]);
    }

    LossHandle handle;
    handle.n_weights = prototype.n_weights();
    handle.state = st;
    handle.u_nodes = [st]() { return std::span<const double>(st->u_nodes); };
    handle.fn = [st](std::span<const double> x, std::span<double> grad) {
        st->worker.from_flat(x);
        MlpEvalCache cache;
        auto w = mlp_forward_cached(st->worker, st->coords, cache, false, nullptr);
        for (std::size_t i = 0; i < st->u_nodes.size(); ++i)
            st->u_nodes[i] = st->ubar[i] + st->phi[i] * w[i];
        auto rep = compute_residuals(*st->system, st->u_nodes);
        std::vector<double> cot(st->u_nodes.size());
        for (std::size_t i = 0; i < cot.size(); ++i) cot[i] = rep.dloss_du[i] * st->phi[i];
        auto gw = mlp_weight_gradient_general(st->worker, cache, cot, {});
        std::copy(gw.begin(), gw.end(), grad.begin());
        return rep.loss;
    };
    return handle;
}

LossHandle make_vpinn_noninterp_loss(const AssembledSystem& system, const BoundaryLifting& lifting,
                                     const MlpNetwork& prototype) {
    if (prototype.activation != Activation::tanh)
        throw std::invalid_argument("make_vpinn_noninterp_loss: tanh activation required");
    if (system.nonlinear)
        throw std::invalid_argument("make_vpinn_noninterp_loss: linear problems only");
    if (prototype.input_dim() != system.dim)
        throw std::invalid_argument("make_vpinn_noninterp_loss: network input dim mismatch");

    auto st = std::make_shared<NoninterpLossState>();
    st->system = &system;
    st->worker = prototype;
    st->lifting = &lifting;
    const int n_q = static_cast<int>(system.quad_points.size());
    const int dim = system.dim;
    st->phi.resize(n_q);
    st->phi_x.resize(n_q);
    st->phi_y.resize(n_q);
    st->ubar.resize(n_q);
    st->ubar_x.resize(n_q);
    st->ubar_y.resize(n_q);
    for (int i = 0; i < n_q; ++i) {
        Vec2 p = system.quad_points[i];
        st->coords.push_back(p.x);
        if (dim == 2) st->coords.push_back(p.y);
        st->phi[i] = lifting.phi.value(p);
        Vec2 pg = lifting.phi.grad(p);
        st->phi_x[i] = pg.x;
        st->phi_y[i] = pg.y;
        st->ubar[i] = lifting.ubar.value(p);
        Vec2 ug = lifting.ubar.grad(p);
        st->ubar_x[i] = ug.x;
        st->ubar_y[i] = ug.y;
    }

    LossHandle handle;
    handle.n_weights = prototype.n_weights();
    handle.state = st;
    handle.u_nodes = [st]() {
        st->u_nodes = interpolation_node_values(*st->system, *st->lifting, st->worker);
        return std::span<const double>(st->u_nodes);
    };
    handle.fn = [st](std::span<const double> x, std::span<double> grad) {
        const AssembledSystem& sys = *st->system;
        const int dim = sys.dim;
        const int n_q = static_cast<int>(sys.quad_points.size());
        st->worker.from_flat(x);
        MlpEvalCache cache;
        std::vector<double> jac;
        auto w = mlp_forward_cached(st->worker, st->coords, cache, true, &jac);

        std::vector<double> t_x(n_q), t_y(n_q), t_v(n_q);
        for (int i = 0; i < n_q; ++i) {
            double wx = jac[static_cast<std::size_t>(i) * dim];
            double wy = dim == 2 ? jac[static_cast<std::size_t>(i) * dim + 1] : 0.0;
            double bw = st->ubar[i] + st->phi[i] * w[i];
            double bw_x = st->ubar_x[i] + st->phi[i] * wx + w[i] * st->phi_x[i];
            double bw_y = st->ubar_y[i] + st->phi[i] * wy + w[i] * st->phi_y[i];
            double wgt = sys.quad_weight[i];
            t_x[i] = wgt * sys.quad_mu[i] * bw_x;
            t_y[i] = wgt * sys.quad_mu[i] * bw_y;
            t_v[i] = wgt * (sys.quad_beta_x[i] * bw_x + sys.quad_beta_y[i] * bw_y +
                            sys.quad_sigma[i] * bw);
        }
        auto r = sys.test_dx.multiply_transpose(t_x);
        if (dim == 2) {
            auto ry = sys.test_dy.multiply_transpose(t_y);
            for (int i = 0; i < sys.n_test; ++i) r[i] += ry[i];
        }
        auto rv = sys.test_val.multiply_transpose(t_v);
        double loss = 0.0;
        std::vector<double> scaled(sys.n_test);
        for (int i = 0; i < sys.n_test; ++i) {
            r[i] = sys.b[i] - (r[i] + rv[i]);
            scaled[i] = r[i] / sys.gamma[i];
            loss += r[i] * scaled[i];
        }

        auto c_val = sys.test_val.multiply(scaled);
        auto c_dx = sys.test_dx.multiply(scaled);
        std::vector<double> c_dy(n_q, 0.0);
        if (dim == 2) c_dy = sys.test_dy.multiply(scaled);
        std::vector<double> cot_w(n_q), cot_jac(static_cast<std::size_t>(n_q) * dim, 0.0);
        for (int i = 0; i < n_q; ++i) {
            double wgt = -2.0 * sys.quad_weight[i];
            double c_bw = wgt * sys.quad_sigma[i] * c_val[i];
            double c_bwx = wgt * (sys.quad_mu[i] * c_dx[i] + sys.quad_beta_x[i] * c_val[i]);
            double c_bwy = wgt * (sys.quad_mu[i] * c_dy[i] + sys.quad_beta_y[i] * c_val[i]);
            cot_w[i] = st->phi[i] * c_bw + st->phi_x[i] * c_bwx + st->phi_y[i] * c_bwy;
            cot_jac[static_cast<std::size_t>(i) * dim] = st->phi[i] * c_bwx;
            if (dim == 2) cot_jac[static_cast<std::size_t>(i) * dim + 1] = st->phi[i] * c_bwy;
        }
        auto gw = mlp_weight_gradient_general(st->worker, cache, cot_w, cot_jac);
        std::copy(gw.begin(), gw.end(), grad.begin());
        return loss;
    };
    return handle;
}

LossHandle make_parametric_loss(const std::vector<const AssembledSystem*>& systems,
                                const std::vector<const BoundaryLifting*>& liftings,
                                const MlpNetwork& prototype) {
    if (systems.empty() || systems.size() != liftings.size())
        throw std::invalid_argument("make_parametric_loss: need matching systems and liftings");
    const AssembledSystem& first = *systems.front();
    if (prototype.input_dim() != first.dim + 1)
        throw std::invalid_argument("make_parametric_loss: network needs one extra parameter input");
    const int n_nodes = first.n_interp_nodes();
    for (const auto* s : systems)
        if (s->n_interp_nodes() != n_nodes)
            throw std::invalid_argument("make_parametric_loss: systems must share meshes");

    auto st = std::make_shared<ParametricLossState>();
    st->systems = systems;
    st->worker = prototype;
    const int n_p = static_cast<int>(systems.size());
    st->phi.assign(n_p, std::vector<double>(n_nodes));
    st->ubar.assign(n_p, std::vector<double>(n_nodes));
    st->u_nodes.resize(n_nodes);
    for (int k = 0; k < n_p; ++k)
        for (int i = 0; i < n_nodes; ++i) {
            Vec2 p = first.space_U.nodes[i];
            st->coords.push_back(p.x);
            if (first.dim == 2) st->coords.push_back(p.y);
            st->coords.push_back(systems[k]->p_param);
            st->phi[k][i] = liftings[k]->phi.value(p);
            st->ubar[k][i] = liftings[k]->ubar.value(p);
        }

    LossHandle handle;
    handle.n_weights = prototype.n_weights();
    handle.state = st;
    handle.u_nodes = [st]() { return std::span<const double>(st->u_nodes); };
    handle.fn = [st, n_p, n_nodes](std::span<const double> x, std::span<double> grad) {
        st->worker.from_flat(x);
        MlpEvalCache cache;
        auto w = mlp_forward_cached(st->worker, st->coords, cache, false, nullptr);
        double loss = 0.0;
        std::vector<double> cot(static_cast<std::size_t>(n_p) * n_nodes);
        for (int k = 0; k < n_p; ++k) {
            for (int i = 0; i < n_nodes; ++i)
                st->u_nodes[i] =
                    st->ubar[k][i] + st->phi[k][i] * w[static_cast<std::size_t>(k) * n_nodes + i];
            auto rep = compute_residuals(*st->systems[k], st->u_nodes);
            loss += rep.loss;
            for (int i = 0; i < n_nodes; ++i)
                cot[static_cast<std::size_t>(k) * n_nodes + i] = rep.dloss_du[i] * st->phi[k][i];
        }
        auto gw = mlp_weight_gradient_general(st->worker, cache, cot, {});
        std::copy(gw.begin(), gw.end(), grad.begin());
        return loss;
    };
    return handle;
}

namespace {

TrainResult run_phases(const LossHandle& loss, MlpNetwork net, const TrainingConfig& cfg,
                       const NodeObserver* h1_of_nodes) {
    std::function<double()> observer;
    const std::function<double()>* observer_ptr = nullptr;
    if (h1_of_nodes != nullptr && cfg.record_h1) {
        observer = [&loss, h1_of_nodes]() { return (*h1_of_nodes)(loss.u_nodes()); };
        observer_ptr = &observer;
    }

    TrainResult result;
    std::vector<double> x = net.to_flat();
    TrainingHistory history;
    adam_minimize(loss.fn, x, cfg, history, observer_ptr);
    double f = std::numeric_limits<double>::quiet_NaN();
    if (!history.aborted_nonfinite) f = second_order_minimize(loss.fn, x, cfg, history, observer_ptr);
    net.from_flat(x);
    result.net = std::move(net);
    if (std::isfinite(f)) {
        std::vector<double> g(x.size());
        result.final_loss = loss.fn(x, g);
    } else {
        result.final_loss = f;
    }
    result.history = std::move(history);
    return result;
}

}  // namespace

TrainResult train_ivpinn(const AssembledSystem& system, const BoundaryLifting& lifting,
                         MlpNetwork net, const TrainingConfig& cfg, const NodeObserver* h1_of_nodes) {
    cfg.validate();
    auto loss = make_ivpinn_loss(system, lifting, net);
    return run_phases(loss, std::move(net), cfg, h1_of_nodes);
}

TrainResult train_vpinn_noninterp(const AssembledSystem& system, const BoundaryLifting& lifting,
                                  MlpNetwork net, const TrainingConfig& cfg,
                                  const NodeObserver* h1_of_nodes) {
    cfg.validate();
    auto loss = make_vpinn_noninterp_loss(system, lifting, net);
    return run_phases(loss, std::move(net), cfg, h1_of_nodes);
}

TrainResult train_parametric(const std::vector<const AssembledSystem*>& systems,
                             const std::vector<const BoundaryLifting*>& liftings, MlpNetwork net,
                             const TrainingConfig& cfg) {
    cfg.validate();
    auto loss = make_parametric_loss(systems, liftings, net);
    return run_phases(loss, std::move(net), cfg, nullptr);
}

}  // namespace ivpinn
