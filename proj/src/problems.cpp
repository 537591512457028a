#include "ivpinn/problem.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace ivpinn {

namespace {

// ---- smooth convergence case ------------------------------------------------
// u = sin(3.2 x (x - y)) cos(4.3 y + x) + sin(4.6 (x + 2y)) cos(2.6 (y - 2x))

struct SmoothDerivs {
    double u, ux, uy, uxx, uyy;
};

SmoothDerivs smooth_derivs(double x, double y) {
    // first term: sin(a) cos(b), a = 3.2 x^2 - 3.2 x y, b = 4.3 y + x
    double a = 3.2 * x * (x - y), b = 4.3 * y + x;
    double ax = 6.4 * x - 3.2 * y, ay = -3.2 * x, axx = 6.4, ayy = 0.0;
    double bx = 1.0, by = 4.3;
    double sa = std::sin(a), ca = std::cos(a), sb = std::sin(b), cb = std::cos(b);
    double t1 = sa * cb;
    double t1x = ca * ax * cb - sa * sb * bx;
    double t1y = ca * ay * cb - sa * sb * by;
    double t1xx = cb * (ca * axx - sa * ax * ax) - 2.0 * ca * sb * ax * bx - sa * cb * bx * bx;
    double t1yy = cb * (ca * ayy - sa * ay * ay) - 2.0 * ca * sb * ay * by - sa * cb * by * by;

    // second term: sin(c) cos(d), c = 4.6 x + 9.2 y, d = 2.6 y - 5.2 x
    double c = 4.6 * (x + 2.0 * y), d = 2.6 * (y - 2.0 * x);
    double cx = 4.6, cy = 9.2, dx = -5.2, dy = 2.6;
    double sc = std::sin(c), cc = std::cos(c), sd = std::sin(d), cd = std::cos(d);
    double t2 = sc * cd;
    double t2x = cc * cx * cd - sc * sd * dx;
    double t2y = cc * cy * cd - sc * sd * dy;
    double t2xx = -sc * cx * cx * cd - 2.0 * cc * sd * cx * dx - sc * cd * dx * dx;
    double t2yy = -sc * cy * cy * cd - 2.0 * cc * sd * cy * dy - sc * cd * dy * dy;

    return {t1 + t2, t1x + t2x, t1y + t2y, t1xx + t2xx, t1yy + t2yy};
}

double smooth_mu(Vec2 p) { return 2.0 + std::sin(p.x + 2.0 * p.y); }
Vec2 smooth_mu_grad(Vec2 p) {
    double c = std::cos(p.x + 2.0 * p.y);
    return {c, 2.0 * c};
}
Vec2 smooth_beta(Vec2 p) {
    return {std::sqrt(p.x - p.y * p.y + 5.0), std::sqrt(p.y - p.x * p.x + 5.0)};
}
double smooth_sigma(Vec2 p) { return std::exp(p.x / 2.0 - p.y / 3.0) + 2.0; }

// ---- corner singularity case -------------------------------------------------
// u = r^{2/3} sin((2/3)(theta + pi/2)), harmonic away from the origin corner

double corner_u(Vec2 p) {
    double r = std::hypot(p.x, p.y);
    if (r == 0.0) return 0.0;
    double theta = std::atan2(p.y, p.x);
    return std::pow(r, 2.0 / 3.0) * std::sin((2.0 / 3.0) * (theta + M_PI / 2.0));
}

Vec2 corner_grad(Vec2 p) {
    double r = std::hypot(p.x, p.y);
    if (r == 0.0) {
        // unbounded at the corner; flagged so accidental use is loud
        double inf = std::numeric_limits<double>::infinity();
        return {inf, inf};
    }
    double theta = std::atan2(p.y, p.x);
    double arg = (2.0 / 3.0) * (theta + M_PI / 2.0);
    double ur = (2.0 / 3.0) * std::pow(r, -1.0 / 3.0) * std::sin(arg);
    double ut_over_r = (2.0 / 3.0) * std::pow(r, -1.0 / 3.0) * std::cos(arg);
    double ct = std::cos(theta), st = std::sin(theta);
    return {ur * ct - ut_over_r * st, ur * st + ut_over_r * ct};
}

// ---- parametric nonlinear case ------------------------------------------------
// u = cos(5 (p x + y/2)) / (1 + p) + (x + y/2)^2

struct ParamDerivs {
    double u, ux, uy, uxx, uyy;
};

ParamDerivs param_derivs(double x, double y, double p) {
    double s = 5.0 * (p * x + 0.5 * y);
    double amp = 1.0 / (1.0 + p);
    double q = x + 0.5 * y;
    double u = amp * std::cos(s) + q * q;
    double ux = -5.0 * p * amp * std::sin(s) + 2.0 * q;
    double uy = -2.5 * amp * std::sin(s) + q;
    double uxx = -25.0 * p * p * amp * std::cos(s) + 2.0;
    double uyy = -6.25 * amp * std::cos(s) + 0.5;
    return {u, ux, uy, uxx, uyy};
}

// Transfinite bilinear blend of the boundary trace of a smooth field: equals
// the field on the whole boundary of the unit square.
ScalarField transfinite_blend(std::function<double(Vec2)> u, std::function<Vec2(Vec2)> du) {
    ScalarField f;
    f.value = [u](Vec2 p) {
        double x = p.x, y = p.y;
        double sides = (1.0 - x) * u({0.0, y}) + x * u({1.0, y}) + (1.0 - y) * u({x, 0.0}) +
                       y * u({x, 1.0});
        double corners = (1.0 - x) * (1.0 - y) * u({0.0, 0.0}) + x * (1.0 - y) * u({1.0, 0.0}) +
                         (1.0 - x) * y * u({0.0, 1.0}) + x * y * u({1.0, 1.0});
        return sides - corners;
    };
    f.grad = [u, du](Vec2 p) {
        double x = p.x, y = p.y;
        double gx = -u({0.0, y}) + u({1.0, y}) + (1.0 - y) * du({x, 0.0}).x + y * du({x, 1.0}).x;
        gx -= -(1.0 - y) * u({0.0, 0.0}) + (1.0 - y) * u({1.0, 0.0}) - y * u({0.0, 1.0}) +
              y * u({1.0, 1.0});
        double gy = (1.0 - x) * du({0.0, y}).y + x * du({1.0, y}).y - u({x, 0.0}) + u({x, 1.0});
        gy -= -(1.0 - x) * u({0.0, 0.0}) - x * u({1.0, 0.0}) + (1.0 - x) * u({0.0, 1.0}) +
              x * u({1.0, 1.0});
        return Vec2{gx, gy};
    };
    return f;
}

}  // namespace

TestCase case_smooth() {
    TestCase tc;
    tc.name = "smooth";
    tc.regularity_limit = 0.0;

    ProblemDefinition& pr = tc.problem;
    pr.dim = 2;
    pr.domain = Rect{};
    pr.boundary.left = pr.boundary.right = BoundaryTag::dirichlet;
    pr.boundary.bottom = pr.boundary.top = BoundaryTag::neumann;
    pr.mu = smooth_mu;
    pr.beta = smooth_beta;
    pr.sigma = smooth_sigma;
    pr.exact = ScalarField{[](Vec2 p) { return smooth_derivs(p.x, p.y).u; },
                           [](Vec2 p) {
                               auto d = smooth_derivs(p.x, p.y);
                               return Vec2{d.ux, d.uy};
                           }};
    pr.f = [](Vec2 p) {
        auto d = smooth_derivs(p.x, p.y);
        Vec2 dmu = smooth_mu_grad(p);
        Vec2 beta = smooth_beta(p);
        double diffusion = dmu.x * d.ux + dmu.y * d.uy + smooth_mu(p) * (d.uxx + d.uyy);
        return -diffusion + beta.x * d.ux + beta.y * d.uy + smooth_sigma(p) * d.u;
    };
    pr.psi = [](Vec2 p, Vec2 n) {
        auto d = smooth_derivs(p.x, p.y);
        return smooth_mu(p) * (d.ux * n.x + d.uy * n.y);
    };

    tc.lifting.phi = build_phi_rect(pr.domain, pr.boundary);
    // linear blend between the two Dirichlet sides x = 0 and x = 1
    tc.lifting.ubar = ScalarField{
        [](Vec2 p) {
            return (1.0 - p.x) * smooth_derivs(0.0, p.y).u + p.x * smooth_derivs(1.0, p.y).u;
        },
        [](Vec2 p) {
            auto l = smooth_derivs(0.0, p.y), r = smooth_derivs(1.0, p.y);
            return Vec2{r.u - l.u, (1.0 - p.x) * l.uy + p.x * r.uy};
        }};
    return tc;
}

TestCase case_corner_singularity() {
    TestCase tc;
    tc.name = "corner";
    tc.regularity_limit = 2.0 / 3.0;

    ProblemDefinition& pr = tc.problem;
    pr.dim = 2;
    pr.domain = Rect{};
    pr.boundary = BoundarySpec::all_dirichlet();
    pr.mu = [](Vec2) { return 1.0; };
    pr.beta = [](Vec2) { return Vec2{2.0, 3.0}; };
    pr.sigma = [](Vec2) { return 4.0; };
    pr.exact = ScalarField{corner_u, corner_grad};
    // the r^{2/3} part is harmonic, so L u = beta . grad u + sigma u
    pr.f = [](Vec2 p) {
        Vec2 g = corner_grad(p);
        return 2.0 * g.x + 3.0 * g.y + 4.0 * corner_u(p);
    };

    tc.lifting.phi = build_phi_rect(pr.domain, pr.boundary);
    tc.lifting.ubar = *pr.exact;  // boundary-compatible closed-form lifting
    return tc;
}

TestCase case_zero_data(int dim) {
    if (dim != 1 && dim != 2) throw std::invalid_argument("case_zero_data: dim must be 1 or 2");
    TestCase tc;
    tc.name = dim == 1 ? "zero-1d" : "zero-2d";
    tc.regularity_limit = 0.0;

    ProblemDefinition& pr = tc.problem;
    pr.dim = dim;
    pr.domain = Rect{};
    pr.boundary = BoundarySpec::all_dirichlet();
    pr.mu = [](Vec2) { return 1.0; };
    pr.beta = [](Vec2) { return Vec2{0.0, 0.0}; };
    pr.sigma = [](Vec2) { return 0.0; };
    pr.f = [](Vec2) { return 0.0; };
    pr.exact = zero_field();

    tc.lifting.phi = dim == 1 ? build_phi_interval(0.0, 1.0) : build_phi_rect(pr.domain, pr.boundary);
    tc.lifting.ubar = zero_field();
    return tc;
}

TestCase case_parametric_nonlinear(double p) {
    TestCase tc;
    tc.name = "parametric";
    tc.regularity_limit = 0.0;

    ProblemDefinition& pr = tc.problem;
    pr.dim = 2;
    pr.domain = Rect{};
    pr.boundary = BoundarySpec::all_dirichlet();
    pr.nonlinear_reaction = true;
    pr.p_param = p;
    pr.mu = [](Vec2) { return 1.0; };
    pr.beta = [](Vec2) { return Vec2{2.0, 3.0}; };
    pr.sigma = [](Vec2) { return 4.0; };
    auto value = [p](Vec2 q) { return param_derivs(q.x, q.y, p).u; };
    auto grad = [p](Vec2 q) {
        auto d = param_derivs(q.x, q.y, p);
        return Vec2{d.ux, d.uy};
    };
    pr.exact = ScalarField{value, grad};
    pr.f = [p](Vec2 q) {
        auto d = param_derivs(q.x, q.y, p);
        return -(d.uxx + d.uyy) + 2.0 * d.ux + 3.0 * d.uy + 4.0 * std::exp(-p * d.u * d.u);
    };

    tc.lifting.phi = build_phi_rect(pr.domain, pr.boundary);
    tc.lifting.ubar = transfinite_blend(value, grad);
    return tc;
}

std::vector<double> parametric_training_set(int n_p, double p_min, double p_max) {
    if (n_p < 1) throw std::invalid_argument("parametric_training_set: n_p must be >= 1");
    std::vector<double> ps(n_p);
    for (int i = 0; i < n_p; ++i)
        ps[i] = n_p == 1 ? p_min : p_min + (p_max - p_min) * i / (n_p - 1);
    return ps;
}

bool parametric_in_range(double p) { return p >= 0.5 && p <= 2.0; }

std::vector<std::string> registered_case_names() {
    return {"smooth", "corner", "zero-1d", "zero-2d", "parametric"};
}

TestCase case_by_name(const std::string& name) {
    if (name == "smooth") return case_smooth();
    if (name == "corner") return case_corner_singularity();
    if (name == "zero-1d") return case_zero_data(1);
    if (name == "zero-2d") return case_zero_data(2);
    if (name == "parametric") return case_parametric_nonlinear(1.0);
    auto at = name.find('@');
    if (at != std::string::npos && name.substr(0, at) == "parametric")
        return case_parametric_nonlinear(std::stod(name.substr(at + 1)));
    throw std::invalid_argument("unknown test case '" + name + "'");
}

double manufactured_consistency_error(const ProblemDefinition& problem, int n_points,
                                      std::uint64_t seed) {
    if (!problem.exact) throw std::invalid_argument("manufactured_consistency_error: no exact solution");
    const auto& exact = *problem.exact;
    std::mt19937_64 rng(seed);
    auto uniform = [&rng]() { return (rng() >> 11) * 0x1.0p-53; };
    const double d = 1e-5;
    // stay away from the boundary (and any corner singularity)
    auto sample = [&]() {
        Vec2 p;
        p.x = problem.domain.x0 + (0.1 + 0.8 * uniform()) * (problem.domain.x1 - problem.domain.x0);
        p.y = problem.dim == 1 ? 0.0
                               : problem.domain.y0 +
                                     (0.1 + 0.8 * uniform()) * (problem.domain.y1 - problem.domain.y0);
        return p;
    };
    auto flux_x = [&](Vec2 p) { return problem.mu(p) * exact.grad(p).x; };
    auto flux_y = [&](Vec2 p) { return problem.mu(p) * exact.grad(p).y; };

    double worst = 0.0;
    for (int t = 0; t < n_points; ++t) {
        Vec2 p = sample();
        double div = (flux_x({p.x + d, p.y}) - flux_x({p.x - d, p.y})) / (2.0 * d);
        if (problem.dim == 2) div += (flux_y({p.x, p.y + d}) - flux_y({p.x, p.y - d})) / (2.0 * d);
        Vec2 g = exact.grad(p);
        Vec2 beta = problem.beta(p);
        double u = exact.value(p);
        double reaction = problem.nonlinear_reaction
                              ? problem.sigma(p) * std::exp(-problem.p_param * u * u)
                              : problem.sigma(p) * u;
        double lu = -div + beta.x * g.x + beta.y * g.y + reaction;
        double fv = problem.f(p);
        worst = std::max(worst, std::abs(lu - fv) / std::max(1.0, std::abs(fv)));
    }
    return worst;
}

double exact_gradient_fd_error(const ProblemDefinition& problem, int n_points, std::uint64_t seed) {
    if (!problem.exact) throw std::invalid_argument("exact_gradient_fd_error: no exact solution");
    const auto& exact = *problem.exact;
    std::mt19937_64 rng(seed);
    auto uniform = [&rng]() { return (rng() >> 11) * 0x1.0p-53; };
    const double d = 1e-6;
    double worst = 0.0;
    for (int t = 0; t < n_points; ++t) {
        Vec2 p;
        p.x = problem.domain.x0 + (0.1 + 0.8 * uniform()) * (problem.domain.x1 - problem.domain.x0);
        p.y = problem.dim == 1 ? 0.0
                               : problem.domain.y0 +
                                     (0.1 + 0.8 * uniform()) * (problem.domain.y1 - problem.domain.y0);
        Vec2 g = exact.grad(p);
        double fdx = (exact.value({p.x + d, p.y}) - exact.value({p.x - d, p.y})) / (2.0 * d);
        double scale = std::max(1.0, std::abs(fdx));
        worst = std::max(worst, std::abs(g.x - fdx) / scale);
        if (problem.dim == 2) {
            double fdy = (exact.value({p.x, p.y + d}) - exact.value({p.x, p.y - d})) / (2.0 * d);
            worst = std::max(worst, std::abs(g.y - fdy) / std::max(1.0, std::abs(fdy)));
        }
    }
    return worst;
}

}  // namespace ivpinn
