#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <stdexcept>

#include "ivpinn/assembly.hpp"

using namespace ivpinn;

namespace {

ProblemDefinition poisson_problem(BoundarySpec boundary, std::function<double(Vec2)> f) {
    ProblemDefinition pr;
    pr.dim = 2;
    pr.domain = Rect{};
    pr.boundary = boundary;
    pr.mu = [](Vec2) { return 1.0; };
    pr.beta = [](Vec2) { return Vec2{0.0, 0.0}; };
    pr.sigma = [](Vec2) { return 0.0; };
    pr.f = std::move(f);
    return pr;
}

// independent P1 stiffness oracle: per-element gradients from the inverse of
// the [1 x y] Vandermonde, entries = area * grad_a . grad_b
std::map<std::pair<int, int>, double> p1_stiffness(const Mesh& mesh) {
    std::map<std::pair<int, int>, double> k;
    for (int e = 0; e < mesh.n_elements(); ++e) {
        const auto& el = mesh.elements[e];
        Vec2 p[3] = {mesh.vertices[el[0]], mesh.vertices[el[1]], mesh.vertices[el[2]]};
        double det = (p[1].x - p[0].x) * (p[2].y - p[0].y) - (p[2].x - p[0].x) * (p[1].y - p[0].y);
        double area = 0.5 * det;
        Vec2 grad[3];
        for (int a = 0; a < 3; ++a) {
            Vec2 q1 = p[(a + 1) % 3], q2 = p[(a + 2) % 3];
            grad[a] = {(q1.y - q2.y) / det, (q2.x - q1.x) / det};
        }
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                k[{el[a], el[b]}] += area * (grad[a].x * grad[b].x + grad[a].y * grad[b].y);
    }
    return k;
}

int node_at(const FeSpace& sp, Vec2 p) {
    for (int i = 0; i < sp.n_nodes(); ++i)
        if (std::abs(sp.nodes[i].x - p.x) < 1e-12 && std::abs(sp.nodes[i].y - p.y) < 1e-12) return i;
    throw std::runtime_error("node_at: no node there");
}

}  // namespace

TEST_CASE("config validation") {
    CHECK_NOTHROW(DiscretizationConfig::from_kq(1, 3).validate());
    CHECK_NOTHROW(DiscretizationConfig::from_kq(1, 5).validate());
    CHECK_NOTHROW(DiscretizationConfig::from_kq(2, 5).validate());
    CHECK_THROWS_AS(DiscretizationConfig::from_kq(2, 3).validate(), std::invalid_argument);
    DiscretizationConfig bad{1, 3, 3};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("zero data gives a zero load vector") {
    BoundarySpec spec;
    spec.left = BoundaryTag::dirichlet;
    spec.right = spec.top = spec.bottom = BoundaryTag::neumann;
    auto pr = poisson_problem(spec, [](Vec2) { return 0.0; });
    auto mesh = build_structured_mesh(2, 2, pr.domain, spec);
    auto sys = assemble_system(pr, DiscretizationConfig::from_kq(1, 3), mesh);
    for (double v : sys.b) CHECK(v == 0.0);

    std::vector<double> zeros(sys.n_interp_nodes(), 0.0);
    auto rep = compute_residuals(sys, zeros);
    CHECK(rep.loss == 0.0);
    for (double v : rep.r) CHECK(v == 0.0);
}

TEST_CASE("P1 Poisson operator matches the hand-assembled stiffness matrix") {
    BoundarySpec spec;
    spec.left = BoundaryTag::dirichlet;
    spec.right = spec.top = spec.bottom = BoundaryTag::neumann;
    auto pr = poisson_problem(spec, [](Vec2) { return 0.0; });
    auto mesh = build_structured_mesh(2, 2, pr.domain, spec);
    auto sys = assemble_system_custom(pr, mesh, 1, 3, 1, 1);

    auto oracle = p1_stiffness(mesh);
    // map vertex ids to space node ids by coordinates
    std::vector<int> vnode(mesh.n_vertices());
    for (int v = 0; v < mesh.n_vertices(); ++v) vnode[v] = node_at(sys.space_V, mesh.vertices[v]);

    std::map<std::pair<int, int>, double> got;
    for (int row = 0; row < sys.A_lin.n_rows; ++row)
        for (int k = sys.A_lin.row_ptr[row]; k < sys.A_lin.row_ptr[row + 1]; ++k)
            got[{sys.row_to_node[row], sys.A_lin.col[k]}] = sys.A_lin.val[k];

    for (const auto& [vw, value] : oracle) {
        int ni = vnode[vw.first], nj = vnode[vw.second];
        int row = sys.test_row_of_node[ni];
        if (row < 0) continue;  // Dirichlet test function dropped
        auto it = got.find({ni, nj});
        double have = it == got.end() ? 0.0 : it->second;
        CHECK(have == doctest::Approx(value).epsilon(1e-12));
    }
}

TEST_CASE("mass term against closed-form P1 integrals") {
    // mu = 1, beta = 0, sigma = 1: (A c1)_i = c * int phi_i = c * incident_area / 3
    ProblemDefinition pr = poisson_problem(BoundarySpec::all_dirichlet(), [](Vec2) { return 0.0; });
    BoundarySpec spec;
    spec.left = BoundaryTag::dirichlet;
    spec.right = spec.top = spec.bottom = BoundaryTag::neumann;
    pr.boundary = spec;
    pr.sigma = [](Vec2) { return 1.0; };
    auto mesh = build_structured_mesh(2, 2, pr.domain, spec);
    auto sys = assemble_system_custom(pr, mesh, 1, 3, 1, 1);

    const double c = 2.5;
    std::vector<double> cvec(sys.n_interp_nodes(), c);
    auto av = sys.A_lin.multiply(cvec);

    std::vector<double> incident(mesh.n_vertices(), 0.0);
    for (int e = 0; e < mesh.n_elements(); ++e)
        for (int a = 0; a < 3; ++a) incident[mesh.elements[e][a]] += mesh.element_measure(e);
    for (int v = 0; v < mesh.n_vertices(); ++v) {
        int node = node_at(sys.space_V, mesh.vertices[v]);
        int row = sys.test_row_of_node[node];
        if (row < 0) continue;
        CHECK(av[row] == doctest::Approx(c * incident[v] / 3.0).epsilon(1e-12));
    }
}

TEST_CASE("pure-diffusion operator is symmetric when V_h equals U_H") {
    auto pr = poisson_problem(BoundarySpec::all_dirichlet(), [](Vec2) { return 1.0; });
    auto mesh = build_structured_mesh(3, 3, pr.domain, pr.boundary);
    auto sys = assemble_system_custom(pr, mesh, 2, 5, 2, 1);
    // same mesh, same degree: node sets coincide
    REQUIRE(sys.space_U.n_nodes() == sys.space_V.n_nodes());
    for (int row = 0; row < sys.A_lin.n_rows; ++row) {
        int ni = sys.row_to_node[row];
        for (int k = sys.A_lin.row_ptr[row]; k < sys.A_lin.row_ptr[row + 1]; ++k) {
            int nj = sys.A_lin.col[k];
            int row_j = sys.test_row_of_node[nj];
            if (row_j < 0) continue;
            double mirror = 0.0;
            for (int kk = sys.A_lin.row_ptr[row_j]; kk < sys.A_lin.row_ptr[row_j + 1]; ++kk)
                if (sys.A_lin.col[kk] == ni) mirror = sys.A_lin.val[kk];
            CHECK(sys.A_lin.val[k] == doctest::Approx(mirror).epsilon(1e-12));
        }
    }
}

TEST_CASE("quadrature consistency: polynomial data integrated exactly") {
    // integrands of total degree <= 3 are identical under the q=3 and q=11 rules
    ProblemDefinition pr;
    pr.dim = 2;
    pr.domain = Rect{};
    BoundarySpec spec;
    spec.left = spec.right = BoundaryTag::dirichlet;
    spec.bottom = spec.top = BoundaryTag::neumann;
    pr.boundary = spec;
    pr.mu = [](Vec2 p) { return 1.0 + p.x; };
    pr.beta = [](Vec2 p) { return Vec2{p.y, p.x}; };
    pr.sigma = [](Vec2) { return 2.0; };
    pr.f = [](Vec2 p) { return p.x; };

    auto mesh = build_structured_mesh(2, 2, pr.domain, spec);
    auto coarse_sys = assemble_system_custom(pr, mesh, 1, 3, 4, 4);
    auto fine_sys = assemble_system_custom(pr, mesh, 1, 11, 4, 4);

    // nodal values of u = x^2 + y (degree 2 <= k_int)
    std::vector<double> u(coarse_sys.n_interp_nodes());
    for (int i = 0; i < coarse_sys.n_interp_nodes(); ++i) {
        Vec2 p = coarse_sys.space_U.nodes[i];
        u[i] = p.x * p.x + p.y;
    }
    auto a3 = coarse_sys.A_lin.multiply(u);
    auto a11 = fine_sys.A_lin.multiply(u);
    REQUIRE(a3.size() == a11.size());
    for (std::size_t i = 0; i < a3.size(); ++i)
        CHECK(a3[i] == doctest::Approx(a11[i]).epsilon(1e-11));
    for (std::size_t i = 0; i < coarse_sys.b.size(); ++i)
        CHECK(coarse_sys.b[i] == doctest::Approx(fine_sys.b[i]).epsilon(1e-11));
}

TEST_CASE("petrov-galerkin oracle residual vanishes") {
    auto pr = poisson_problem(BoundarySpec::all_dirichlet(), [](Vec2 p) {
        return std::sin(3.0 * p.x) * p.y;
    });
    auto mesh = build_structured_mesh(2, 2, pr.domain, pr.boundary);
    auto sys = assemble_system(pr, DiscretizationConfig::from_kq(1, 3), mesh);

    std::vector<double> dirichlet(sys.n_interp_nodes(), 0.0);
    auto u = pg_solve(sys, dirichlet);
    auto rep = compute_residuals(sys, u);
    CHECK(rep.loss <= 1e-20);
}

TEST_CASE("pg_solve rejects non-square systems") {
    auto pr = poisson_problem(BoundarySpec::all_dirichlet(), [](Vec2) { return 1.0; });
    auto mesh = build_structured_mesh(2, 2, pr.domain, pr.boundary);
    auto sys = assemble_system(pr, DiscretizationConfig::from_kq(2, 5), mesh);
    std::vector<double> dirichlet(sys.n_interp_nodes(), 0.0);
    CHECK_THROWS_AS(pg_solve(sys, dirichlet), std::invalid_argument);
}

TEST_CASE("residual derivative matches finite differences (linear)") {
    auto pr = poisson_problem(BoundarySpec::all_dirichlet(), [](Vec2 p) { return p.x + p.y; });
    pr.sigma = [](Vec2 p) { return 1.0 + p.y; };
    pr.beta = [](Vec2 p) { return Vec2{0.5, -p.x}; };
    auto mesh = build_structured_mesh(2, 2, pr.domain, pr.boundary);
    auto sys = assemble_system(pr, DiscretizationConfig::from_kq(1, 3), mesh);

    std::mt19937_64 rng(5);
    auto uniform = [&rng]() { return (rng() >> 11) * 0x1.0p-53 - 0.5; };
    std::vector<double> u(sys.n_interp_nodes());
    for (auto& v : u) v = uniform();
    auto rep = compute_residuals(sys, u);
    const double d = 1e-6;
    for (int t = 0; t < 20; ++t) {
        int j = static_cast<int>(rng() % u.size());
        auto up = u, um = u;
        up[j] += d;
        um[j] -= d;
        double fd = (compute_residuals(sys, up).loss - compute_residuals(sys, um).loss) / (2 * d);
        CHECK(rep.dloss_du[j] == doctest::Approx(fd).epsilon(1e-7));
    }
}

TEST_CASE("residual derivative matches finite differences (nonlinear reaction)") {
    ProblemDefinition pr;
    pr.dim = 2;
    pr.domain = Rect{};
    pr.boundary = BoundarySpec::all_dirichlet();
    pr.nonlinear_reaction = true;
    pr.p_param = 1.3;
    pr.mu = [](Vec2) { return 1.0; };
    pr.beta = [](Vec2) { return Vec2{2.0, 3.0}; };
    pr.sigma = [](Vec2) { return 4.0; };
    pr.f = [](Vec2 p) { return p.x * p.y; };
    auto mesh = build_structured_mesh(2, 2, pr.domain, pr.boundary);
    auto sys = assemble_system(pr, DiscretizationConfig::from_kq(1, 3), mesh);
    REQUIRE(sys.nonlinear);

    std::mt19937_64 rng(9);
    auto uniform = [&rng]() { return (rng() >> 11) * 0x1.0p-53 - 0.5; };
    std::vector<double> u(sys.n_interp_nodes());
    for (auto& v : u) v = uniform();
    auto rep = compute_residuals(sys, u);
    const double d = 1e-6;
    for (int t = 0; t < 20; ++t) {
        int j = static_cast<int>(rng() % u.size());
        auto up = u, um = u;
        up[j] += d;
        um[j] -= d;
        double fd = (compute_residuals(sys, up).loss - compute_residuals(sys, um).loss) / (2 * d);
        CHECK(rep.dloss_du[j] == doctest::Approx(fd).epsilon(1e-7));
    }
}

TEST_CASE("inf-sup: broken pairing yields alpha = 0, sane pairing does not") {
    auto pr = poisson_problem(BoundarySpec::all_dirichlet(), [](Vec2) { return 0.0; });
    auto mesh = build_structured_mesh(2, 2, pr.domain, pr.boundary);

    // deliberately ill-posed: high-degree interpolation against P1 on the same mesh
    auto broken = assemble_system_custom(pr, mesh, 1, 3, 4, 1);
    auto rep_broken = compute_infsup(broken);
    CHECK(rep_broken.dim_U0 > rep_broken.dim_V);
    CHECK(rep_broken.alpha_tilde == 0.0);

    // V_h = U_H, plain Poisson: coercive, so alpha > 0
    auto mesh4 = build_structured_mesh(4, 4, pr.domain, pr.boundary);
    auto same = assemble_system_custom(pr, mesh4, 1, 3, 1, 1);
    auto rep_same = compute_infsup(same);
    CHECK(rep_same.alpha_tilde > 1e-3);
    CHECK(rep_same.c_h > 0.0);
    CHECK(rep_same.C_h >= rep_same.c_h);

    // a supported pairing at small size
    auto sys = assemble_system(pr, DiscretizationConfig::from_kq(1, 3), mesh);
    auto rep = compute_infsup(sys);
    CHECK(rep.dim_U0 <= rep.dim_V);
    CHECK(rep.alpha_tilde > 1e-3);
}

TEST_CASE("system dump writes triplets") {
    auto pr = poisson_problem(BoundarySpec::all_dirichlet(), [](Vec2) { return 1.0; });
    auto mesh = build_structured_mesh(2, 2, pr.domain, pr.boundary);
    auto sys = assemble_system(pr, DiscretizationConfig::from_kq(1, 3), mesh);
    std::string path = "test_dump_system.txt";
    dump_system(sys, path);
    std::FILE* f = std::fopen(path.c_str(), "r");
    REQUIRE(f != nullptr);
    std::fclose(f);
    std::remove(path.c_str());
}
