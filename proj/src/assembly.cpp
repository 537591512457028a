#include "ivpinn/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

#include "ivpinn/quadrature.hpp"

namespace ivpinn {

void DiscretizationConfig::validate() const {
    if (k_test < 1) throw std::invalid_argument("DiscretizationConfig: k_test must be >= 1");
    if (q < 2 * k_test)
        throw std::invalid_argument("DiscretizationConfig: q >= 2 k_test required (q=" +
                                    std::to_string(q) + ", k_test=" + std::to_string(k_test) + ")");
    if (k_int != q + 2 - k_test)
        throw std::invalid_argument("DiscretizationConfig: k_int must equal q + 2 - k_test");
    const bool supported = (k_test == 1 && q == 3) || (k_test == 1 && q == 5) || (k_test == 2 && q == 5);
    if (!supported)
        throw std::invalid_argument(
            "DiscretizationConfig: supported (k_test, q) pairs are (1,3), (1,5), (2,5)");
}

namespace {

struct EdgeUse {
    int element = -1;
    int local_a = -1, local_b = -1;  // CCW-ordered vertex slots of the edge
};

std::map<std::pair<int, int>, EdgeUse> boundary_edge_elements(const Mesh& mesh) {
    std::map<std::pair<int, int>, EdgeUse> uses;
    for (int e = 0; e < mesh.n_elements(); ++e) {
        const auto& el = mesh.elements[e];
        for (int k = 0; k < 3; ++k) {
            int a = el[k], b = el[(k + 1) % 3];
            auto key = std::make_pair(std::min(a, b), std::max(a, b));
            auto it = uses.find(key);
            if (it == uses.end())
                uses[key] = {e, k, (k + 1) % 3};
            else
                it->second.element = -2;  // interior edge, seen twice
        }
    }
    return uses;
}

}  // namespace

AssembledSystem assemble_system_custom(const ProblemDefinition& problem, const Mesh& mesh_H,
                                       int k_test, int q, int k_int, int refine_factor) {
    if (problem.dim != mesh_H.dim)
        throw std::invalid_argument("assemble_system: problem/mesh dimension mismatch");
    validate_mesh(mesh_H);

    AssembledSystem sys;
    sys.dim = mesh_H.dim;
    sys.config = {k_test, q, k_int};
    sys.nonlinear = problem.nonlinear_reaction;
    sys.p_param = problem.p_param;

    sys.mesh_H = std::make_shared<const Mesh>(mesh_H);
    sys.mesh_h = std::make_shared<const Mesh>(refine_nested(mesh_H, refine_factor));
    sys.space_U = build_space(sys.mesh_H, k_int);
    sys.space_V = build_space(sys.mesh_h, k_test);

    // free test rows: test functions vanish on Gamma_D, Neumann nodes stay
    sys.test_row_of_node.assign(sys.space_V.n_nodes(), -1);
    for (int i = 0; i < sys.space_V.n_nodes(); ++i)
        if (!sys.space_V.dirichlet_mask[i]) {
            sys.test_row_of_node[i] = sys.n_test++;
            sys.row_to_node.push_back(i);
        }
    if (sys.n_test == 0) throw std::invalid_argument("assemble_system: empty test space");

    const Mesh& fine = *sys.mesh_h;
    const QuadratureRule rule =
        sys.dim == 1 ? reference_interval_rule(q) : reference_triangle_rule(q);
    const int n_pts = static_cast<int>(rule.points.size());

    // reference-point test basis, shared across elements
    std::vector<BasisEval> ref_basis(n_pts);
    for (int k = 0; k < n_pts; ++k) ref_basis[k] = eval_basis(sys.dim, k_test, rule.points[k]);

    // mapped quadrature points grouped by fine element
    std::vector<std::vector<Vec2>> groups(fine.n_elements());
    std::vector<int> parents(fine.n_elements());
    for (int e = 0; e < fine.n_elements(); ++e) {
        const auto& el = fine.elements[e];
        MappedRule mapped =
            sys.dim == 1
                ? map_rule_interval(rule, fine.vertices[el[0]], fine.vertices[el[1]])
                : map_rule_triangle(rule, fine.vertices[el[0]], fine.vertices[el[1]],
                                    fine.vertices[el[2]]);
        groups[e] = mapped.points;
        parents[e] = fine.parent_map.empty() ? e : fine.parent_map[e];
        for (int k = 0; k < n_pts; ++k) {
            Vec2 p = mapped.points[k];
            sys.quad_points.push_back(p);
            sys.quad_weight.push_back(mapped.weights[k]);
            sys.quad_mu.push_back(problem.mu(p));
            Vec2 beta = problem.beta(p);
            sys.quad_beta_x.push_back(beta.x);
            sys.quad_beta_y.push_back(beta.y);
            sys.quad_sigma.push_back(problem.sigma(p));
            if (!std::isfinite(sys.quad_mu.back()) || !std::isfinite(beta.x) ||
                !std::isfinite(beta.y) || !std::isfinite(sys.quad_sigma.back()))
                throw std::runtime_error("assemble_system: coefficient evaluation failed at (" +
                                         std::to_string(p.x) + ", " + std::to_string(p.y) + ")");
        }
    }

    sys.interp = build_interpolation_matrices(sys.space_U, groups, parents);

    // test-basis point matrices and the bilinear operator
    const int n_q = sys.interp.n_points;
    std::vector<std::tuple<int, int, double>> tv, tx, ty, ta;
    tv.reserve(static_cast<std::size_t>(n_q) * sys.space_V.local_size());
    tx.reserve(tv.capacity());
    if (sys.dim == 2) ty.reserve(tv.capacity());

    sys.b.assign(sys.n_test, 0.0);

    for (int e = 0; e < fine.n_elements(); ++e) {
        ElementMap map = element_map(fine, e);
        const auto& loc = sys.space_V.element_nodes[e];
        for (int k = 0; k < n_pts; ++k) {
            const int qg = e * n_pts + k;
            const double w = sys.quad_weight[qg];
            const double mu = sys.quad_mu[qg], bx = sys.quad_beta_x[qg], by = sys.quad_beta_y[qg];
            const double sg = sys.quad_sigma[qg];
            const double fq = problem.f(sys.quad_points[qg]);
            if (!std::isfinite(fq))
                throw std::runtime_error("assemble_system: f evaluation failed at quadrature point");
            const int m_begin = sys.interp.values.row_ptr[qg];
            const int m_end = sys.interp.values.row_ptr[qg + 1];
            for (std::size_t a = 0; a < loc.size(); ++a) {
                const double va = ref_basis[k].values[a];
                const Vec2 ga = map.grad_to_physical(ref_basis[k].ref_grads[a]);
                const int row = sys.test_row_of_node[loc[a]];
                if (row < 0) continue;
                tv.emplace_back(qg, row, va);
                tx.emplace_back(qg, row, ga.x);
                if (sys.dim == 2) ty.emplace_back(qg, row, ga.y);
                sys.b[row] += w * fq * va;
                for (int mk = m_begin; mk < m_end; ++mk) {
                    const int col = sys.interp.values.col[mk];
                    const double mv = sys.interp.values.val[mk];
                    const double mdx = sys.interp.dx.val[mk];
                    const double mdy = sys.dim == 2 ? sys.interp.dy.val[mk] : 0.0;
                    double contrib = mu * (ga.x * mdx + ga.y * mdy) + va * (bx * mdx + by * mdy);
                    if (!sys.nonlinear) contrib += sg * va * mv;
                    ta.emplace_back(row, col, w * contrib);
                }
            }
        }
    }

    // Neumann part of the load
    if (sys.dim == 2) {
        auto uses = boundary_edge_elements(fine);
        const QuadratureRule edge_rule = reference_interval_rule(q);
        for (const auto& be : fine.boundary_edges) {
            if (be.tag != BoundaryTag::neumann) continue;
            if (!problem.psi) continue;
            auto key = std::make_pair(std::min(be.v0, be.v1), std::max(be.v0, be.v1));
            auto it = uses.find(key);
            if (it == uses.end() || it->second.element < 0)
                throw std::runtime_error("assemble_system: boundary edge not owned by one element");
            const int e = it->second.element;
            const auto& el = fine.elements[e];
            // the CCW orientation inside the element fixes the outward normal
            Vec2 a = fine.vertices[el[it->second.local_a]];
            Vec2 bpt = fine.vertices[el[it->second.local_b]];
            double len = std::hypot(bpt.x - a.x, bpt.y - a.y);
            Vec2 normal{(bpt.y - a.y) / len, -(bpt.x - a.x) / len};
            MappedRule mapped = map_rule_interval(edge_rule, a, bpt);
            ElementMap map = element_map(fine, e);
            const auto& loc = sys.space_V.element_nodes[e];
            for (std::size_t k = 0; k < mapped.points.size(); ++k) {
                Vec2 p = mapped.points[k];
                double psi = problem.psi(p, normal);
                BasisEval basis = eval_basis(2, k_test, map.to_reference(p));
                for (std::size_t aidx = 0; aidx < loc.size(); ++aidx) {
                    int row = sys.test_row_of_node[loc[aidx]];
                    if (row < 0) continue;
                    sys.b[row] += mapped.weights[k] * psi * basis.values[aidx];
                }
            }
        }
    } else if (problem.psi) {
        for (const auto& be : fine.boundary_edges) {
            if (be.tag != BoundaryTag::neumann) continue;
            int row = -1;
            Vec2 p = fine.vertices[be.v0];
            for (int i = 0; i < sys.space_V.n_nodes(); ++i)
                if (sys.space_V.nodes[i].x == p.x) row = sys.test_row_of_node[i];
            if (row < 0) continue;
            double nx = p.x > 0.5 * (fine.vertices.front().x + fine.vertices.back().x) ? 1.0 : -1.0;
            sys.b[row] += problem.psi(p, {nx, 0.0});
        }
    }

    sys.A_lin = CsrMatrix::from_triplets(sys.n_test, sys.space_U.n_nodes(), std::move(ta));
    sys.test_val = CsrMatrix::from_triplets(n_q, sys.n_test, std::move(tv));
    sys.test_dx = CsrMatrix::from_triplets(n_q, sys.n_test, std::move(tx));
    if (sys.dim == 2) sys.test_dy = CsrMatrix::from_triplets(n_q, sys.n_test, std::move(ty));
    sys.gamma.assign(sys.n_test, 1.0);
    return sys;
}

AssembledSystem assemble_system(const ProblemDefinition& problem, const DiscretizationConfig& config,
                                const Mesh& mesh_H) {
    config.validate();
    auto sys = assemble_system_custom(problem, mesh_H, config.k_test, config.q, config.k_int,
                                      config.k_int);
    int dim_U0 = sys.space_U.n_free_nodes();
    if (dim_U0 > sys.n_test)
        throw std::invalid_argument("assemble_system: dim U_{H,0} = " + std::to_string(dim_U0) +
                                    " exceeds dim V_h = " + std::to_string(sys.n_test) +
                                    " (configuration error)");
    return sys;
}

ResidualReport compute_residuals(const AssembledSystem& sys, std::span<const double> u_nodes) {
    if (static_cast<int>(u_nodes.size()) != sys.n_interp_nodes())
        throw std::invalid_argument("compute_residuals: u_nodes length mismatch");

    ResidualReport rep;
    rep.r.assign(sys.n_test, 0.0);
    sys.A_lin.multiply(u_nodes, rep.r);
    for (int i = 0; i < sys.n_test; ++i) rep.r[i] = sys.b[i] - rep.r[i];

    std::vector<double> g;  // interpolant values at quadrature points (nonlinear path)
    std::vector<double> expo;
    if (sys.nonlinear) {
        g = sys.interp.values.multiply(u_nodes);
        const int n_q = sys.interp.n_points;
        expo.resize(n_q);
        std::vector<double> nl_quad(n_q);
        for (int qg = 0; qg < n_q; ++qg) {
            expo[qg] = std::exp(-sys.p_param * g[qg] * g[qg]);
            nl_quad[qg] = sys.quad_weight[qg] * sys.quad_sigma[qg] * expo[qg];
        }
        auto nl_test = sys.test_val.multiply_transpose(nl_quad);
        for (int i = 0; i < sys.n_test; ++i) rep.r[i] -= nl_test[i];
    }

    std::vector<double> scaled(sys.n_test);
    for (int i = 0; i < sys.n_test; ++i) {
        scaled[i] = rep.r[i] / sys.gamma[i];
        rep.loss += rep.r[i] * scaled[i];
    }

    rep.dloss_du = sys.A_lin.multiply_transpose(scaled);
    for (auto& v : rep.dloss_du) v *= -2.0;
    if (sys.nonlinear) {
        // chain through M: d/du_j of exp(-p g^2) is -2 p g exp(-p g^2) M[q][j]
        auto c = sys.test_val.multiply(scaled);  // per quadrature point
        const int n_q = sys.interp.n_points;
        std::vector<double> qv(n_q);
        for (int qg = 0; qg < n_q; ++qg)
            qv[qg] = 4.0 * sys.p_param * g[qg] * sys.quad_weight[qg] * sys.quad_sigma[qg] *
                     expo[qg] * c[qg];
        auto extra = sys.interp.values.multiply_transpose(qv);
        for (std::size_t j = 0; j < rep.dloss_du.size(); ++j) rep.dloss_du[j] += extra[j];
    }
    return rep;
}

std::vector<double> pg_solve(const AssembledSystem& sys, std::span<const double> dirichlet_values) {
    if (sys.nonlinear) throw std::invalid_argument("pg_solve: linear systems only");
    const int n_nodes = sys.n_interp_nodes();
    if (static_cast<int>(dirichlet_values.size()) != n_nodes)
        throw std::invalid_argument("pg_solve: dirichlet_values length mismatch");

    std::vector<int> free_col_of_node(n_nodes, -1);
    int n_free = 0;
    for (int i = 0; i < n_nodes; ++i)
        if (!sys.space_U.dirichlet_mask[i]) free_col_of_node[i] = n_free++;
    if (n_free != sys.n_test)
        throw std::invalid_argument("pg_solve: system is not square (" + std::to_string(sys.n_test) +
                                    " x " + std::to_string(n_free) + ")");

    // rhs = b - A_dirichlet u_dirichlet
    std::vector<double> u(n_nodes, 0.0);
    for (int i = 0; i < n_nodes; ++i)
        if (sys.space_U.dirichlet_mask[i]) u[i] = dirichlet_values[i];
    std::vector<double> rhs = sys.A_lin.multiply(u);
    for (int i = 0; i < sys.n_test; ++i) rhs[i] = sys.b[i] - rhs[i];

    int bl = 0, bu = 0;
    for (int row = 0; row < sys.A_lin.n_rows; ++row)
        for (int k = sys.A_lin.row_ptr[row]; k < sys.A_lin.row_ptr[row + 1]; ++k) {
            int col = free_col_of_node[sys.A_lin.col[k]];
            if (col < 0) continue;
            bl = std::max(bl, row - col);
            bu = std::max(bu, col - row);
        }
    const std::size_t storage = static_cast<std::size_t>(n_free) * (2 * bl + bu + 1);
    if (storage > (std::size_t{1} << 28))
        throw std::runtime_error("pg_solve: bandwidth too large for the direct solver");

    BandLu lu(n_free, bl, bu);
    for (int row = 0; row < sys.A_lin.n_rows; ++row)
        for (int k = sys.A_lin.row_ptr[row]; k < sys.A_lin.row_ptr[row + 1]; ++k) {
            int col = free_col_of_node[sys.A_lin.col[k]];
            if (col >= 0) lu.add(row, col, sys.A_lin.val[k]);
        }
    lu.factorize();

    std::vector<double> x = rhs;
    lu.solve(x);

    // one step of iterative refinement
    for (int i = 0; i < n_nodes; ++i)
        if (free_col_of_node[i] >= 0) u[i] = x[free_col_of_node[i]];
    std::vector<double> resid = sys.A_lin.multiply(u);
    for (int i = 0; i < sys.n_test; ++i) resid[i] = sys.b[i] - resid[i];
    lu.solve(resid);
    for (int i = 0; i < n_nodes; ++i)
        if (free_col_of_node[i] >= 0) u[i] += resid[free_col_of_node[i]];
    return u;
}

namespace {

// H1 Gram matrix of a space restricted to its non-Dirichlet nodes.
struct Gram {
    CsrMatrix csr;
    int bandwidth = 0;
    std::vector<int> free_index;
    int n_free = 0;
};

Gram assemble_h1_gram(const FeSpace& sp, int precision) {
    const Mesh& mesh = *sp.mesh;
    Gram g;
    g.free_index.assign(sp.n_nodes(), -1);
    for (int i = 0; i < sp.n_nodes(); ++i)
        if (!sp.dirichlet_mask[i]) g.free_index[i] = g.n_free++;

    const QuadratureRule rule =
        mesh.dim == 1 ? reference_interval_rule(precision) : reference_triangle_rule(precision);
    std::vector<BasisEval> ref_basis(rule.points.size());
    for (std::size_t k = 0; k < rule.points.size(); ++k)
        ref_basis[k] = eval_basis(mesh.dim, sp.degree, rule.points[k]);

    std::vector<std::tuple<int, int, double>> trips;
    for (int e = 0; e < mesh.n_elements(); ++e) {
        ElementMap map = element_map(mesh, e);
        const auto& loc = sp.element_nodes[e];
        const double scale = std::abs(map.det);
        for (std::size_t k = 0; k < rule.points.size(); ++k) {
            double w = rule.weights[k] * scale;
            for (std::size_t a = 0; a < loc.size(); ++a) {
                int ia = g.free_index[loc[a]];
                if (ia < 0) continue;
                double va = ref_basis[k].values[a];
                Vec2 ga = map.grad_to_physical(ref_basis[k].ref_grads[a]);
                for (std::size_t bI = 0; bI < loc.size(); ++bI) {
                    int ib = g.free_index[loc[bI]];
                    if (ib < 0) continue;
                    double vb = ref_basis[k].values[bI];
                    Vec2 gb = map.grad_to_physical(ref_basis[k].ref_grads[bI]);
                    trips.emplace_back(ia, ib, w * (va * vb + ga.x * gb.x + ga.y * gb.y));
                }
            }
        }
    }
    g.csr = CsrMatrix::from_triplets(g.n_free, g.n_free, std::move(trips));
    for (int i = 0; i < g.csr.n_rows; ++i)
        for (int k = g.csr.row_ptr[i]; k < g.csr.row_ptr[i + 1]; ++k)
            g.bandwidth = std::max(g.bandwidth, std::abs(i - g.csr.col[k]));
    return g;
}

BandCholesky band_factor(const Gram& g) {
    BandCholesky chol(g.n_free, g.bandwidth);
    for (int i = 0; i < g.csr.n_rows; ++i)
        for (int k = g.csr.row_ptr[i]; k < g.csr.row_ptr[i + 1]; ++k)
            if (g.csr.col[k] <= i) chol.add(i, g.csr.col[k], g.csr.val[k]);
    if (!chol.factorize()) throw std::runtime_error("compute_infsup: Gram matrix not SPD");
    return chol;
}

double power_iteration_max(const CsrMatrix& m, int iters) {
    std::vector<double> x(m.n_rows, 1.0), y(m.n_rows);
    double n0 = norm2(x);
    for (auto& v : x) v /= n0;
    double lambda = 0.0;
    for (int it = 0; it < iters; ++it) {
        m.multiply(x, y);
        double next = dot(x, y);  // Rayleigh quotient, x normalized
        double ny = norm2(y);
        if (ny == 0.0) return 0.0;
        for (auto& v : y) v /= ny;
        x = y;
        if (it > 4 && std::abs(next - lambda) <= 1e-11 * std::abs(next)) return next;
        lambda = next;
    }
    return lambda;
}

double inverse_iteration_min(const CsrMatrix& m, const BandCholesky& chol, int iters) {
    std::vector<double> x(m.n_rows, 1.0), y;
    double lambda = 0.0;
    for (int it = 0; it < iters; ++it) {
        y = x;
        chol.solve(y);
        double n = norm2(y);
        for (auto& v : y) v /= n;
        auto my = m.multiply(y);
        double next = dot(y, my);
        x = y;
        if (it > 4 && std::abs(next - lambda) <= 1e-11 * std::abs(next)) return next;
        lambda = next;
    }
    return lambda;
}

}  // namespace

InfSupReport compute_infsup(const AssembledSystem& sys) {
    InfSupReport rep;
    Gram gu = assemble_h1_gram(sys.space_U, 2 * sys.config.k_int + 1);
    Gram gv = assemble_h1_gram(sys.space_V, std::max(sys.config.q, 2 * sys.config.k_test + 1));
    rep.dim_U0 = gu.n_free;
    rep.dim_V = gv.n_free;
    if (gu.n_free > 3000)
        throw std::invalid_argument("compute_infsup: dim U_{H,0} = " + std::to_string(gu.n_free) +
                                    " exceeds the dense diagnostic guard (3000)");

    // norm-equivalence constants of ||.||_gamma vs ||.||_{1,Omega} on V_h
    BandCholesky gv_chol = band_factor(gv);
    {
        // gamma-weighted: B = Gamma^{-1/2} G_V Gamma^{-1/2}
        CsrMatrix b = gv.csr;
        std::vector<double> gamma_free(gv.n_free, 1.0);
        for (int node = 0; node < sys.space_V.n_nodes(); ++node) {
            int row = sys.test_row_of_node[node];
            int fi = gv.free_index[node];
            if (row >= 0 && fi >= 0) gamma_free[fi] = sys.gamma[row];
        }
        for (int i = 0; i < b.n_rows; ++i)
            for (int k = b.row_ptr[i]; k < b.row_ptr[i + 1]; ++k)
                b.val[k] /= std::sqrt(gamma_free[i] * gamma_free[b.col[k]]);
        BandCholesky b_chol(gv.n_free, gv.bandwidth);
        for (int i = 0; i < b.n_rows; ++i)
            for (int k = b.row_ptr[i]; k < b.row_ptr[i + 1]; ++k)
                if (b.col[k] <= i) b_chol.add(i, b.col[k], b.val[k]);
        if (!b_chol.factorize()) throw std::runtime_error("compute_infsup: weighted Gram not SPD");
        double lmax = power_iteration_max(b, 500);
        double lmin = inverse_iteration_min(b, b_chol, 500);
        rep.c_h = 1.0 / std::sqrt(lmax);
        rep.C_h = 1.0 / std::sqrt(lmin);
    }

    if (gu.n_free > gv.n_free) {
        rep.alpha_tilde = 0.0;  // rank-deficient pairing
        return rep;
    }

    // A restricted to free columns of U_{H,0}
    std::vector<std::tuple<int, int, double>> at_trips;
    for (int row = 0; row < sys.A_lin.n_rows; ++row)
        for (int k = sys.A_lin.row_ptr[row]; k < sys.A_lin.row_ptr[row + 1]; ++k) {
            int node = sys.A_lin.col[k];
            int fc = gu.free_index[node];
            if (fc < 0) continue;
            // rows of A are the free test functions; map to G_V's free index
            int vnode = sys.row_to_node[row];
            int fv = gv.free_index[vnode];
            if (fv < 0) continue;
            at_trips.emplace_back(fc, fv, sys.A_lin.val[k]);
        }
    CsrMatrix a_cols = CsrMatrix::from_triplets(gu.n_free, gv.n_free, std::move(at_trips));

    // C = A^T G_V^{-1} A, built column by column
    DenseCholesky c_mat(gu.n_free);
    {
        std::vector<double> col(gv.n_free), sol(gv.n_free), crow(gu.n_free);
        for (int j = 0; j < gu.n_free; ++j) {
            std::fill(col.begin(), col.end(), 0.0);
            for (int k = a_cols.row_ptr[j]; k < a_cols.row_ptr[j + 1]; ++k)
                col[a_cols.col[k]] = a_cols.val[k];
            sol = col;
            gv_chol.solve(sol);
            a_cols.multiply(sol, crow);
            for (int i = 0; i < gu.n_free; ++i) c_mat.at(j, i) = crow[i];
        }
    }
    // symmetrize roundoff
    for (int i = 0; i < gu.n_free; ++i)
        for (int j = 0; j < i; ++j) {
            double v = 0.5 * (c_mat.at(i, j) + c_mat.at(j, i));
            c_mat.at(i, j) = c_mat.at(j, i) = v;
        }

    // keep a copy for Rayleigh quotients before the in-place factorization
    std::vector<std::vector<double>> c_copy(gu.n_free, std::vector<double>(gu.n_free));
    for (int i = 0; i < gu.n_free; ++i)
        for (int j = 0; j < gu.n_free; ++j) c_copy[i][j] = c_mat.at(i, j);

    if (!c_mat.factorize()) {
        rep.alpha_tilde = 0.0;
        return rep;
    }

    // smallest eigenvalue of the pencil (C, G_U) via inverse iteration
    std::vector<double> x(gu.n_free, 1.0), y(gu.n_free), cy(gu.n_free);
    double lambda = 0.0;
    for (int it = 0; it < 500; ++it) {
        gu.csr.multiply(x, y);
        c_mat.solve(y);
        double n = norm2(y);
        for (auto& v : y) v /= n;
        for (int i = 0; i < gu.n_free; ++i) {
            double s = 0.0;
            for (int j = 0; j < gu.n_free; ++j) s += c_copy[i][j] * y[j];
            cy[i] = s;
        }
        auto guy = gu.csr.multiply(y);
        double next = dot(y, cy) / dot(y, guy);
        x = y;
        if (it > 4 && std::abs(next - lambda) <= 1e-11 * std::abs(next)) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    rep.alpha_tilde = std::sqrt(std::max(0.0, lambda));
    return rep;
}

void dump_system(const AssembledSystem& sys, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("dump_system: cannot open " + path);
    out.precision(17);
    out << "# A " << sys.A_lin.n_rows << ' ' << sys.A_lin.n_cols << ' ' << sys.A_lin.nnz() << '\n';
    for (int i = 0; i < sys.A_lin.n_rows; ++i)
        for (int k = sys.A_lin.row_ptr[i]; k < sys.A_lin.row_ptr[i + 1]; ++k)
            out << i << ' ' << sys.A_lin.col[k] << ' ' << sys.A_lin.val[k] << '\n';
    out << "# b " << sys.b.size() << '\n';
    for (double v : sys.b) out << v << '\n';
}

}  // namespace ivpinn
