#pragma once

#include <memory>
#include <span>
#include <string>

#include "ivpinn/fem_space.hpp"
#include "ivpinn/linalg.hpp"
#include "ivpinn/mesh.hpp"
#include "ivpinn/problem.hpp"

namespace ivpinn {

struct DiscretizationConfig {
    int k_test = 1;
    int q = 3;
    int k_int = 4;

    static DiscretizationConfig from_kq(int k_test, int q) {
        return {k_test, q, q + 2 - k_test};
    }
    void validate() const;  // q >= 2 k_test, k_int = q + 2 - k_test, supported combos
};

/// Everything the loss needs, assembled once per (problem, config, mesh) and
/// immutable afterwards. Rows of the operator correspond to test functions
/// that do not sit on Gamma_D; columns to all interpolation nodes.
struct AssembledSystem {
    int dim = 2;
    DiscretizationConfig config;
    std::shared_ptr<const Mesh> mesh_H;
    std::shared_ptr<const Mesh> mesh_h;
    FeSpace space_U;  // degree k_int on mesh_H
    FeSpace space_V;  // degree k_test on mesh_h

    std::vector<int> test_row_of_node;  // V_h node -> free row, or -1 on Gamma_D
    std::vector<int> row_to_node;
    int n_test = 0;

    CsrMatrix A_lin;  // n_test x n_I; includes the sigma u term only in the linear case
    std::vector<double> b;
    std::vector<double> gamma;

    InterpolationMatrices interp;  // M, M_dx, M_dy at the assembly quadrature points

    // flat per-quadrature-point data, ordered like the interpolation rows
    std::vector<Vec2> quad_points;
    std::vector<double> quad_weight, quad_mu, quad_beta_x, quad_beta_y, quad_sigma;
    CsrMatrix test_val, test_dx, test_dy;  // n_q x n_test (weights not folded in)

    bool nonlinear = false;
    double p_param = 0.0;

    int n_interp_nodes() const { return space_U.n_nodes(); }
};

/// Standard entry point: T_h = refine_nested(mesh_H, k_int), so H = k_int h.
AssembledSystem assemble_system(const ProblemDefinition& problem, const DiscretizationConfig& config,
                                const Mesh& mesh_H);

/// Unvalidated variant with an explicit refinement factor; used by unit tests
/// and by the deliberately ill-posed inf-sup demonstrations.
AssembledSystem assemble_system_custom(const ProblemDefinition& problem, const Mesh& mesh_H,
                                       int k_test, int q, int k_int, int refine_factor);

struct ResidualReport {
    std::vector<double> r;  // per free test function
    double loss = 0.0;      // sum r_i^2 / gamma_i
    std::vector<double> dloss_du;
};

ResidualReport compute_residuals(const AssembledSystem& system, std::span<const double> u_nodes);

/// Direct Petrov-Galerkin solve of the square linear system (k_test such that
/// free test count == free node count). dirichlet_values has full node length;
/// only entries at Dirichlet nodes are read. Linear problems only.
std::vector<double> pg_solve(const AssembledSystem& system, std::span<const double> dirichlet_values);

struct InfSupReport {
    double alpha_tilde = 0.0;
    double c_h = 0.0;
    double C_h = 0.0;
    int dim_U0 = 0;
    int dim_V = 0;
};

/// Discrete inf-sup constant between U_{H,0} and V_h in the H1 norm, plus the
/// norm-equivalence constants of the gamma-weighted residual norm on V_h.
/// Dense diagnostic; dim U_{H,0} is guarded at 3000.
InfSupReport compute_infsup(const AssembledSystem& system);

/// Text dump of A_lin (row col value triplets) and b for external inspection.
void dump_system(const AssembledSystem& system, const std::string& path);

}  // namespace ivpinn
