#pragma once

#include <memory>
#include <vector>

#include "ivpinn/linalg.hpp"
#include "ivpinn/mesh.hpp"

namespace ivpinn {

/// Lagrange finite-element space of degree k with a global C0 node numbering.
/// Nodes shared between elements are deduplicated exactly (lattice identity,
/// no coordinate snapping) and then numbered lexicographically by (y, x),
/// which keeps assembled operators banded on structured meshes.
struct FeSpace {
    std::shared_ptr<const Mesh> mesh;
    int degree = 1;
    std::vector<Vec2> nodes;
    std::vector<std::vector<int>> element_nodes;  // local lattice order per element
    std::vector<unsigned char> dirichlet_mask;    // 1 if the node lies on Gamma_D

    int n_nodes() const { return static_cast<int>(nodes.size()); }
    int local_size() const;
    int n_free_nodes() const;
};

FeSpace build_space(std::shared_ptr<const Mesh> mesh, int degree);

/// Values and reference-coordinate gradients of all local Lagrange basis
/// functions at one reference point, in local lattice order.
struct BasisEval {
    std::vector<double> values;
    std::vector<Vec2> ref_grads;
};

BasisEval eval_basis(int dim, int degree, Vec2 ref_point);

/// Reference -> physical affine map data for one element.
struct ElementMap {
    Vec2 origin;
    double j00 = 1, j01 = 0, j10 = 0, j11 = 0;  // columns are edge vectors
    double det = 1;                             // 1D: j00 = length, det = length

    Vec2 to_physical(Vec2 ref) const;
    Vec2 to_reference(Vec2 phys) const;
    Vec2 grad_to_physical(Vec2 ref_grad) const;  // J^{-T} g
};

ElementMap element_map(const Mesh& mesh, int e);

/// Sparse point-evaluation matrices of a space: row i holds the basis values
/// (and first physical derivatives) at evaluation point i, so nodal
/// coefficient vectors map to point values by multiplication.
struct InterpolationMatrices {
    CsrMatrix values;
    CsrMatrix dx;
    CsrMatrix dy;  // empty for 1D spaces
    int n_points = 0;
};

/// Evaluation points are grouped by fine element; point_parent[g] gives the
/// coarse element of the space that contains group g. Throws if a point falls
/// outside its stated parent (broken nesting).
InterpolationMatrices build_interpolation_matrices(const FeSpace& space,
                                                   const std::vector<std::vector<Vec2>>& point_groups,
                                                   const std::vector<int>& point_parent);

}  // namespace ivpinn
