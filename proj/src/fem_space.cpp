#include "ivpinn/fem_space.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>

namespace ivpinn {

namespace {

using NodeKey = std::array<int64_t, 5>;

NodeKey vertex_key(int v) { return {0, v, 0, 0, 0}; }

NodeKey edge_key(int v0, int v1, int64_t num, int64_t den) {
    if (v0 > v1) {
        std::swap(v0, v1);
        num = den - num;
    }
    int64_t g = std::gcd(num, den);
    return {1, v0, v1, num / g, den / g};
}

NodeKey interior_key(int elem, int64_t i, int64_t j) { return {2, elem, i, j, 0}; }

int lattice_index(int k, int i, int j) { return j * (k + 1) - j * (j - 1) / 2 + i; }

// Equispaced-lattice Lagrange factor P_a(k, t) = prod_{r<a} (k t - r) / (a - r)
// and its derivative with respect to t.
void silvester(int a, int k, double t, double& p, double& dp) {
    p = 1.0;
    dp = 0.0;
    for (int r = 0; r < a; ++r) {
        double factor = (k * t - r) / (a - r);
        dp = dp * factor + p * (static_cast<double>(k) / (a - r));
        p *= factor;
    }
}

}  // namespace

int FeSpace::local_size() const {
    return mesh->dim == 1 ? degree + 1 : (degree + 1) * (degree + 2) / 2;
}

int FeSpace::n_free_nodes() const {
    int n = 0;
    for (auto m : dirichlet_mask)
        if (!m) ++n;
    return n;
}

FeSpace build_space(std::shared_ptr<const Mesh> mesh, int degree) {
    if (degree < 1) throw std::invalid_argument("build_space: degree must be >= 1");
    const Mesh& m = *mesh;
    FeSpace sp;
    sp.mesh = mesh;
    sp.degree = degree;

    std::map<NodeKey, int> index;
    auto get_node = [&](const NodeKey& key, Vec2 pos) {
        auto it = index.find(key);
        if (it != index.end()) return it->second;
        int id = sp.n_nodes();
        sp.nodes.push_back(pos);
        index.emplace(key, id);
        return id;
    };

    const int k = degree;
    sp.element_nodes.resize(m.n_elements());
    if (m.dim == 1) {
        for (int e = 0; e < m.n_elements(); ++e) {
            int v0 = m.elements[e][0], v1 = m.elements[e][1];
            Vec2 a = m.vertices[v0], b = m.vertices[v1];
            auto& loc = sp.element_nodes[e];
            loc.resize(k + 1);
            for (int i = 0; i <= k; ++i) {
                NodeKey key = (i == 0) ? vertex_key(v0) : (i == k) ? vertex_key(v1) : edge_key(v0, v1, i, k);
                double t = static_cast<double>(i) / k;
                loc[i] = get_node(key, {(1.0 - t) * a.x + t * b.x, 0.0});
            }
        }
    } else {
        for (int e = 0; e < m.n_elements(); ++e) {
            const auto& el = m.elements[e];
            Vec2 a = m.vertices[el[0]], b = m.vertices[el[1]], c = m.vertices[el[2]];
            auto& loc = sp.element_nodes[e];
            loc.resize((k + 1) * (k + 2) / 2);
            for (int j = 0; j <= k; ++j)
                for (int i = 0; i + j <= k; ++i) {
                    NodeKey key;
                    if (i == 0 && j == 0)
                        key = vertex_key(el[0]);
                    else if (i == k && j == 0)
                        key = vertex_key(el[1]);
                    else if (i == 0 && j == k)
                        key = vertex_key(el[2]);
                    else if (j == 0)
                        key = edge_key(el[0], el[1], i, k);
                    else if (i == 0)
                        key = edge_key(el[0], el[2], j, k);
                    else if (i + j == k)
                        key = edge_key(el[1], el[2], j, k);
                    else
                        key = interior_key(e, i, j);
                    double ti = static_cast<double>(i) / k, tj = static_cast<double>(j) / k;
                    loc[lattice_index(k, i, j)] = get_node(key, a + ti * (b - a) + tj * (c - a));
                }
        }
    }

    // Renumber lexicographically by (y, x) to keep operator bandwidth small.
    std::vector<int> order(sp.n_nodes());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (sp.nodes[a].y != sp.nodes[b].y) return sp.nodes[a].y < sp.nodes[b].y;
        return sp.nodes[a].x < sp.nodes[b].x;
    });
    std::vector<int> rank(sp.n_nodes());
    for (int i = 0; i < sp.n_nodes(); ++i) rank[order[i]] = i;
    std::vector<Vec2> sorted_nodes(sp.n_nodes());
    for (int i = 0; i < sp.n_nodes(); ++i) sorted_nodes[rank[i]] = sp.nodes[i];
    sp.nodes = std::move(sorted_nodes);
    for (auto& loc : sp.element_nodes)
        for (auto& id : loc) id = rank[id];

    // Dirichlet mask from boundary tags: vertex nodes and edge-interior nodes
    // on Dirichlet edges; a vertex shared by D and N edges counts as Dirichlet.
    sp.dirichlet_mask.assign(sp.n_nodes(), 0);
    std::map<NodeKey, int> remapped;
    for (const auto& [key, id] : index) remapped.emplace(key, rank[id]);
    for (const auto& be : m.boundary_edges) {
        if (be.tag != BoundaryTag::dirichlet) continue;
        sp.dirichlet_mask[remapped.at(vertex_key(be.v0))] = 1;
        sp.dirichlet_mask[remapped.at(vertex_key(be.v1))] = 1;
        if (m.dim == 2)
            for (int r = 1; r < k; ++r) {
                auto it = remapped.find(edge_key(be.v0, be.v1, r, k));
                if (it != remapped.end()) sp.dirichlet_mask[it->second] = 1;
            }
    }
    return sp;
}

BasisEval eval_basis(int dim, int degree, Vec2 ref_point) {
    const int k = degree;
    BasisEval out;
    if (dim == 1) {
        double l0 = 1.0 - ref_point.x, l1 = ref_point.x;
        out.values.resize(k + 1);
        out.ref_grads.resize(k + 1);
        for (int i = 0; i <= k; ++i) {
            double p0, dp0, p1, dp1;
            silvester(k - i, k, l0, p0, dp0);
            silvester(i, k, l1, p1, dp1);
            out.values[i] = p0 * p1;
            out.ref_grads[i] = {-dp0 * p1 + p0 * dp1, 0.0};
        }
        return out;
    }
    double l1 = 1.0 - ref_point.x - ref_point.y, l2 = ref_point.x, l3 = ref_point.y;
    int n = (k + 1) * (k + 2) / 2;
    out.values.resize(n);
    out.ref_grads.resize(n);
    for (int j = 0; j <= k; ++j)
        for (int i = 0; i + j <= k; ++i) {
            int a = k - i - j;
            double p1, dp1, p2, dp2, p3, dp3;
            silvester(a, k, l1, p1, dp1);
            silvester(i, k, l2, p2, dp2);
            silvester(j, k, l3, p3, dp3);
            int idx = lattice_index(k, i, j);
            out.values[idx] = p1 * p2 * p3;
            // grad l1 = (-1,-1), grad l2 = (1,0), grad l3 = (0,1)
            double d1 = dp1 * p2 * p3, d2 = p1 * dp2 * p3, d3 = p1 * p2 * dp3;
            out.ref_grads[idx] = {-d1 + d2, -d1 + d3};
        }
    return out;
}

Vec2 ElementMap::to_physical(Vec2 ref) const {
    return {origin.x + j00 * ref.x + j01 * ref.y, origin.y + j10 * ref.x + j11 * ref.y};
}

Vec2 ElementMap::to_reference(Vec2 phys) const {
    double rx = phys.x - origin.x, ry = phys.y - origin.y;
    return {(j11 * rx - j01 * ry) / det, (-j10 * rx + j00 * ry) / det};
}

Vec2 ElementMap::grad_to_physical(Vec2 g) const {
    // J^{-T} g with J^{-1} = [[j11, -j01], [-j10, j00]] / det
    return {(j11 * g.x - j10 * g.y) / det, (-j01 * g.x + j00 * g.y) / det};
}

ElementMap element_map(const Mesh& mesh, int e) {
    const auto& el = mesh.elements[e];
    ElementMap map;
    map.origin = mesh.vertices[el[0]];
    if (mesh.dim == 1) {
        double len = mesh.vertices[el[1]].x - mesh.vertices[el[0]].x;
        map.j00 = len;
        map.j11 = 1.0;
        map.det = len;
        return map;
    }
    Vec2 e1 = mesh.vertices[el[1]] - mesh.vertices[el[0]];
    Vec2 e2 = mesh.vertices[el[2]] - mesh.vertices[el[0]];
    map.j00 = e1.x;
    map.j10 = e1.y;
    map.j01 = e2.x;
    map.j11 = e2.y;
    map.det = e1.x * e2.y - e2.x * e1.y;
    return map;
}

InterpolationMatrices build_interpolation_matrices(const FeSpace& space,
                                                   const std::vector<std::vector<Vec2>>& point_groups,
                                                   const std::vector<int>& point_parent) {
    if (point_groups.size() != point_parent.size())
        throw std::invalid_argument("build_interpolation_matrices: group/parent size mismatch");
    const Mesh& mesh = *space.mesh;
    const double tol = 1e-10;

    int n_points = 0;
    for (const auto& g : point_groups) n_points += static_cast<int>(g.size());

    std::vector<std::tuple<int, int, double>> tv, tx, ty;
    const std::size_t nnz_estimate = static_cast<std::size_t>(n_points) * space.local_size();
    tv.reserve(nnz_estimate);
    tx.reserve(nnz_estimate);
    if (mesh.dim == 2) ty.reserve(nnz_estimate);

    int row = 0;
    for (std::size_t g = 0; g < point_groups.size(); ++g) {
        int parent = point_parent[g];
        if (parent < 0 || parent >= mesh.n_elements())
            throw std::runtime_error("build_interpolation_matrices: parent element out of range");
        ElementMap map = element_map(mesh, parent);
        const auto& loc = space.element_nodes[parent];
        for (const Vec2& p : point_groups[g]) {
            Vec2 ref = map.to_reference(p);
            bool inside = mesh.dim == 1
                              ? (ref.x >= -tol && ref.x <= 1.0 + tol)
                              : (ref.x >= -tol && ref.y >= -tol && ref.x + ref.y <= 1.0 + tol);
            if (!inside)
                throw std::runtime_error(
                    "build_interpolation_matrices: point (" + std::to_string(p.x) + ", " +
                    std::to_string(p.y) + ") outside parent element " + std::to_string(parent) +
                    " (broken nesting)");
            BasisEval basis = eval_basis(mesh.dim, space.degree, ref);
            for (std::size_t a = 0; a < loc.size(); ++a) {
                Vec2 grad = map.grad_to_physical(basis.ref_grads[a]);
                tv.emplace_back(row, loc[a], basis.values[a]);
                tx.emplace_back(row, loc[a], grad.x);
                if (mesh.dim == 2) ty.emplace_back(row, loc[a], grad.y);
            }
            ++row;
        }
    }

    InterpolationMatrices out;
    out.n_points = n_points;
    out.values = CsrMatrix::from_triplets(n_points, space.n_nodes(), std::move(tv));
    out.dx = CsrMatrix::from_triplets(n_points, space.n_nodes(), std::move(tx));
    if (mesh.dim == 2) out.dy = CsrMatrix::from_triplets(n_points, space.n_nodes(), std::move(ty));
    return out;
}

}  // namespace ivpinn
