#include "ivpinn/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace ivpinn {

namespace {

double tri_signed_area(Vec2 a, Vec2 b, Vec2 c) {
    return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

int64_t gcd64(int64_t a, int64_t b) { return std::gcd(a, b); }

// Exact identity of a lattice point generated on a coarse mesh: a coarse
// vertex, a reduced fraction along a coarse edge, or an interior lattice
// index of one element. Keys make vertex deduplication tolerance-free.
using NodeKey = std::array<int64_t, 5>;

NodeKey vertex_key(int v) { return {0, v, 0, 0, 0}; }

NodeKey edge_key(int v0, int v1, int64_t num, int64_t den) {
    if (v0 > v1) {
        std::swap(v0, v1);
        num = den - num;
    }
    int64_t g = gcd64(num, den);
    return {1, v0, v1, num / g, den / g};
}

NodeKey interior_key(int elem, int64_t i, int64_t j) { return {2, elem, i, j, 0}; }

}  // namespace

double Mesh::element_measure(int e) const {
    const auto& el = elements[e];
    if (dim == 1) return std::abs(vertices[el[1]].x - vertices[el[0]].x);
    return tri_signed_area(vertices[el[0]], vertices[el[1]], vertices[el[2]]);
}

double Mesh::element_diameter(int e) const {
    const auto& el = elements[e];
    if (dim == 1) return element_measure(e);
    double d = 0.0;
    for (int a = 0; a < 3; ++a)
        for (int b = a + 1; b < 3; ++b) {
            Vec2 diff = vertices[el[a]] - vertices[el[b]];
            d = std::max(d, std::hypot(diff.x, diff.y));
        }
    return d;
}

Mesh build_structured_mesh(int nx, int ny, const Rect& domain, const BoundarySpec& boundary) {
    if (nx < 1 || ny < 1) throw std::invalid_argument("build_structured_mesh: nx, ny must be >= 1");
    if (!(domain.x1 > domain.x0) || !(domain.y1 > domain.y0))
        throw std::invalid_argument("build_structured_mesh: degenerate domain");

    Mesh m;
    m.dim = 2;
    const int npx = nx + 1, npy = ny + 1;
    m.vertices.reserve(static_cast<std::size_t>(npx) * npy);
    for (int j = 0; j < npy; ++j)
        for (int i = 0; i < npx; ++i)
            m.vertices.push_back({domain.x0 + (domain.x1 - domain.x0) * i / nx,
                                  domain.y0 + (domain.y1 - domain.y0) * j / ny});

    auto vid = [npx](int i, int j) { return j * npx + i; };

    m.elements.reserve(static_cast<std::size_t>(2) * nx * ny);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            // split along the SW-NE diagonal, both triangles CCW
            m.elements.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
            m.elements.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
        }

    for (int j = 0; j < ny; ++j) {
        m.boundary_edges.push_back({vid(0, j), vid(0, j + 1), boundary.left});
        m.boundary_edges.push_back({vid(nx, j), vid(nx, j + 1), boundary.right});
    }
    for (int i = 0; i < nx; ++i) {
        m.boundary_edges.push_back({vid(i, 0), vid(i + 1, 0), boundary.bottom});
        m.boundary_edges.push_back({vid(i, ny), vid(i + 1, ny), boundary.top});
    }
    return m;
}

Mesh build_interval_mesh(int n, double a, double b) {
    if (n < 1) throw std::invalid_argument("build_interval_mesh: n must be >= 1");
    if (!(b > a)) throw std::invalid_argument("build_interval_mesh: degenerate interval");
    Mesh m;
    m.dim = 1;
    for (int i = 0; i <= n; ++i) m.vertices.push_back({a + (b - a) * i / n, 0.0});
    for (int i = 0; i < n; ++i) m.elements.push_back({i, i + 1, -1});
    m.boundary_edges.push_back({0, 0, BoundaryTag::dirichlet});
    m.boundary_edges.push_back({n, n, BoundaryTag::dirichlet});
    return m;
}

Mesh refine_nested(const Mesh& coarse, int s) {
    if (s < 1) throw std::invalid_argument("refine_nested: s must be >= 1");

    Mesh fine;
    fine.dim = coarse.dim;
    std::map<NodeKey, int> index;

    auto get_vertex = [&](const NodeKey& key, Vec2 pos) {
        auto it = index.find(key);
        if (it != index.end()) return it->second;
        int id = fine.n_vertices();
        fine.vertices.push_back(pos);
        index.emplace(key, id);
        return id;
    };

    if (coarse.dim == 1) {
        for (int e = 0; e < coarse.n_elements(); ++e) {
            int v0 = coarse.elements[e][0], v1 = coarse.elements[e][1];
            Vec2 a = coarse.vertices[v0], b = coarse.vertices[v1];
            int prev = -1;
            for (int i = 0; i <= s; ++i) {
                NodeKey key = (i == 0)   ? vertex_key(v0)
                              : (i == s) ? vertex_key(v1)
                                         : edge_key(v0, v1, i, s);
                double t = static_cast<double>(i) / s;
                int id = get_vertex(key, {(1.0 - t) * a.x + t * b.x, 0.0});
                if (i > 0) {
                    fine.elements.push_back({prev, id, -1});
                    fine.parent_map.push_back(e);
                }
                prev = id;
            }
        }
        for (const auto& be : coarse.boundary_edges) {
            int id = index.at(vertex_key(be.v0));
            fine.boundary_edges.push_back({id, id, be.tag});
        }
        return fine;
    }

    std::map<std::pair<int, int>, std::vector<int>> edge_chain;  // coarse edge -> fine vertex ids

    for (int e = 0; e < coarse.n_elements(); ++e) {
        const auto& el = coarse.elements[e];
        Vec2 a = coarse.vertices[el[0]], b = coarse.vertices[el[1]], c = coarse.vertices[el[2]];
        // lattice point (i, j): a + (i/s)(b - a) + (j/s)(c - a), i + j <= s
        std::vector<int> local((s + 1) * (s + 2) / 2);
        auto lidx = [s](int i, int j) { return j * (s + 1) - j * (j - 1) / 2 + i; };
        for (int j = 0; j <= s; ++j)
            for (int i = 0; i + j <= s; ++i) {
                NodeKey key;
                if (i == 0 && j == 0)
                    key = vertex_key(el[0]);
                else if (i == s && j == 0)
                    key = vertex_key(el[1]);
                else if (i == 0 && j == s)
                    key = vertex_key(el[2]);
                else if (j == 0)
                    key = edge_key(el[0], el[1], i, s);
                else if (i == 0)
                    key = edge_key(el[0], el[2], j, s);
                else if (i + j == s)
                    key = edge_key(el[1], el[2], j, s);
                else
                    key = interior_key(e, i, j);
                double ti = static_cast<double>(i) / s, tj = static_cast<double>(j) / s;
                local[lidx(i, j)] = get_vertex(key, a + ti * (b - a) + tj * (c - a));
            }
        for (int j = 0; j < s; ++j)
            for (int i = 0; i + j < s; ++i) {
                fine.elements.push_back({local[lidx(i, j)], local[lidx(i + 1, j)], local[lidx(i, j + 1)]});
                fine.parent_map.push_back(e);
                if (i + j < s - 1) {
                    fine.elements.push_back(
                        {local[lidx(i + 1, j)], local[lidx(i + 1, j + 1)], local[lidx(i, j + 1)]});
                    fine.parent_map.push_back(e);
                }
            }
    }

    for (const auto& be : coarse.boundary_edges) {
        for (int i = 0; i < s; ++i) {
            NodeKey k0 = (i == 0) ? vertex_key(be.v0) : edge_key(be.v0, be.v1, i, s);
            NodeKey k1 = (i == s - 1) ? vertex_key(be.v1) : edge_key(be.v0, be.v1, i + 1, s);
            fine.boundary_edges.push_back({index.at(k0), index.at(k1), be.tag});
        }
    }
    return fine;
}

double meshsize(const Mesh& mesh) {
    if (mesh.n_elements() == 0) throw std::invalid_argument("meshsize: empty mesh");
    double h = 0.0;
    for (int e = 0; e < mesh.n_elements(); ++e) h = std::max(h, mesh.element_diameter(e));
    return h;
}

void validate_mesh(const Mesh& mesh, const Mesh* coarse) {
    if (mesh.dim != 1 && mesh.dim != 2) throw std::runtime_error("validate_mesh: dim must be 1 or 2");
    bool has_dirichlet = false;
    for (const auto& be : mesh.boundary_edges)
        if (be.tag == BoundaryTag::dirichlet) has_dirichlet = true;
    if (!has_dirichlet) throw std::runtime_error("validate_mesh: no Dirichlet boundary");

    if (mesh.dim == 2) {
        for (int e = 0; e < mesh.n_elements(); ++e)
            if (mesh.element_measure(e) <= 0.0)
                throw std::runtime_error("validate_mesh: non-positive element orientation");

        // every interior edge must appear exactly twice, boundary edges once
        std::map<std::pair<int, int>, int> edge_count;
        for (const auto& el : mesh.elements)
            for (int k = 0; k < 3; ++k) {
                int v0 = el[k], v1 = el[(k + 1) % 3];
                edge_count[{std::min(v0, v1), std::max(v0, v1)}]++;
            }
        std::map<std::pair<int, int>, int> boundary_count;
        for (const auto& be : mesh.boundary_edges)
            boundary_count[{std::min(be.v0, be.v1), std::max(be.v0, be.v1)}]++;
        for (const auto& [edge, count] : edge_count) {
            if (count > 2) throw std::runtime_error("validate_mesh: edge shared by > 2 triangles");
            auto it = boundary_count.find(edge);
            if (count == 1 && (it == boundary_count.end() || it->second != 1))
                throw std::runtime_error("validate_mesh: boundary edge without exactly one tag");
            if (count == 2 && it != boundary_count.end())
                throw std::runtime_error("validate_mesh: interior edge carries a boundary tag");
        }
    }

    if (coarse != nullptr) {
        if (mesh.parent_map.size() != mesh.elements.size())
            throw std::runtime_error("validate_mesh: parent_map size mismatch");
        double fine_area = 0.0, coarse_area = 0.0;
        for (int e = 0; e < mesh.n_elements(); ++e) fine_area += mesh.element_measure(e);
        for (int e = 0; e < coarse->n_elements(); ++e) coarse_area += coarse->element_measure(e);
        if (std::abs(fine_area - coarse_area) > 1e-12 * std::abs(coarse_area))
            throw std::runtime_error("validate_mesh: refinement changed total measure");

        for (int e = 0; e < mesh.n_elements(); ++e) {
            int p = mesh.parent_map[e];
            if (p < 0 || p >= coarse->n_elements())
                throw std::runtime_error("validate_mesh: parent index out of range");
            const auto& el = mesh.elements[e];
            Vec2 centroid{0.0, 0.0};
            int nv = mesh.dim == 1 ? 2 : 3;
            for (int k = 0; k < nv; ++k) centroid = centroid + mesh.vertices[el[k]];
            centroid = (1.0 / nv) * centroid;
            const auto& pel = coarse->elements[p];
            if (mesh.dim == 1) {
                double lo = std::min(coarse->vertices[pel[0]].x, coarse->vertices[pel[1]].x);
                double hi = std::max(coarse->vertices[pel[0]].x, coarse->vertices[pel[1]].x);
                if (centroid.x < lo - 1e-12 || centroid.x > hi + 1e-12)
                    throw std::runtime_error("validate_mesh: child centroid outside parent");
            } else {
                Vec2 a = coarse->vertices[pel[0]], b = coarse->vertices[pel[1]], c = coarse->vertices[pel[2]];
                double area = tri_signed_area(a, b, c);
                double l1 = tri_signed_area(centroid, b, c) / area;
                double l2 = tri_signed_area(a, centroid, c) / area;
                double l3 = tri_signed_area(a, b, centroid) / area;
                if (l1 < -1e-12 || l2 < -1e-12 || l3 < -1e-12)
                    throw std::runtime_error("validate_mesh: child centroid outside parent");
            }
        }
    }
}

Mesh read_mesh(std::istream& in) {
    int dim, nv, ne, nb;
    if (!(in >> dim >> nv >> ne >> nb)) throw std::runtime_error("read_mesh: bad header");
    if (dim != 1 && dim != 2) throw std::runtime_error("read_mesh: dim must be 1 or 2");
    Mesh m;
    m.dim = dim;
    m.vertices.resize(nv);
    for (auto& v : m.vertices) {
        if (dim == 1) {
            if (!(in >> v.x)) throw std::runtime_error("read_mesh: bad vertex line");
            v.y = 0.0;
        } else if (!(in >> v.x >> v.y)) {
            throw std::runtime_error("read_mesh: bad vertex line");
        }
    }
    m.elements.resize(ne);
    for (auto& el : m.elements) {
        el[2] = -1;
        if (dim == 1) {
            if (!(in >> el[0] >> el[1])) throw std::runtime_error("read_mesh: bad element line");
        } else if (!(in >> el[0] >> el[1] >> el[2])) {
            throw std::runtime_error("read_mesh: bad element line");
        }
    }
    m.boundary_edges.resize(nb);
    for (auto& be : m.boundary_edges) {
        std::string tag;
        if (!(in >> be.v0 >> be.v1 >> tag)) throw std::runtime_error("read_mesh: bad boundary line");
        if (tag == "D")
            be.tag = BoundaryTag::dirichlet;
        else if (tag == "N")
            be.tag = BoundaryTag::neumann;
        else
            throw std::runtime_error("read_mesh: boundary tag must be D or N");
    }
    validate_mesh(m);
    return m;
}

Mesh read_mesh_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_mesh_file: cannot open " + path);
    return read_mesh(in);
}

void write_mesh(const Mesh& mesh, std::ostream& out) {
    out.precision(17);
    out << mesh.dim << ' ' << mesh.n_vertices() << ' ' << mesh.n_elements() << ' '
        << mesh.boundary_edges.size() << '\n';
    for (const auto& v : mesh.vertices) {
        out << v.x;
        if (mesh.dim == 2) out << ' ' << v.y;
        out << '\n';
    }
    for (const auto& el : mesh.elements) {
        out << el[0] << ' ' << el[1];
        if (mesh.dim == 2) out << ' ' << el[2];
        out << '\n';
    }
    for (const auto& be : mesh.boundary_edges)
        out << be.v0 << ' ' << be.v1 << ' ' << (be.tag == BoundaryTag::dirichlet ? 'D' : 'N') << '\n';
}

void write_mesh_file(const Mesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_mesh_file: cannot open " + path);
    write_mesh(mesh, out);
}

}  // namespace ivpinn
