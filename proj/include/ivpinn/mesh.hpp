#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace ivpinn {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }

enum class BoundaryTag { dirichlet, neumann };

struct BoundaryEdge {
    int v0 = -1;
    int v1 = -1;  // == v0 for 1D boundary vertices
    BoundaryTag tag = BoundaryTag::dirichlet;
};

struct Rect {
    double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;
};

/// Per-side boundary tags of a rectangle, in the order left/right/bottom/top.
struct BoundarySpec {
    BoundaryTag left = BoundaryTag::dirichlet;
    BoundaryTag right = BoundaryTag::dirichlet;
    BoundaryTag bottom = BoundaryTag::dirichlet;
    BoundaryTag top = BoundaryTag::dirichlet;

    static BoundarySpec all_dirichlet() { return {}; }
};

/// Conforming triangulation (dim 2) or interval partition (dim 1).
/// Immutable after construction; parent_map links refined elements to the
/// coarse mesh they were produced from.
struct Mesh {
    int dim = 2;
    std::vector<Vec2> vertices;
    std::vector<std::array<int, 3>> elements;  // 1D elements use {v0, v1, -1}
    std::vector<BoundaryEdge> boundary_edges;
    std::vector<int> parent_map;  // empty unless built by refine_nested

    int n_elements() const { return static_cast<int>(elements.size()); }
    int n_vertices() const { return static_cast<int>(vertices.size()); }
    double element_measure(int e) const;  // area (2D) or length (1D)
    double element_diameter(int e) const;
};

Mesh build_structured_mesh(int nx, int ny, const Rect& domain, const BoundarySpec& boundary);
Mesh build_interval_mesh(int n, double a, double b);
Mesh refine_nested(const Mesh& coarse, int s);
double meshsize(const Mesh& mesh);

/// Checks conformity, orientation, boundary tagging and (when a parent map is
/// present) geometric nesting. Throws std::runtime_error on violation.
void validate_mesh(const Mesh& mesh, const Mesh* coarse = nullptr);

// Plain-text format: `dim n_vertices n_elements n_boundary_edges` header,
// vertex coordinate lines, 0-based element lines, then `v0 v1 tag` lines
// with tag D or N.
Mesh read_mesh(std::istream& in);
Mesh read_mesh_file(const std::string& path);
void write_mesh(const Mesh& mesh, std::ostream& out);
void write_mesh_file(const Mesh& mesh, const std::string& path);

}  // namespace ivpinn
