#pragma once

#include <vector>

#include "ivpinn/mesh.hpp"

namespace ivpinn {

/// Quadrature rule on the reference element: the unit triangle
/// {x, y >= 0, x + y <= 1} or the unit interval [0, 1].
struct QuadratureRule {
    std::vector<Vec2> points;  // 1D rules use .x only
    std::vector<double> weights;
    int precision = 0;
};

/// Symmetric Gauss rule of the stated precision on the unit triangle.
/// q = 3 and q = 5 come from tabulated symmetric rules; other precisions
/// (used for error measurement) fall back to a collapsed tensor-product
/// Gauss rule, which also has positive interior points.
QuadratureRule reference_triangle_rule(int q);

/// Gauss-Legendre rule on [0, 1] with ceil((q+1)/2) points.
QuadratureRule reference_interval_rule(int q);

struct MappedRule {
    std::vector<Vec2> points;
    std::vector<double> weights;
};

MappedRule map_rule_triangle(const QuadratureRule& rule, Vec2 a, Vec2 b, Vec2 c);
MappedRule map_rule_interval(const QuadratureRule& rule, Vec2 a, Vec2 b);  // edge or 1D element

}  // namespace ivpinn
