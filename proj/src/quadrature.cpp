#include "ivpinn/quadrature.hpp"

#include <cmath>
#include <stdexcept>

#include "ivpinn/linalg.hpp"

namespace ivpinn {

namespace {

void push_orbit3(QuadratureRule& r, double a, double w) {
    double b = 1.0 - 2.0 * a;
    r.points.push_back({a, a});
    r.points.push_back({b, a});
    r.points.push_back({a, b});
    r.weights.insert(r.weights.end(), 3, w);
}

// Collapsed tensor-product rule: x = u, y = v (1 - u) with the Jacobian
// (1 - u) folded into the weights. n Gauss points per direction integrate
// total degree 2n - 2 exactly on the triangle.
QuadratureRule collapsed_triangle_rule(int q) {
    int n = (q + 3) / 2;  // smallest n with 2n - 2 >= q
    std::vector<double> p, w;
    gauss_legendre_01(n, p, w);
    QuadratureRule r;
    r.precision = q;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            r.points.push_back({p[i], p[j] * (1.0 - p[i])});
            r.weights.push_back(w[i] * w[j] * (1.0 - p[i]));
        }
    return r;
}

}  // namespace

QuadratureRule reference_triangle_rule(int q) {
    if (q < 1 || q > 40)
        throw std::invalid_argument("reference_triangle_rule: unsupported precision q=" +
                                    std::to_string(q) + " (expected 1 <= q <= 40)");
    QuadratureRule r;
    r.precision = q;
    if (q == 3) {
        // 6-point symmetric rule, two 3-orbits
        push_orbit3(r, 0.44594849091596488, 0.11169079483900573);
        push_orbit3(r, 0.09157621350977074, 0.05497587182766094);
        return r;
    }
    if (q == 5) {
        // 7-point symmetric rule: centroid plus two 3-orbits
        r.points.push_back({1.0 / 3.0, 1.0 / 3.0});
        r.weights.push_back(9.0 / 80.0);
        const double s15 = std::sqrt(15.0);
        push_orbit3(r, (6.0 + s15) / 21.0, (155.0 + s15) / 2400.0);
        push_orbit3(r, (6.0 - s15) / 21.0, (155.0 - s15) / 2400.0);
        return r;
    }
    return collapsed_triangle_rule(q);
}

QuadratureRule reference_interval_rule(int q) {
    if (q < 1 || q > 80)
        throw std::invalid_argument("reference_interval_rule: unsupported precision q=" +
                                    std::to_string(q));
    int n = (q + 2) / 2;  // ceil((q+1)/2)
    std::vector<double> p, w;
    gauss_legendre_01(n, p, w);
    QuadratureRule r;
    r.precision = q;
    for (int i = 0; i < n; ++i) {
        r.points.push_back({p[i], 0.0});
        r.weights.push_back(w[i]);
    }
    return r;
}

MappedRule map_rule_triangle(const QuadratureRule& rule, Vec2 a, Vec2 b, Vec2 c) {
    double two_area = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
    if (!(two_area > 0.0)) throw std::invalid_argument("map_rule_triangle: degenerate or misoriented triangle");
    MappedRule m;
    m.points.reserve(rule.points.size());
    m.weights.reserve(rule.weights.size());
    for (std::size_t k = 0; k < rule.points.size(); ++k) {
        Vec2 p = rule.points[k];
        m.points.push_back(a + p.x * (b - a) + p.y * (c - a));
        m.weights.push_back(rule.weights[k] * two_area);  // |T| / |T_ref| = two_area / 1
    }
    return m;
}

MappedRule map_rule_interval(const QuadratureRule& rule, Vec2 a, Vec2 b) {
    double len = std::hypot(b.x - a.x, b.y - a.y);
    if (!(len > 0.0)) throw std::invalid_argument("map_rule_interval: degenerate segment");
    MappedRule m;
    for (std::size_t k = 0; k < rule.points.size(); ++k) {
        double t = rule.points[k].x;
        m.points.push_back(a + t * (b - a));
        m.weights.push_back(rule.weights[k] * len);
    }
    return m;
}

}  // namespace ivpinn
