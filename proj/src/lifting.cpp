#include "ivpinn/lifting.hpp"

#include <stdexcept>

namespace ivpinn {

ScalarField zero_field() {
    return {[](Vec2) { return 0.0; }, [](Vec2) { return Vec2{0.0, 0.0}; }};
}

ScalarField build_phi_rect(const Rect& domain, const BoundarySpec& boundary) {
    if (!(domain.x1 > domain.x0) || !(domain.y1 > domain.y0))
        throw std::invalid_argument("build_phi_rect: degenerate domain");

    // Affine factors (a x + b y + c), each vanishing on one Dirichlet side
    // and positive inside.
    struct Line {
        double a, b, c;
    };
    std::vector<Line> lines;
    if (boundary.left == BoundaryTag::dirichlet) lines.push_back({1.0, 0.0, -domain.x0});
    if (boundary.right == BoundaryTag::dirichlet) lines.push_back({-1.0, 0.0, domain.x1});
    if (boundary.bottom == BoundaryTag::dirichlet) lines.push_back({0.0, 1.0, -domain.y0});
    if (boundary.top == BoundaryTag::dirichlet) lines.push_back({0.0, -1.0, domain.y1});
    if (lines.empty()) throw std::invalid_argument("build_phi_rect: no Dirichlet side");

    ScalarField f;
    f.value = [lines](Vec2 p) {
        double v = 1.0;
        for (const auto& l : lines) v *= l.a * p.x + l.b * p.y + l.c;
        return v;
    };
    f.grad = [lines](Vec2 p) {
        Vec2 g{0.0, 0.0};
        for (std::size_t i = 0; i < lines.size(); ++i) {
            double other = 1.0;
            for (std::size_t j = 0; j < lines.size(); ++j)
                if (j != i) other *= lines[j].a * p.x + lines[j].b * p.y + lines[j].c;
            g.x += lines[i].a * other;
            g.y += lines[i].b * other;
        }
        return g;
    };
    return f;
}

ScalarField build_phi_interval(double a, double b) {
    if (!(b > a)) throw std::invalid_argument("build_phi_interval: degenerate interval");
    ScalarField f;
    f.value = [a, b](Vec2 p) { return (p.x - a) * (b - p.x); };
    f.grad = [a, b](Vec2 p) { return Vec2{a + b - 2.0 * p.x, 0.0}; };
    return f;
}

BatchB apply_B(const BoundaryLifting& lifting, const std::vector<Vec2>& points,
               const std::vector<double>& w_values, const std::vector<Vec2>& w_grads) {
    if (points.size() != w_values.size() || points.size() != w_grads.size())
        throw std::invalid_argument("apply_B: inconsistent batch sizes");
    BatchB out;
    out.values.resize(points.size());
    out.grads.resize(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        Vec2 p = points[i];
        double phi = lifting.phi.value(p);
        Vec2 dphi = lifting.phi.grad(p);
        out.values[i] = lifting.ubar.value(p) + phi * w_values[i];
        Vec2 dubar = lifting.ubar.grad(p);
        out.grads[i] = {dubar.x + phi * w_grads[i].x + w_values[i] * dphi.x,
                        dubar.y + phi * w_grads[i].y + w_values[i] * dphi.y};
    }
    return out;
}

}  // namespace ivpinn
