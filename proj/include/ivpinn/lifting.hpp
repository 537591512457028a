#pragma once

#include <functional>
#include <vector>

#include "ivpinn/mesh.hpp"

namespace ivpinn {

/// Closed-form scalar field with gradient.
struct ScalarField {
    std::function<double(Vec2)> value;
    std::function<Vec2(Vec2)> grad;
};

ScalarField zero_field();

/// Dirichlet lifting data: Phi vanishes on Gamma_D and is positive inside the
/// domain; ubar matches the Dirichlet data g on Gamma_D. The solution ansatz
/// is B w = ubar + Phi w.
struct BoundaryLifting {
    ScalarField phi;
    ScalarField ubar;
};

/// Product of the affine functions vanishing on each Dirichlet side of an
/// axis-aligned rectangle (1D: interval endpoints), normalized to be positive
/// inside.
ScalarField build_phi_rect(const Rect& domain, const BoundarySpec& boundary);
ScalarField build_phi_interval(double a, double b);

struct BatchB {
    std::vector<double> values;
    std::vector<Vec2> grads;
};

/// Applies B w = ubar + Phi w pointwise: value = ubar + Phi w,
/// grad = grad(ubar) + Phi grad(w) + w grad(Phi).
BatchB apply_B(const BoundaryLifting& lifting, const std::vector<Vec2>& points,
               const std::vector<double>& w_values, const std::vector<Vec2>& w_grads);

}  // namespace ivpinn
