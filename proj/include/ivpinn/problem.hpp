#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ivpinn/lifting.hpp"
#include "ivpinn/mesh.hpp"

namespace ivpinn {

/// Second-order elliptic boundary-value problem
///   -div(mu grad u) + beta . grad u + sigma u = f
/// with u = g on Gamma_D and mu du/dn = psi on Gamma_N. When
/// nonlinear_reaction is set, the reaction term sigma u is replaced by
/// sigma exp(-p u^2).
struct ProblemDefinition {
    int dim = 2;
    Rect domain;
    BoundarySpec boundary;
    std::function<double(Vec2)> mu;
    std::function<Vec2(Vec2)> beta;
    std::function<double(Vec2)> sigma;
    std::function<double(Vec2)> f;
    std::function<double(Vec2, Vec2)> psi;  // (point, outward normal); null if no Neumann side
    std::optional<ScalarField> exact;
    bool nonlinear_reaction = false;
    double p_param = 0.0;
};

struct TestCase {
    std::string name;
    ProblemDefinition problem;
    BoundaryLifting lifting;
    double regularity_limit = 0.0;  // 0 = unlimited (smooth); else caps the rate
};

TestCase case_smooth();
TestCase case_corner_singularity();
TestCase case_zero_data(int dim);
TestCase case_parametric_nonlinear(double p);

/// Equally spaced training parameters of the parametric study.
std::vector<double> parametric_training_set(int n_p = 13, double p_min = 0.5, double p_max = 2.0);
bool parametric_in_range(double p);

std::vector<std::string> registered_case_names();
TestCase case_by_name(const std::string& name);  // parametric cases as "parametric@<p>"

/// Finite-difference application of the differential operator at random
/// interior points; guards the hand-derived closed forms. Returns the largest
/// relative defect |L u - f| / max(1, |f|).
double manufactured_consistency_error(const ProblemDefinition& problem, int n_points,
                                      std::uint64_t seed);

/// Largest relative mismatch between the stored exact gradient and central
/// finite differences of the exact value at random interior points.
double exact_gradient_fd_error(const ProblemDefinition& problem, int n_points, std::uint64_t seed);

}  // namespace ivpinn
