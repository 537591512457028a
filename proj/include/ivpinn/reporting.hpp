#pragma once

#include <span>
#include <string>
#include <vector>

#include "ivpinn/fem_space.hpp"
#include "ivpinn/lifting.hpp"

namespace ivpinn {

/// Measurement quadrature over the space's own mesh, strictly finer than the
/// assembly rule, with point-evaluation matrices for nodal fields.
struct ErrorMeasure {
    InterpolationMatrices mats;
    std::vector<Vec2> points;
    std::vector<double> weights;
    int dim = 2;
};

ErrorMeasure build_error_measure(const FeSpace& space, int precision);

struct ErrorPair {
    double h1 = 0.0;
    double l2 = 0.0;
};

/// sqrt(sum w [(u - u_h)^2 + |grad u - grad u_h|^2]) for a nodal field.
ErrorPair h1_l2_error(const ErrorMeasure& measure, std::span<const double> u_nodes,
                      const ScalarField& exact);

/// Same, for a field given directly by values/gradients at the measurement
/// points (used for non-interpolated networks).
ErrorPair h1_l2_error_values(const ErrorMeasure& measure, std::span<const double> values,
                             std::span<const Vec2> grads, const ScalarField& exact);

double h1_norm(const ErrorMeasure& measure, std::span<const double> u_nodes);

/// Least-squares slope of log(error) vs log(h), dropping up to max_trim points
/// from the coarse end when that improves the fit (R^2). Positive slope means
/// the error decays like h^slope. Throws if fewer than 3 points survive or any
/// error is non-positive.
double fit_rate(const std::vector<std::pair<double, double>>& h_error, int max_trim);

struct ConvergenceRow {
    double H = 0.0;
    double h = 0.0;
    int n_inputs = 0;
    double h1_error = 0.0;
    double l2_error = 0.0;
    double final_loss = 0.0;
    double wall_time = 0.0;
};

struct ConvergenceRecord {
    std::string case_name;
    int k_test = 0;
    int q = 0;
    int k_int = 0;
    std::uint64_t seed = 0;
    std::vector<ConvergenceRow> rows;  // sorted by decreasing H
    double fitted_rate = 0.0;
    bool rate_defined = false;

    void fit(int max_trim = 2);
};

void write_convergence_csv(const ConvergenceRecord& record, const std::string& path);
std::string convergence_csv_name(const std::string& case_name, int k_test, int q);

}  // namespace ivpinn
