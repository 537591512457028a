#include "ivpinn/reporting.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "ivpinn/quadrature.hpp"

namespace ivpinn {

ErrorMeasure build_error_measure(const FeSpace& space, int precision) {
    const Mesh& mesh = *space.mesh;
    ErrorMeasure em;
    em.dim = mesh.dim;
    const QuadratureRule rule =
        mesh.dim == 1 ? reference_interval_rule(precision) : reference_triangle_rule(precision);

    std::vector<std::vector<Vec2>> groups(mesh.n_elements());
    std::vector<int> parents(mesh.n_elements());
    for (int e = 0; e < mesh.n_elements(); ++e) {
        const auto& el = mesh.elements[e];
        MappedRule mapped =
            mesh.dim == 1
                ? map_rule_interval(rule, mesh.vertices[el[0]], mesh.vertices[el[1]])
                : map_rule_triangle(rule, mesh.vertices[el[0]], mesh.vertices[el[1]],
                                    mesh.vertices[el[2]]);
        groups[e] = mapped.points;
        parents[e] = e;
        em.points.insert(em.points.end(), mapped.points.begin(), mapped.points.end());
        em.weights.insert(em.weights.end(), mapped.weights.begin(), mapped.weights.end());
    }
    em.mats = build_interpolation_matrices(space, groups, parents);
    return em;
}

ErrorPair h1_l2_error(const ErrorMeasure& em, std::span<const double> u_nodes,
                      const ScalarField& exact) {
    auto values = em.mats.values.multiply(u_nodes);
    auto dx = em.mats.dx.multiply(u_nodes);
    std::vector<double> dy;
    if (em.dim == 2) dy = em.mats.dy.multiply(u_nodes);
    std::vector<Vec2> grads(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        grads[i] = {dx[i], em.dim == 2 ? dy[i] : 0.0};
    return h1_l2_error_values(em, values, grads, exact);
}

ErrorPair h1_l2_error_values(const ErrorMeasure& em, std::span<const double> values,
                             std::span<const Vec2> grads, const ScalarField& exact) {
    if (values.size() != em.points.size() || grads.size() != em.points.size())
        throw std::invalid_argument("h1_l2_error_values: batch size mismatch");
    double l2 = 0.0, semi = 0.0;
    for (std::size_t i = 0; i < em.points.size(); ++i) {
        double du = exact.value(em.points[i]) - values[i];
        Vec2 eg = exact.grad(em.points[i]);
        double dgx = eg.x - grads[i].x;
        double dgy = em.dim == 2 ? eg.y - grads[i].y : 0.0;
        l2 += em.weights[i] * du * du;
        semi += em.weights[i] * (dgx * dgx + dgy * dgy);
    }
    return {std::sqrt(l2 + semi), std::sqrt(l2)};
}

double h1_norm(const ErrorMeasure& em, std::span<const double> u_nodes) {
    return h1_l2_error(em, u_nodes, zero_field()).h1;
}

namespace {

struct Fit {
    double slope = 0.0;
    double r2 = -1.0;
};

Fit least_squares_loglog(std::span<const std::pair<double, double>> pts) {
    const int n = static_cast<int>(pts.size());
    double sx = 0.0, sy = 0.0;
    std::vector<double> xs(n), ys(n);
    for (int i = 0; i < n; ++i) {
        xs[i] = std::log(pts[i].first);
        ys[i] = std::log(pts[i].second);
        sx += xs[i];
        sy += ys[i];
    }
    double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (int i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    Fit f;
    f.slope = sxy / sxx;
    f.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return f;
}

}  // namespace

double fit_rate(const std::vector<std::pair<double, double>>& h_error, int max_trim) {
    for (const auto& [h, e] : h_error) {
        if (!(h > 0.0)) throw std::invalid_argument("fit_rate: mesh sizes must be positive");
        if (!(e > 0.0))
            throw std::invalid_argument("fit_rate: errors must be positive (zero error has no rate)");
    }
    // sort by decreasing h so trimming drops the coarse end
    auto sorted = h_error;
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });

    Fit best;
    bool found = false;
    for (int drop = 0; drop <= max_trim; ++drop) {
        int remaining = static_cast<int>(sorted.size()) - drop;
        if (remaining < 3) break;
        Fit f = least_squares_loglog({sorted.data() + drop, static_cast<std::size_t>(remaining)});
        if (!found || f.r2 > best.r2) {
            best = f;
            found = true;
        }
    }
    if (!found) throw std::invalid_argument("fit_rate: need at least 3 points after trimming");
    return best.slope;
}

void ConvergenceRecord::fit(int max_trim) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& row : rows)
        if (row.h1_error > 0.0) pts.push_back({row.H, row.h1_error});
    rate_defined = pts.size() >= 3;
    if (rate_defined) fitted_rate = fit_rate(pts, max_trim);
}

std::string convergence_csv_name(const std::string& case_name, int k_test, int q) {
    return case_name + "_" + std::to_string(k_test) + "_" + std::to_string(q) + ".csv";
}

void write_convergence_csv(const ConvergenceRecord& record, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_convergence_csv: cannot open " + path);
    out.precision(16);
    out << "# case=" << record.case_name << " k_test=" << record.k_test << " q=" << record.q
        << " k_int=" << record.k_int << " seed=" << record.seed;
    if (record.rate_defined) out << " fitted_rate=" << record.fitted_rate;
    out << '\n';
    out << "H,h,n_inputs,h1_error,l2_error,final_loss,wall_time\n";
    for (const auto& r : record.rows)
        out << r.H << ',' << r.h << ',' << r.n_inputs << ',' << r.h1_error << ',' << r.l2_error
            << ',' << r.final_loss << ',' << r.wall_time << '\n';
}

}  // namespace ivpinn
