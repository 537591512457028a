#include "ivpinn/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

namespace ivpinn {

CsrMatrix CsrMatrix::from_triplets(int n_rows, int n_cols,
                                   std::vector<std::tuple<int, int, double>> triplets) {
    std::sort(triplets.begin(), triplets.end(), [](const auto& a, const auto& b) {
        if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) < std::get<0>(b);
        return std::get<1>(a) < std::get<1>(b);
    });
    CsrMatrix m;
    m.n_rows = n_rows;
    m.n_cols = n_cols;
    m.row_ptr.assign(n_rows + 1, 0);
    m.col.reserve(triplets.size());
    m.val.reserve(triplets.size());
    for (std::size_t k = 0; k < triplets.size();) {
        auto [i, j, v] = triplets[k];
        if (i < 0 || i >= n_rows || j < 0 || j >= n_cols)
            throw std::invalid_argument("CsrMatrix::from_triplets: index out of range");
        double sum = v;
        std::size_t k2 = k + 1;
        while (k2 < triplets.size() && std::get<0>(triplets[k2]) == i &&
               std::get<1>(triplets[k2]) == j) {
            sum += std::get<2>(triplets[k2]);
            ++k2;
        }
        m.col.push_back(j);
        m.val.push_back(sum);
        m.row_ptr[i + 1]++;
        k = k2;
    }
    for (int i = 0; i < n_rows; ++i) m.row_ptr[i + 1] += m.row_ptr[i];
    return m;
}

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
    for (int i = 0; i < n_rows; ++i) {
        double s = 0.0;
        for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += val[k] * x[col[k]];
        y[i] = s;
    }
}

void CsrMatrix::multiply_transpose(std::span<const double> x, std::span<double> y) const {
    std::fill(y.begin(), y.end(), 0.0);
    for (int i = 0; i < n_rows; ++i) {
        const double xi = x[i];
        if (xi == 0.0) continue;
        for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) y[col[k]] += val[k] * xi;
    }
}

std::vector<double> CsrMatrix::multiply(std::span<const double> x) const {
    std::vector<double> y(n_rows);
    multiply(x, y);
    return y;
}

std::vector<double> CsrMatrix::multiply_transpose(std::span<const double> x) const {
    std::vector<double> y(n_cols);
    multiply_transpose(x, y);
    return y;
}

BandCholesky::BandCholesky(int n, int bandwidth) : n_(n), bw_(bandwidth) {
    if (n <= 0 || bandwidth < 0) throw std::invalid_argument("BandCholesky: bad dimensions");
    a_.assign(static_cast<std::size_t>(n) * (bandwidth + 1), 0.0);
}

void BandCholesky::add(int i, int j, double v) {
    if (i < j) std::swap(i, j);
    int d = i - j;
    if (d > bw_) throw std::invalid_argument("BandCholesky::add: entry outside band");
    at(i, d) += v;
}

double BandCholesky::get(int i, int j) const {
    if (i < j) std::swap(i, j);
    int d = i - j;
    if (d > bw_) return 0.0;
    return at(i, d);
}

bool BandCholesky::factorize(double pivot_tol) {
    for (int i = 0; i < n_; ++i) {
        int j0 = std::max(0, i - bw_);
        for (int j = j0; j <= i; ++j) {
            double s = at(i, i - j);
            int k0 = std::max(j0, j - bw_);
            for (int k = k0; k < j; ++k) s -= at(i, i - k) * at(j, j - k);
            if (j < i) {
                at(i, i - j) = s / at(j, 0);
            } else {
                if (s <= pivot_tol) return false;
                at(i, 0) = std::sqrt(s);
            }
        }
    }
    factored_ = true;
    return true;
}

void BandCholesky::solve(std::span<double> x) const {
    if (!factored_) throw std::logic_error("BandCholesky::solve before factorize");
    for (int i = 0; i < n_; ++i) {
        double s = x[i];
        int j0 = std::max(0, i - bw_);
        for (int j = j0; j < i; ++j) s -= at(i, i - j) * x[j];
        x[i] = s / at(i, 0);
    }
    for (int i = n_ - 1; i >= 0; --i) {
        double s = x[i];
        int j1 = std::min(n_ - 1, i + bw_);
        for (int j = i + 1; j <= j1; ++j) s -= at(j, j - i) * x[j];
        x[i] = s / at(i, 0);
    }
}

BandLu::BandLu(int n, int lower_bw, int upper_bw) : n_(n), bl_(lower_bw), bu_(upper_bw) {
    if (n <= 0 || lower_bw < 0 || upper_bw < 0) throw std::invalid_argument("BandLu: bad dimensions");
    a_.assign(static_cast<std::size_t>(n) * width(), 0.0);
    pivot_.assign(n, 0);
}

void BandLu::add(int i, int j, double v) {
    int off = j - i + bl_;
    if (j - i > bu_ || i - j > bl_) throw std::invalid_argument("BandLu::add: entry outside band");
    at(i, off) += v;
}

void BandLu::factorize() {
    // Row-storage band LU with partial pivoting; fill may extend the upper
    // band to bl+bu, which the storage width already accommodates.
    for (int k = 0; k < n_; ++k) {
        int imax = k;
        double vmax = std::abs(at(k, bl_));
        int ilast = std::min(n_ - 1, k + bl_);
        for (int i = k + 1; i <= ilast; ++i) {
            double v = std::abs(at(i, k - i + bl_));
            if (v > vmax) {
                vmax = v;
                imax = i;
            }
        }
        if (vmax == 0.0) throw std::runtime_error("BandLu::factorize: singular matrix");
        pivot_[k] = imax;
        if (imax != k) {
            // Swap the overlapping parts of rows k and imax (columns k .. k+bl+bu).
            for (int j = k; j <= std::min(n_ - 1, k + bl_ + bu_); ++j)
                std::swap(at(k, j - k + bl_), at(imax, j - imax + bl_));
        }
        double pivot = at(k, bl_);
        for (int i = k + 1; i <= ilast; ++i) {
            double m = at(i, k - i + bl_) / pivot;
            at(i, k - i + bl_) = m;
            if (m == 0.0) continue;
            for (int j = k + 1; j <= std::min(n_ - 1, k + bl_ + bu_); ++j)
                at(i, j - i + bl_) -= m * at(k, j - k + bl_);
        }
    }
    factored_ = true;
}

void BandLu::solve(std::span<double> x) const {
    if (!factored_) throw std::logic_error("BandLu::solve before factorize");
    for (int k = 0; k < n_; ++k) {
        if (pivot_[k] != k) std::swap(x[k], x[pivot_[k]]);
        int ilast = std::min(n_ - 1, k + bl_);
        for (int i = k + 1; i <= ilast; ++i) x[i] -= at(i, k - i + bl_) * x[k];
    }
    for (int i = n_ - 1; i >= 0; --i) {
        double s = x[i];
        int jlast = std::min(n_ - 1, i + bl_ + bu_);
        for (int j = i + 1; j <= jlast; ++j) s -= at(i, j - i + bl_) * x[j];
        x[i] = s / at(i, bl_);
    }
}

DenseCholesky::DenseCholesky(int n) : n_(n) {
    if (n <= 0) throw std::invalid_argument("DenseCholesky: bad dimension");
    a_.assign(static_cast<std::size_t>(n) * n, 0.0);
}

bool DenseCholesky::factorize() {
    double max_diag = 0.0;
    for (int i = 0; i < n_; ++i) max_diag = std::max(max_diag, std::abs(at(i, i)));
    const double tol = n_ * 1e-14 * max_diag;
    for (int j = 0; j < n_; ++j) {
        double d = at(j, j);
        for (int k = 0; k < j; ++k) d -= at(j, k) * at(j, k);
        if (d <= tol) return false;
        d = std::sqrt(d);
        at(j, j) = d;
        for (int i = j + 1; i < n_; ++i) {
            double s = at(i, j);
            const double* ri = &a_[static_cast<std::size_t>(i) * n_];
            const double* rj = &a_[static_cast<std::size_t>(j) * n_];
            for (int k = 0; k < j; ++k) s -= ri[k] * rj[k];
            at(i, j) = s / d;
        }
    }
    factored_ = true;
    return true;
}

void DenseCholesky::solve(std::span<double> x) const {
    if (!factored_) throw std::logic_error("DenseCholesky::solve before factorize");
    for (int i = 0; i < n_; ++i) {
        double s = x[i];
        const double* ri = &a_[static_cast<std::size_t>(i) * n_];
        for (int j = 0; j < i; ++j) s -= ri[j] * x[j];
        x[i] = s / ri[i];
    }
    for (int i = n_ - 1; i >= 0; --i) {
        double s = x[i];
        for (int j = i + 1; j < n_; ++j) s -= a_[static_cast<std::size_t>(j) * n_ + i] * x[j];
        x[i] = s / a_[static_cast<std::size_t>(i) * n_ + i];
    }
}

void gauss_legendre_01(int n, std::vector<double>& points, std::vector<double>& weights) {
    if (n < 1) throw std::invalid_argument("gauss_legendre_01: n must be >= 1");
    points.assign(n, 0.0);
    weights.assign(n, 0.0);
    // Newton iteration on Legendre polynomials over [-1, 1], then map to [0, 1].
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        double w = 2.0 / ((1.0 - x * x) * pp * pp);
        points[i] = 0.5 * (1.0 - x);
        points[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace ivpinn
