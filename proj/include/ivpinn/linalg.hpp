#pragma once

#include <cstdint>
#include <span>
#include <tuple>
#include <vector>

namespace ivpinn {

/// Sparse matrix in compressed-row form, assembled from (row, col, value) triplets.
struct CsrMatrix {
    int n_rows = 0;
    int n_cols = 0;
    std::vector<int> row_ptr;  // size n_rows + 1
    std::vector<int> col;
    std::vector<double> val;

    static CsrMatrix from_triplets(int n_rows, int n_cols,
                                   std::vector<std::tuple<int, int, double>> triplets);

    std::size_t nnz() const { return val.size(); }
    void multiply(std::span<const double> x, std::span<double> y) const;           // y = A x
    void multiply_transpose(std::span<const double> x, std::span<double> y) const; // y = A^T x
    std::vector<double> multiply(std::span<const double> x) const;
    std::vector<double> multiply_transpose(std::span<const double> x) const;
};

/// Symmetric positive-definite matrix stored as a lower band; Cholesky in place.
/// band(i, d) holds entry (i, i-d) for d = 0..bandwidth.
class BandCholesky {
  public:
    BandCholesky(int n, int bandwidth);

    void add(int i, int j, double v);  // symmetric scatter, stores lower half
    double get(int i, int j) const;
    // Factor A = L L^T. Returns false on a non-positive pivot (matrix not SPD
    // to working precision); the factorization is then unusable.
    bool factorize(double pivot_tol = 0.0);
    void solve(std::span<double> x) const;  // in place, after factorize
    int size() const { return n_; }
    int bandwidth() const { return bw_; }

  private:
    int n_, bw_;
    bool factored_ = false;
    std::vector<double> a_;  // n x (bw+1), row-major
    double& at(int i, int d) { return a_[static_cast<std::size_t>(i) * (bw_ + 1) + d]; }
    double at(int i, int d) const { return a_[static_cast<std::size_t>(i) * (bw_ + 1) + d]; }
};

/// General banded matrix with lower bandwidth bl and upper bandwidth bu;
/// LU factorization with partial pivoting (fill widens the upper band to bl+bu).
class BandLu {
  public:
    BandLu(int n, int lower_bw, int upper_bw);

    void add(int i, int j, double v);
    void factorize();  // throws std::runtime_error on exact singularity
    void solve(std::span<double> x) const;
    int size() const { return n_; }

  private:
    int n_, bl_, bu_;
    bool factored_ = false;
    std::vector<double> a_;   // n x (bl + bl + bu + 1): columns index diagonal offset
    std::vector<int> pivot_;
    int width() const { return 2 * bl_ + bu_ + 1; }
    // entry (i, j) lives at offset j - i + bl_ in row i (post-pivot range)
    double& at(int i, int off) { return a_[static_cast<std::size_t>(i) * width() + off]; }
    double at(int i, int off) const { return a_[static_cast<std::size_t>(i) * width() + off]; }
};

/// Dense SPD Cholesky used by the inf-sup diagnostic. factorize() reports
/// rank deficiency instead of throwing so callers can map it to alpha = 0.
class DenseCholesky {
  public:
    explicit DenseCholesky(int n);
    double& at(int i, int j) { return a_[static_cast<std::size_t>(i) * n_ + j]; }
    bool factorize();  // false if a pivot falls below n * eps * max_diagonal
    void solve(std::span<double> x) const;
    int size() const { return n_; }

  private:
    int n_;
    bool factored_ = false;
    std::vector<double> a_;
};

/// Gauss-Legendre rule with n points on [0, 1]; exact for degree <= 2n-1.
void gauss_legendre_01(int n, std::vector<double>& points, std::vector<double>& weights);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

}  // namespace ivpinn
