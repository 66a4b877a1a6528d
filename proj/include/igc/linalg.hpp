#pragma once

// Dense linear algebra for desk-scale collocation systems: row-major matrix,
// LU with partial pivoting, transpose solves and a 1-norm condition estimate.

#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace igc {

class singular_system_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Matrix {
public:
    Matrix() = default;
    Matrix(long rows, long cols, double fill = 0.0)
        : rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), fill) {}

    long rows() const { return rows_; }
    long cols() const { return cols_; }
    double& operator()(long i, long j) { return a_[static_cast<std::size_t>(i) * cols_ + j]; }
    double operator()(long i, long j) const { return a_[static_cast<std::size_t>(i) * cols_ + j]; }
    double* row(long i) { return a_.data() + static_cast<std::size_t>(i) * cols_; }
    const double* row(long i) const { return a_.data() + static_cast<std::size_t>(i) * cols_; }
    const std::vector<double>& data() const { return a_; }

    double max_abs() const {
        double m = 0.0;
        for (double v : a_) m = std::max(m, std::abs(v));
        return m;
    }

    /// Maximum absolute column sum.
    double norm1() const {
        double m = 0.0;
        for (long j = 0; j < cols_; ++j) {
            double s = 0.0;
            for (long i = 0; i < rows_; ++i) s += std::abs((*this)(i, j));
            m = std::max(m, s);
        }
        return m;
    }

    std::vector<double> multiply(const std::vector<double>& x) const {
        std::vector<double> y(static_cast<std::size_t>(rows_), 0.0);
        for (long i = 0; i < rows_; ++i) {
            const double* r = row(i);
            double s = 0.0;
            for (long j = 0; j < cols_; ++j) s += r[j] * x[static_cast<std::size_t>(j)];
            y[static_cast<std::size_t>(i)] = s;
        }
        return y;
    }

private:
    long rows_ = 0, cols_ = 0;
    std::vector<double> a_;
};

/// LU factorization with partial pivoting. Throws singular_system_error when
/// a pivot falls below 1e-13 times the largest matrix entry.
class LuFactor {
public:
    explicit LuFactor(Matrix m) : lu_(std::move(m)) {
        if (lu_.rows() != lu_.cols())
            throw std::invalid_argument("LuFactor: matrix must be square");
        const long n = lu_.rows();
        piv_.resize(static_cast<std::size_t>(n));
        std::iota(piv_.begin(), piv_.end(), 0L);
        const double tiny = 1e-13 * lu_.max_abs();

        for (long k = 0; k < n; ++k) {
            long imax = k;
            double vmax = std::abs(lu_(k, k));
            for (long i = k + 1; i < n; ++i) {
                const double v = std::abs(lu_(i, k));
                if (v > vmax) { vmax = v; imax = i; }
            }
            if (!(vmax > tiny))
                throw singular_system_error("LU pivot " + std::to_string(vmax) +
                                            " below threshold at column " + std::to_string(k) +
                                            "; system is numerically singular");
            if (imax != k) {
                for (long j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(imax, j));
                std::swap(piv_[static_cast<std::size_t>(k)], piv_[static_cast<std::size_t>(imax)]);
            }
            const double inv = 1.0 / lu_(k, k);
            for (long i = k + 1; i < n; ++i) {
                const double l = lu_(i, k) * inv;
                lu_(i, k) = l;
                if (l != 0.0) {
                    const double* rk = lu_.row(k);
                    double* ri = lu_.row(i);
                    for (long j = k + 1; j < n; ++j) ri[j] -= l * rk[j];
                }
            }
        }
    }

    long size() const { return lu_.rows(); }

    std::vector<double> solve(const std::vector<double>& b) const {
        const long n = size();
        std::vector<double> x(static_cast<std::size_t>(n));
        for (long i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = b[static_cast<std::size_t>(piv_[static_cast<std::size_t>(i)])];
        for (long i = 0; i < n; ++i) {
            const double* r = lu_.row(i);
            double s = x[static_cast<std::size_t>(i)];
            for (long j = 0; j < i; ++j) s -= r[j] * x[static_cast<std::size_t>(j)];
            x[static_cast<std::size_t>(i)] = s;
        }
        for (long i = n - 1; i >= 0; --i) {
            const double* r = lu_.row(i);
            double s = x[static_cast<std::size_t>(i)];
            for (long j = i + 1; j < n; ++j) s -= r[j] * x[static_cast<std::size_t>(j)];
            x[static_cast<std::size_t>(i)] = s / r[i];
        }
        return x;
    }

    /// Solves A^T x = b using the same factorization.
    std::vector<double> solve_transposed(const std::vector<double>& b) const {
        const long n = size();
        std::vector<double> y = b;
        // U^T z = b (forward), then L^T w = z (backward), then undo pivoting
        for (long i = 0; i < n; ++i) {
            double s = y[static_cast<std::size_t>(i)];
            for (long j = 0; j < i; ++j) s -= lu_(j, i) * y[static_cast<std::size_t>(j)];
            y[static_cast<std::size_t>(i)] = s / lu_(i, i);
        }
        for (long i = n - 1; i >= 0; --i) {
            double s = y[static_cast<std::size_t>(i)];
            for (long j = i + 1; j < n; ++j) s -= lu_(j, i) * y[static_cast<std::size_t>(j)];
            y[static_cast<std::size_t>(i)] = s;
        }
        std::vector<double> x(static_cast<std::size_t>(n));
        for (long i = 0; i < n; ++i) x[static_cast<std::size_t>(piv_[static_cast<std::size_t>(i)])] = y[static_cast<std::size_t>(i)];
        return x;
    }

    /// Hager-style estimate of ||A^{-1}||_1 via a few solve pairs.
    double estimate_inverse_norm1(int max_iter = 5) const {
        const long n = size();
        std::vector<double> x(static_cast<std::size_t>(n), 1.0 / static_cast<double>(n));
        double est = 0.0;
        long last_j = -1;
        for (int it = 0; it < max_iter; ++it) {
            const auto y = solve(x);
            double e = 0.0;
            for (double v : y) e += std::abs(v);
            est = std::max(est, e);
            std::vector<double> xi(static_cast<std::size_t>(n));
            for (long i = 0; i < n; ++i) xi[static_cast<std::size_t>(i)] = (y[static_cast<std::size_t>(i)] >= 0.0) ? 1.0 : -1.0;
            const auto z = solve_transposed(xi);
            long jmax = 0;
            double zmax = 0.0, zx = 0.0;
            for (long i = 0; i < n; ++i) {
                zx += z[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
                if (std::abs(z[static_cast<std::size_t>(i)]) > zmax) { zmax = std::abs(z[static_cast<std::size_t>(i)]); jmax = i; }
            }
            if (zmax <= zx || jmax == last_j) break;
            std::fill(x.begin(), x.end(), 0.0);
            x[static_cast<std::size_t>(jmax)] = 1.0;
            last_j = jmax;
        }
        return est;
    }

private:
    Matrix lu_;
    std::vector<long> piv_;
};

inline double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

namespace detail {

/// In-place Gaussian elimination with partial pivoting for d x d systems
/// (d <= 3). Returns the determinant; solves for nrhs right-hand sides laid
/// out as columns of b (row-major d x nrhs).
inline double solve_small(int d, double* A, double* b, int nrhs) {
    int perm[3] = {0, 1, 2};
    double det = 1.0;
    for (int k = 0; k < d; ++k) {
        int imax = k;
        double vmax = std::abs(A[perm[k] * 3 + k]);
        for (int i = k + 1; i < d; ++i) {
            const double v = std::abs(A[perm[i] * 3 + k]);
            if (v > vmax) { vmax = v; imax = i; }
        }
        if (imax != k) {
            std::swap(perm[k], perm[imax]);
            det = -det;
        }
        const double pivot = A[perm[k] * 3 + k];
        det *= pivot;
        if (pivot == 0.0) return 0.0;
        for (int i = k + 1; i < d; ++i) {
            const double l = A[perm[i] * 3 + k] / pivot;
            A[perm[i] * 3 + k] = l;
            for (int j = k + 1; j < d; ++j) A[perm[i] * 3 + j] -= l * A[perm[k] * 3 + j];
            for (int r = 0; r < nrhs; ++r) b[perm[i] * nrhs + r] -= l * b[perm[k] * nrhs + r];
        }
    }
    // back substitution into pivot order, then unscramble
    double xtmp[9];
    for (int i = d - 1; i >= 0; --i) {
        for (int r = 0; r < nrhs; ++r) {
            double s = b[perm[i] * nrhs + r];
            for (int j = i + 1; j < d; ++j) s -= A[perm[i] * 3 + j] * xtmp[j * nrhs + r];
            xtmp[i * nrhs + r] = s / A[perm[i] * 3 + i];
        }
    }
    for (int i = 0; i < d; ++i)
        for (int r = 0; r < nrhs; ++r) b[i * nrhs + r] = xtmp[i * nrhs + r];
    return det;
}

}  // namespace detail

}  // namespace igc
