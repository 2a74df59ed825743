#ifndef SMP_LINALG_HPP
#define SMP_LINALG_HPP

#include <cstddef>
#include <string>
#include <vector>

namespace smp::linalg {

using Vec = std::vector<double>;

// Dense row-major matrix. Small and self-contained; everything here operates
// on sizes where an explicit covariance is cheap.
struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), a(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

    static Mat identity(std::size_t n) {
        Mat m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
};

struct EighResult {
    Vec eigenvalues;   // sorted non-increasing
    Mat eigenvectors;  // column j pairs with eigenvalues[j]
    bool converged = true;
    int sweeps = 0;
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Eigenpairs come back sorted by eigenvalue descending. Each eigenvector is
/// signed so its largest-magnitude entry (first on ties) is positive, which
/// makes serialized models reproducible.
///
/// tol < 0 selects the default of 1e-12 * ||A||_F. If the off-diagonal mass
/// is still above tol after max_sweeps, `converged` is false.
EighResult jacobi_eigh(const Mat& A, double tol = -1.0, int max_sweeps = 50);

struct PCAModel {
    Vec mean;           // length d
    Mat components;     // c x d, rows are principal directions
    Vec eigenvalues;    // length c, non-increasing, clamped at 0
    Vec explained_ratio;  // length c, eigenvalue_i / sum of all d eigenvalues

    std::size_t input_dim() const { return mean.size(); }
    std::size_t component_count() const { return components.rows; }
};

/// Fit PCA on an n x d sample matrix (n >= 2). Covariance uses the n-1
/// denominator. The returned model keeps all d components.
PCAModel fit_pca(const Mat& X);

/// Project rows of X onto the first c components: (x - mean) . components^T.
Mat transform_pca(const PCAModel& model, const Mat& X, std::size_t c);

/// Keep only the first c components of a fitted model (for serialization).
PCAModel truncate_pca(const PCAModel& model, std::size_t c);

}  // namespace smp::linalg

#endif
