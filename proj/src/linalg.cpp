#include "smp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace smp::linalg {

namespace {

double off_diagonal_frobenius(const Mat& A) {
    double s = 0.0;
    for (std::size_t i = 0; i < A.rows; ++i)
        for (std::size_t j = 0; j < A.cols; ++j)
            if (i != j) s += A(i, j) * A(i, j);
    return std::sqrt(s);
}

double frobenius(const Mat& A) {
    double s = 0.0;
    for (double v : A.a) s += v * v;
    return std::sqrt(s);
}

void check_symmetric_finite(const Mat& A) {
    if (A.rows != A.cols || A.rows == 0)
        throw std::invalid_argument("jacobi_eigh: matrix must be square and non-empty");
    for (double v : A.a)
        if (!std::isfinite(v)) throw std::invalid_argument("jacobi_eigh: non-finite entry");
    for (std::size_t i = 0; i < A.rows; ++i)
        for (std::size_t j = i + 1; j < A.cols; ++j)
            if (std::fabs(A(i, j) - A(j, i)) > 1e-10)
                throw std::invalid_argument("jacobi_eigh: matrix not symmetric within 1e-10");
}

// Largest-magnitude entry positive; on magnitude ties the first such entry wins.
void fix_column_sign(Mat& V, std::size_t j) {
    std::size_t best = 0;
    double best_mag = -1.0;
    for (std::size_t i = 0; i < V.rows; ++i) {
        const double mag = std::fabs(V(i, j));
        if (mag > best_mag) {
            best_mag = mag;
            best = i;
        }
    }
    if (V(best, j) < 0.0)
        for (std::size_t i = 0; i < V.rows; ++i) V(i, j) = -V(i, j);
}

}  // namespace

EighResult jacobi_eigh(const Mat& A, double tol, int max_sweeps) {
    check_symmetric_finite(A);
    const std::size_t n = A.rows;

    if (tol < 0.0) tol = 1e-12 * frobenius(A);

    Mat M = A;
    Mat V = Mat::identity(n);

    EighResult out;
    out.converged = (off_diagonal_frobenius(M) <= tol);

    for (int sweep = 0; sweep < max_sweeps && !out.converged; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = M(p, q);
                if (apq == 0.0) continue;
                const double app = M(p, p);
                const double aqq = M(q, q);

                const double theta = (aqq - app) / (2.0 * apq);
                double t = 1.0 / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                if (theta < 0.0) t = -t;
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                // rotate rows/columns p and q of M
                for (std::size_t k = 0; k < n; ++k) {
                    const double mkp = M(k, p);
                    const double mkq = M(k, q);
                    M(k, p) = c * mkp - s * mkq;
                    M(k, q) = s * mkp + c * mkq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double mpk = M(p, k);
                    const double mqk = M(q, k);
                    M(p, k) = c * mpk - s * mqk;
                    M(q, k) = s * mpk + c * mqk;
                }
                // accumulate the rotation into V
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = V(k, p);
                    const double vkq = V(k, q);
                    V(k, p) = c * vkp - s * vkq;
                    V(k, q) = s * vkp + c * vkq;
                }
            }
        }
        out.sweeps = sweep + 1;
        out.converged = (off_diagonal_frobenius(M) <= tol);
    }

    // stable order: equal eigenvalues keep their axis order, so the identity
    // matrix decomposes to itself
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return M(i, i) > M(j, j); });

    out.eigenvalues.resize(n);
    out.eigenvectors = Mat(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        out.eigenvalues[j] = M(order[j], order[j]);
        for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, j) = V(i, order[j]);
        fix_column_sign(out.eigenvectors, j);
    }
    return out;
}

PCAModel fit_pca(const Mat& X) {
    if (X.rows < 2) throw std::invalid_argument("fit_pca: need at least 2 rows");
    for (double v : X.a)
        if (!std::isfinite(v)) throw std::invalid_argument("fit_pca: non-finite entry");

    const std::size_t n = X.rows;
    const std::size_t d = X.cols;

    PCAModel model;
    model.mean.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) model.mean[j] += X(i, j);
    for (std::size_t j = 0; j < d; ++j) model.mean[j] /= static_cast<double>(n);

    Mat cov(d, d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            const double xj = X(i, j) - model.mean[j];
            // upper triangle only, mirrored below so it is exactly symmetric
            for (std::size_t k = j; k < d; ++k) cov(j, k) += xj * (X(i, k) - model.mean[k]);
        }
    }
    const double denom = static_cast<double>(n - 1);
    for (std::size_t j = 0; j < d; ++j)
        for (std::size_t k = j; k < d; ++k) {
            cov(j, k) /= denom;
            cov(k, j) = cov(j, k);
        }

    EighResult eig = jacobi_eigh(cov);

    model.eigenvalues.resize(d);
    for (std::size_t j = 0; j < d; ++j) model.eigenvalues[j] = std::max(0.0, eig.eigenvalues[j]);

    // components as rows: row j = eigenvector column j
    model.components = Mat(d, d);
    for (std::size_t j = 0; j < d; ++j)
        for (std::size_t i = 0; i < d; ++i) model.components(j, i) = eig.eigenvectors(i, j);

    const double total = std::accumulate(model.eigenvalues.begin(), model.eigenvalues.end(), 0.0);
    model.explained_ratio.assign(d, 0.0);
    if (total > 0.0)
        for (std::size_t j = 0; j < d; ++j) model.explained_ratio[j] = model.eigenvalues[j] / total;

    return model;
}

Mat transform_pca(const PCAModel& model, const Mat& X, std::size_t c) {
    if (c > model.component_count())
        throw std::invalid_argument("transform_pca: more components requested than stored");
    if (X.cols != model.input_dim())
        throw std::invalid_argument("transform_pca: column count does not match fitted dimension");

    const std::size_t d = model.input_dim();
    Mat out(X.rows, c);
    for (std::size_t i = 0; i < X.rows; ++i) {
        for (std::size_t j = 0; j < c; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < d; ++k)
                s += (X(i, k) - model.mean[k]) * model.components(j, k);
            out(i, j) = s;
        }
    }
    return out;
}

PCAModel truncate_pca(const PCAModel& model, std::size_t c) {
    if (c > model.component_count())
        throw std::invalid_argument("truncate_pca: more components requested than stored");
    PCAModel out;
    out.mean = model.mean;
    out.components = Mat(c, model.input_dim());
    for (std::size_t j = 0; j < c; ++j)
        for (std::size_t k = 0; k < model.input_dim(); ++k)
            out.components(j, k) = model.components(j, k);
    out.eigenvalues.assign(model.eigenvalues.begin(), model.eigenvalues.begin() + c);
    out.explained_ratio.assign(model.explained_ratio.begin(), model.explained_ratio.begin() + c);
    return out;
}

}  // namespace smp::linalg
