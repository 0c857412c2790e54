#pragma once

// Linear algebra kernels: symmetric sparse storage, sparse Cholesky, Jacobi
// preconditioned CG and the dense generalized symmetric eigensolver.
//
// Sparse storage and the Cholesky factorization are Eigen's; the generalized
// eigenproblem goes through LAPACK's dsygvd (Cholesky reduction of the pencil
// followed by divide-and-conquer on the standard problem).

#include "fracmeasure/errors.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace fracmeasure {

using Vector = Eigen::VectorXd;
/// Column-major dense storage; used for eigenvector blocks.
using DenseMatrix = Eigen::MatrixXd;
using Triplet = Eigen::Triplet<double>;

/// Symmetric sparse matrix stored with both triangles (mirror-consistent).
///
/// Matrix-vector products are sequential and accumulate every output entry in
/// ascending column order, so results do not depend on the thread count.
class SparseSymMatrix {
public:
    using Storage = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

    SparseSymMatrix() = default;

    /// Builds from (row, col, value) triplets; duplicates are summed. Both
    /// triangles must be supplied.
    SparseSymMatrix(std::size_t dimension, const std::vector<Triplet>& entries)
        : storage_(static_cast<Eigen::Index>(dimension), static_cast<Eigen::Index>(dimension)) {
        storage_.setFromTriplets(entries.begin(), entries.end());
        storage_.makeCompressed();
        validate();
    }

    explicit SparseSymMatrix(Storage storage) : storage_(std::move(storage)) {
        storage_.makeCompressed();
        validate();
    }

    std::size_t dimension() const { return static_cast<std::size_t>(storage_.rows()); }
    const Storage& storage() const { return storage_; }

    double coeff(std::size_t i, std::size_t j) const {
        return storage_.coeff(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }

    Vector multiply(const Vector& x) const {
        if (static_cast<std::size_t>(x.size()) != dimension()) {
            throw DimensionMismatch("matvec: vector length " + std::to_string(x.size()) +
                                    " vs dimension " + std::to_string(dimension()));
        }
        // Column j of a symmetric matrix is row j.
        Vector y(x.size());
        for (Eigen::Index j = 0; j < storage_.outerSize(); ++j) {
            double acc = 0.0;
            for (Storage::InnerIterator it(storage_, j); it; ++it) {
                acc += it.value() * x[it.row()];
            }
            y[j] = acc;
        }
        return y;
    }

    Vector diagonal() const { return storage_.diagonal(); }

    /// Largest absolute row sum (the infinity norm).
    double max_row_sum() const {
        double best = 0.0;
        for (Eigen::Index j = 0; j < storage_.outerSize(); ++j) {
            double acc = 0.0;
            for (Storage::InnerIterator it(storage_, j); it; ++it) acc += std::abs(it.value());
            best = std::max(best, acc);
        }
        return best;
    }

    DenseMatrix to_dense() const { return DenseMatrix(storage_); }

    /// alpha * A + beta * B for matrices of equal dimension.
    static SparseSymMatrix combine(double alpha, const SparseSymMatrix& a, double beta,
                                   const SparseSymMatrix& b) {
        if (a.dimension() != b.dimension()) throw DimensionMismatch("combine: dimensions differ");
        Storage sum = alpha * a.storage_ + beta * b.storage_;
        return SparseSymMatrix(std::move(sum));
    }

private:
    void validate() const {
        if (storage_.rows() == 0 || storage_.rows() != storage_.cols()) {
            throw DimensionMismatch("sparse symmetric matrix must be square with dimension > 0");
        }
        const double scale = std::max(1.0, max_abs());
        for (Eigen::Index j = 0; j < storage_.outerSize(); ++j) {
            bool any = false;
            for (Storage::InnerIterator it(storage_, j); it; ++it) {
                if (it.value() != 0.0) any = true;
                const double mirror = storage_.coeff(j, it.row());
                if (std::abs(mirror - it.value()) > 1e-12 * scale) {
                    throw DomainError("sparse matrix is not symmetric at (" + std::to_string(it.row()) +
                                      ", " + std::to_string(j) + ")");
                }
            }
            if (!any) throw DomainError("sparse matrix has an all-zero row " + std::to_string(j));
        }
    }

    double max_abs() const {
        double m = 0.0;
        for (Eigen::Index k = 0; k < storage_.nonZeros(); ++k) m = std::max(m, std::abs(storage_.valuePtr()[k]));
        return m;
    }

    Storage storage_;
};

/// Sparse L·Lᵀ factorization without fill-reducing permutation, so that L·Lᵀ = A holds literally.
class CholeskyFactor {
public:
    explicit CholeskyFactor(const SparseSymMatrix& a) : dimension_(a.dimension()) {
        solver_.compute(a.storage());
        if (solver_.info() != Eigen::Success) {
            throw NotPositiveDefinite("cholesky: non-positive pivot encountered");
        }
    }

    std::size_t dimension() const { return dimension_; }

    SparseSymMatrix::Storage lower() const { return solver_.matrixL(); }

    Vector solve(const Vector& b) const {
        if (static_cast<std::size_t>(b.size()) != dimension_) throw DimensionMismatch("cholesky solve");
        return solver_.solve(b);
    }

private:
    std::size_t dimension_;
    Eigen::SimplicialLLT<SparseSymMatrix::Storage, Eigen::Lower, Eigen::NaturalOrdering<int>> solver_;
};

inline CholeskyFactor cholesky_factor(const SparseSymMatrix& a) { return CholeskyFactor(a); }

struct CgResult {
    Vector x;
    std::size_t iterations = 0;
    /// ‖b − A x‖₂ / ‖b‖₂, recomputed from scratch at exit (0 for b = 0).
    double relative_residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients from a zero initial guess.
///
/// Returns once the recomputed residual satisfies ‖A x − b‖₂ ≤ tol·‖b‖₂;
/// the recursive residual only triggers the check.
inline CgResult conjugate_gradient(const SparseSymMatrix& a, const Vector& b, double tol,
                                   std::size_t max_iterations) {
    const auto n = static_cast<Eigen::Index>(a.dimension());
    if (b.size() != n) throw DimensionMismatch("conjugate_gradient: right-hand side length");
    if (!(tol > 0.0)) throw DomainError("conjugate_gradient: tolerance must be positive");

    CgResult result;
    result.x = Vector::Zero(n);
    const double b_norm = b.norm();
    if (b_norm == 0.0) return result;

    const Vector inv_diag = a.diagonal().cwiseInverse();
    Vector r = b;
    Vector z = inv_diag.cwiseProduct(r);
    Vector p = z;
    double rz = r.dot(z);
    const double target = tol * b_norm;

    for (std::size_t it = 1; it <= max_iterations; ++it) {
        const Vector ap = a.multiply(p);
        const double alpha = rz / p.dot(ap);
        result.x += alpha * p;
        r -= alpha * ap;
        result.iterations = it;

        if (r.norm() <= target) {
            r = b - a.multiply(result.x);
            const double true_norm = r.norm();
            if (true_norm <= target) {
                result.relative_residual = true_norm / b_norm;
                return result;
            }
            // Recursive residual drifted; restart the Krylov space from the true residual.
            z = inv_diag.cwiseProduct(r);
            p = z;
            rz = r.dot(z);
            continue;
        }
        z = inv_diag.cwiseProduct(r);
        const double rz_next = r.dot(z);
        p = z + (rz_next / rz) * p;
        rz = rz_next;
    }
    const double final_residual = (b - a.multiply(result.x)).norm() / b_norm;
    throw NoConvergence("conjugate_gradient: no convergence in " + std::to_string(max_iterations) +
                            " iterations (relative residual " + std::to_string(final_residual) + ")",
                        max_iterations, final_residual);
}

/// All eigenpairs of K Φ = Λ M Φ.
struct GeneralizedEigenpairs {
    Vector values;       ///< ascending
    DenseMatrix vectors; ///< column n is Φ_n, normalized so that Φᵀ M Φ = I
};

/// Dense generalized symmetric-definite eigensolver (LAPACK dsygvd).
///
/// Each eigenvector's sign is fixed so that its largest-magnitude entry is positive.
inline GeneralizedEigenpairs sym_eigendecompose(const SparseSymMatrix& k, const SparseSymMatrix& m) {
    if (k.dimension() != m.dimension()) throw DimensionMismatch("sym_eigendecompose: K and M differ in size");
    const auto n = static_cast<lapack_int>(k.dimension());

    GeneralizedEigenpairs out;
    out.vectors = k.to_dense();
    DenseMatrix b = m.to_dense();
    out.values.resize(n);

    const lapack_int info = LAPACKE_dsygvd(LAPACK_COL_MAJOR, 1, 'V', 'L', n, out.vectors.data(), n, b.data(), n,
                                           out.values.data());
    if (info > n) throw NotPositiveDefinite("sym_eigendecompose: M is not positive definite");
    if (info > 0) throw ConvergenceFailure("sym_eigendecompose: eigensolver failed to converge");
    if (info < 0) throw DomainError("sym_eigendecompose: invalid LAPACK argument " + std::to_string(-info));
    if (out.values[0] <= 0.0) throw NotPositiveDefinite("sym_eigendecompose: K is not positive definite");

    for (Eigen::Index j = 0; j < n; ++j) {
        Eigen::Index imax = 0;
        out.vectors.col(j).cwiseAbs().maxCoeff(&imax);
        if (out.vectors(imax, j) < 0.0) out.vectors.col(j) *= -1.0;
    }
    return out;
}

} // namespace fracmeasure
