#pragma once

#include <cstddef>

#include <Eigen/Core>

namespace adaam {

/// Dense real matrix, row-major to match the instance-per-row data layout.
using DenseMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Eigenvalues ascending with matching eigenvector columns.
struct EigenPairs {
  Vector values;
  DenseMatrix vectors;
};

/// Pencil solution. `regularization` is the ridge added to B's diagonal
/// (0 when B was already well conditioned).
struct GeneralizedEigenPairs {
  Vector values;
  DenseMatrix vectors;
  double regularization = 0.0;
};

/// Top singular triplets, singular values descending.
struct ThinSvd {
  DenseMatrix left;
  Vector singular;
  DenseMatrix right;
};

/// Relative threshold below which a singular value counts as zero.
inline constexpr double kRankCutoff = 1e-10;

/// Full spectrum of a symmetric matrix.
///
/// Throws NonSymmetric when max|S - S^T| exceeds 1e-12 of max|S|, NonFinite on
/// NaN/Inf, ShapeMismatch for non-square input.
EigenPairs symmetric_eig(const DenseMatrix& s);

/// Solves S v = lambda B v for symmetric S and positive-semidefinite B, with
/// v^T B v = 1. A singular B (smallest eigenvalue below 1e-10 trace(B)/dim) is
/// replaced by B + eps I, eps = 1e-8 trace(B)/dim.
///
/// Throws NotPsd when B has an eigenvalue below -1e-8 trace(B)/dim.
GeneralizedEigenPairs generalized_symmetric_eig(const DenseMatrix& s, const DenseMatrix& b);

/// Top-`rank` singular triplets of x, computed through the smaller Gram
/// matrix (x^T x when cols <= rows, x x^T otherwise). Left columns beyond the
/// numerical rank are completed to an orthonormal set.
ThinSvd thin_svd(const DenseMatrix& x, std::size_t rank);

/// Number of singular values above cutoff * max(singular).
std::size_t numerical_rank(const Vector& singular, double cutoff = kRankCutoff);

/// Flips each column so its largest-magnitude entry is positive; exact ties
/// resolve to the lowest row index. Returns the applied signs.
Vector apply_sign_convention(DenseMatrix& columns);

void require_finite(const DenseMatrix& m, const char* what);

/// (m + m^T) / 2
DenseMatrix symmetrized(const DenseMatrix& m);

}  // namespace adaam
