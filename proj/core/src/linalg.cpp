#include "adaam/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "adaam/error.hpp"

namespace adaam {
namespace {

constexpr double kSymmetryTolerance = 1e-12;
constexpr double kPsdTolerance = 1e-8;
constexpr double kSingularTolerance = 1e-10;
constexpr double kRidgeScale = 1e-8;

void require_square_symmetric(const DenseMatrix& s, const char* what) {
  if (s.rows() != s.cols()) {
    throw Error(ErrorCode::ShapeMismatch, std::string(what) + " must be square");
  }
  require_finite(s, what);
  const double scale = s.size() == 0 ? 0.0 : s.cwiseAbs().maxCoeff();
  const double asym = s.size() == 0 ? 0.0 : (s - s.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryTolerance * scale) {
    throw Error(ErrorCode::NonSymmetric,
                std::string(what) + " asymmetry " + std::to_string(asym));
  }
}

// Two passes of modified Gram-Schmidt against the first `upto` columns.
void project_out(DenseMatrix& q, Eigen::Index column, Eigen::Index upto) {
  for (int pass = 0; pass < 2; ++pass) {
    for (Eigen::Index p = 0; p < upto; ++p) {
      q.col(column) -= q.col(p).dot(q.col(column)) * q.col(p);
    }
  }
}

// Orthonormalizes the columns of q in place. Columns that are zero or collapse
// under projection are replaced by the first standard basis vector that
// survives, so the result always has orthonormal columns.
void orthonormalize_columns(DenseMatrix& q) {
  Eigen::Index next_basis = 0;
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    const double original = q.col(j).norm();
    project_out(q, j, j);
    double norm = q.col(j).norm();
    if (original > 0.0 && norm > 1e-8 * original) {
      q.col(j) /= norm;
      continue;
    }
    for (;;) {
      if (next_basis >= q.rows()) {
        throw Error(ErrorCode::RankRequestTooLarge, "cannot complete orthonormal basis");
      }
      q.col(j).setZero();
      q(next_basis++, j) = 1.0;
      project_out(q, j, j);
      norm = q.col(j).norm();
      if (norm > 1e-3) break;
    }
    q.col(j) /= norm;
  }
}

}  // namespace

void require_finite(const DenseMatrix& m, const char* what) {
  if (!m.allFinite()) {
    throw Error(ErrorCode::NonFinite, std::string(what) + " contains NaN or Inf");
  }
}

DenseMatrix symmetrized(const DenseMatrix& m) {
  return 0.5 * (m + m.transpose());
}

Vector apply_sign_convention(DenseMatrix& columns) {
  Vector signs = Vector::Ones(columns.cols());
  for (Eigen::Index j = 0; j < columns.cols(); ++j) {
    Eigen::Index best = 0;
    double best_mag = -1.0;
    for (Eigen::Index i = 0; i < columns.rows(); ++i) {
      const double mag = std::abs(columns(i, j));
      if (mag > best_mag) {
        best_mag = mag;
        best = i;
      }
    }
    if (columns.rows() > 0 && columns(best, j) < 0.0) {
      columns.col(j) *= -1.0;
      signs[j] = -1.0;
    }
  }
  return signs;
}

std::size_t numerical_rank(const Vector& singular, double cutoff) {
  if (singular.size() == 0) return 0;
  const double top = singular.cwiseAbs().maxCoeff();
  if (top == 0.0) return 0;
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < singular.size(); ++i) {
    if (std::abs(singular[i]) > cutoff * top) ++rank;
  }
  return rank;
}

EigenPairs symmetric_eig(const DenseMatrix& s) {
  require_square_symmetric(s, "symmetric_eig input");
  EigenPairs out;
  if (s.rows() == 0) {
    out.values.resize(0);
    out.vectors.resize(0, 0);
    return out;
  }
  // Work on the exactly symmetric part so the solver's choice of triangle
  // does not matter.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(Eigen::MatrixXd(symmetrized(s)));
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::NonFinite, "symmetric eigensolver did not converge");
  }
  out.values = solver.eigenvalues();
  out.vectors = solver.eigenvectors();
  apply_sign_convention(out.vectors);
  return out;
}

GeneralizedEigenPairs generalized_symmetric_eig(const DenseMatrix& s, const DenseMatrix& b) {
  if (s.rows() != b.rows() || s.cols() != b.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "pencil matrices differ in shape");
  }
  require_square_symmetric(s, "pencil operator");
  require_square_symmetric(b, "pencil constraint");

  GeneralizedEigenPairs out;
  const Eigen::Index dim = s.rows();
  if (dim == 0) {
    out.values.resize(0);
    out.vectors.resize(0, 0);
    return out;
  }

  Eigen::MatrixXd constraint = symmetrized(b);
  const double trace = constraint.trace();
  const double scale = trace > 0.0 ? trace / static_cast<double>(dim) : 1.0;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> b_spectrum(constraint, Eigen::EigenvaluesOnly);
  const double smallest = b_spectrum.eigenvalues()[0];
  if (smallest < -kPsdTolerance * scale) {
    throw Error(ErrorCode::NotPsd,
                "constraint eigenvalue " + std::to_string(smallest) + " is negative");
  }
  if (smallest < kSingularTolerance * scale) {
    out.regularization = kRidgeScale * scale;
    constraint.diagonal().array() += out.regularization;
  }

  Eigen::LLT<Eigen::MatrixXd> chol(constraint);
  if (chol.info() != Eigen::Success) {
    throw Error(ErrorCode::NotPsd, "Cholesky factorization of constraint failed");
  }
  const auto lower = chol.matrixL();
  // C = L^-1 S L^-T
  Eigen::MatrixXd reduced = lower.solve(Eigen::MatrixXd(symmetrized(s)));
  reduced = lower.solve(Eigen::MatrixXd(reduced.transpose()));
  reduced = 0.5 * (reduced + reduced.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(reduced);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::NonFinite, "reduced eigensolver did not converge");
  }
  out.values = solver.eigenvalues();
  out.vectors = chol.matrixU().solve(solver.eigenvectors());
  apply_sign_convention(out.vectors);
  return out;
}

ThinSvd thin_svd(const DenseMatrix& x, std::size_t rank) {
  require_finite(x, "thin_svd input");
  const auto rows = static_cast<std::size_t>(x.rows());
  const auto cols = static_cast<std::size_t>(x.cols());
  if (rank > std::min(rows, cols)) {
    throw Error(ErrorCode::RankRequestTooLarge,
                "rank " + std::to_string(rank) + " exceeds min(rows, cols)");
  }
  const auto r = static_cast<Eigen::Index>(rank);
  ThinSvd out;
  out.singular.resize(r);
  if (r == 0) {
    out.left.resize(x.rows(), 0);
    out.right.resize(x.cols(), 0);
    return out;
  }

  const bool use_cols_gram = cols <= rows;
  const DenseMatrix gram = use_cols_gram ? DenseMatrix(x.transpose() * x)
                                         : DenseMatrix(x * x.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(Eigen::MatrixXd(symmetrized(gram)));
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::NonFinite, "Gram eigensolver did not converge");
  }
  const Eigen::Index g = gram.rows();
  // Descending order: take the trailing columns in reverse.
  DenseMatrix basis(g, r);
  for (Eigen::Index k = 0; k < r; ++k) basis.col(k) = solver.eigenvectors().col(g - 1 - k);
  if (!use_cols_gram) orthonormalize_columns(basis);

  // Gram eigenvalues resolve small singular values only to sqrt(eps) * top;
  // column norms of the product are accurate to eps * top.
  DenseMatrix product = use_cols_gram ? DenseMatrix(x * basis) : DenseMatrix(x.transpose() * basis);
  Vector norms = product.colwise().norm().transpose();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(r));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return norms[a] > norms[b]; });
  DenseMatrix sorted_basis(g, r), sorted_product(product.rows(), r);
  for (Eigen::Index k = 0; k < r; ++k) {
    const Eigen::Index from = order[static_cast<std::size_t>(k)];
    sorted_basis.col(k) = basis.col(from);
    sorted_product.col(k) = product.col(from);
    out.singular[k] = norms[from];
  }

  const double cutoff = kRankCutoff * out.singular[0];
  for (Eigen::Index k = 0; k < r; ++k) {
    if (out.singular[k] > cutoff && out.singular[k] > 0.0) {
      sorted_product.col(k) /= out.singular[k];
    } else {
      sorted_product.col(k).setZero();
    }
  }
  orthonormalize_columns(sorted_product);

  if (use_cols_gram) {
    out.right = std::move(sorted_basis);
    out.left = std::move(sorted_product);
  } else {
    out.left = std::move(sorted_basis);
    out.right = std::move(sorted_product);
  }

  const Vector signs = apply_sign_convention(out.left);
  for (Eigen::Index k = 0; k < r; ++k) out.right.col(k) *= signs[k];
  return out;
}

}  // namespace adaam
