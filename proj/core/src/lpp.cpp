#include "adaam/lpp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "adaam/error.hpp"

namespace adaam {

Projection lpp(const DenseMatrix& centered, const SparseAffinity& affinity, std::size_t m) {
  require_finite(centered, "LPP input");
  const auto n = static_cast<std::size_t>(centered.rows());
  const auto d = static_cast<std::size_t>(centered.cols());
  if (affinity.size() != n) {
    throw Error(ErrorCode::ShapeMismatch, "affinity size differs from instance count");
  }
  if (m == 0 || m > d) {
    throw Error(ErrorCode::ShapeMismatch, "projection dimension must lie in [1, d]");
  }

  const ThinSvd svd = thin_svd(centered, std::min(n, d));
  const std::size_t rank = numerical_rank(svd.singular);
  if (m > rank) {
    throw Error(ErrorCode::RankDeficient, "projection dimension " + std::to_string(m) +
                                              " exceeds data rank " + std::to_string(rank));
  }
  const DenseMatrix basis = svd.right.leftCols(static_cast<Eigen::Index>(rank));
  const DenseMatrix reduced = centered * basis;

  const DenseMatrix operator_matrix = laplacian_quadratic(affinity, reduced);
  const Vector degrees = degree(affinity);
  auto constraint_for = [&](double shift) {
    const Vector weights = degrees.array() + shift;
    return symmetrized(reduced.transpose() * weights.asDiagonal() * reduced);
  };

  Projection out;
  GeneralizedEigenPairs pairs;
  try {
    pairs = generalized_symmetric_eig(operator_matrix, constraint_for(0.0));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotPsd) throw;
    const double magnitude = degrees.size() ? degrees.cwiseAbs().maxCoeff() : 0.0;
    out.degree_shift = std::abs(degrees.minCoeff()) + 1e-8 * std::max(magnitude, 1.0);
    pairs = generalized_symmetric_eig(operator_matrix, constraint_for(out.degree_shift));
  }

  const auto cols = static_cast<Eigen::Index>(m);
  out.map = basis * pairs.vectors.leftCols(cols);
  out.eigenvalues = pairs.values.head(cols);
  out.regularization = pairs.regularization;
  apply_sign_convention(out.map);
  return out;
}

DenseMatrix metric_of(const DenseMatrix& map) { return map * map.transpose(); }

double mahalanobis(const DenseMatrix& metric, const Vector& x, const Vector& y) {
  if (metric.rows() != x.size() || metric.cols() != y.size() || x.size() != y.size()) {
    throw Error(ErrorCode::ShapeMismatch, "metric and vectors differ in dimension");
  }
  const Vector diff = x - y;
  return diff.dot(metric * diff);
}

}  // namespace adaam
