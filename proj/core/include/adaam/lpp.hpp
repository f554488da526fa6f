#pragma once

#include <cstddef>

#include "adaam/graph.hpp"
#include "adaam/linalg.hpp"

namespace adaam {

/// Linear map stored d x m: instances (rows) embed as x * map.
struct Projection {
  DenseMatrix map;
  /// Ascending eigenvalues of the problem that produced the columns.
  Vector eigenvalues;
  /// Ridge added to the constraint matrix, if any.
  double regularization = 0.0;
  /// Shift applied to the constraint degrees when signed weights made the
  /// constraint indefinite (0 when not needed).
  double degree_shift = 0.0;
};

/// Locality Preserving Projections on an arbitrary signed affinity.
///
/// Solves X^T L' X a = lambda X^T D' X a for the m smallest lambda, where
/// D' = degree(affinity) and L' = D' - affinity. `centered` must have zero
/// column means. The problem is posed on the row space of X (directions with
/// X a = 0 carry no information and would make both sides vanish), so the
/// returned columns are exact eigenvectors of the original pencil.
///
/// Throws ShapeMismatch, or RankDeficient when m exceeds the numerical rank of
/// X. If the constraint is indefinite, D' is shifted by |min d'_i| + eps and the
/// shift is reported in `degree_shift`.
Projection lpp(const DenseMatrix& centered, const SparseAffinity& affinity, std::size_t m);

/// M = A A^T for a d x m map, i.e. the metric whose Mahalanobis distance
/// equals the squared Euclidean distance after projection.
DenseMatrix metric_of(const DenseMatrix& map);

/// (x - y)^T M (x - y)
double mahalanobis(const DenseMatrix& metric, const Vector& x, const Vector& y);

}  // namespace adaam
