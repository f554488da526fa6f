#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "adaam/linalg.hpp"

namespace adaam {

/// One off-diagonal weight; stored once with i < j.
struct AffinityEntry {
  std::size_t i = 0;
  std::size_t j = 0;
  double weight = 0.0;

  friend bool operator==(const AffinityEntry&, const AffinityEntry&) = default;
};

/// Symmetric sparse matrix of signed pairwise weights. Each off-diagonal pair
/// is stored once, so the logical matrix is symmetric by construction.
class SparseAffinity {
 public:
  SparseAffinity() = default;
  explicit SparseAffinity(std::size_t n);

  /// Entries may come in any order with either orientation; they are
  /// canonicalized to i < j and sorted. Zero weights are dropped. Duplicate
  /// pairs or i == j entries throw InvalidParams.
  SparseAffinity(std::size_t n, std::vector<AffinityEntry> entries, Vector diagonal);

  std::size_t size() const noexcept { return n_; }
  std::span<const AffinityEntry> entries() const noexcept { return entries_; }
  const Vector& diagonal() const noexcept { return diagonal_; }

  /// Nonzero count over the full n x n grid (pairs count twice).
  std::size_t nonzeros() const noexcept;

  /// Row-wise sums including the diagonal; may be negative for signed weights.
  Vector row_sums() const;

  /// Returns (this) * y.
  DenseMatrix multiply(const DenseMatrix& y) const;

  DenseMatrix to_dense() const;

  /// Returns a copy with `extra` added to the diagonal.
  SparseAffinity plus_diagonal(const Vector& extra) const;

  friend bool operator==(const SparseAffinity& a, const SparseAffinity& b) {
    return a.n_ == b.n_ && a.entries_ == b.entries_ && a.diagonal_ == b.diagonal_;
  }

 private:
  std::size_t n_ = 0;
  std::vector<AffinityEntry> entries_;
  Vector diagonal_;
};

struct HeatKernelOptions {
  /// Kernel scale; std::nullopt selects the mean k-NN edge distance.
  std::optional<double> bandwidth;
  /// exp(-||xi - xj||^2 / t) instead of the unsquared norm.
  bool squared = false;
};

struct HeatKernelGraph {
  SparseAffinity affinity;
  double bandwidth = 0.0;
};

/// k-NN heat kernel: w_ij = exp(-||x_i - x_j|| / t) whenever either point is
/// among the other's k nearest neighbours (self excluded, distance ties go to
/// the lower index). Throws KTooLarge when k >= n or k == 0, DegenerateData when
/// the automatic bandwidth would be zero.
HeatKernelGraph knn_heat_kernel(const DenseMatrix& x, std::size_t k,
                                const HeatKernelOptions& options = {});

/// d_i = sum_j w_ij.
Vector degree(const SparseAffinity& affinity);

/// Y^T (D - W) Y without forming the Laplacian.
DenseMatrix laplacian_quadratic(const SparseAffinity& affinity, const DenseMatrix& y);

/// floor(n^2 / (alpha c))
std::size_t sparsify_budget(std::size_t n, std::size_t c, double alpha);

struct SparsifyOptions {
  double alpha = 2.5;
  /// Diagonal entries compete for the budget; when false they are dropped.
  bool include_diagonal = true;
};

struct SparsifyResult {
  SparseAffinity affinity;
  std::size_t budget = 0;
  /// Elements retained over the n x n grid (pairs count twice).
  std::size_t kept = 0;
  /// budget < n: the graph is likely to fall apart.
  bool budget_too_small = false;
};

/// Keeps the `sparsify_budget(n, c, alpha)` largest-magnitude elements of the
/// full matrix. Candidates are ranked by magnitude descending, then by
/// (min(i,j), max(i,j)) ascending, and taken while the cumulative grid count
/// fits in the budget; a pair whose two halves straddle the budget is dropped
/// together with everything after it.
SparsifyResult sparsify_top_t(const SparseAffinity& affinity, std::size_t c,
                              const SparsifyOptions& options);

/// Same selection applied to the implicit dense matrix factor * factor^T,
/// streamed without materializing it.
SparsifyResult sparsify_low_rank(const DenseMatrix& factor, std::size_t c,
                                 const SparsifyOptions& options);

}  // namespace adaam
