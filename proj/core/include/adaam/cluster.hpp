#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "adaam/linalg.hpp"

namespace adaam {

struct KMeansOptions {
  std::size_t max_iterations = 300;
  /// Stop once the relative wcss decrease falls below this.
  double tolerance = 1e-7;
};

struct ClusterAssignment {
  std::vector<std::size_t> labels;
  DenseMatrix centroids;
  /// Sum of squared distances to the assigned centroids.
  double wcss = 0.0;
  std::size_t iterations_used = 0;
  std::uint64_t seed = 0;
  /// wcss after each Lloyd iteration; non-increasing.
  std::vector<double> wcss_trace;
};

/// Lloyd's algorithm from a seeded k-means++ start. Empty clusters are
/// re-seeded with the point farthest from its centroid. Throws
/// ClusterCountTooLarge when c > n and InvalidParams when c == 0.
ClusterAssignment kmeans(const DenseMatrix& y, std::size_t c, std::uint64_t seed,
                         const KMeansOptions& options = {});

inline constexpr std::size_t kRunsPerRound = 10;

struct RoundResult {
  ClusterAssignment best;
  std::size_t best_run = 0;
  /// wcss of each of the kRunsPerRound runs, in sub-seed order.
  std::vector<double> run_wcss;
};

/// kRunsPerRound k-means runs with seeds round_seed * 10 + {0..9}; keeps the
/// one with minimal wcss (ties go to the lowest sub-seed).
RoundResult kmeans_round(const DenseMatrix& y, std::size_t c, std::uint64_t round_seed,
                         const KMeansOptions& options = {});

/// Minimum-cost perfect assignment on a square cost matrix (Hungarian
/// algorithm). Returns the column assigned to each row.
std::vector<std::size_t> solve_assignment(const DenseMatrix& cost);

/// Fraction of instances matched under the best one-to-one map from cluster
/// ids to class ids. The contingency table is padded square when the counts
/// differ. Throws LengthMismatch.
double accuracy(std::span<const std::size_t> assigned, std::span<const std::size_t> truth);

struct ClusterReport {
  std::vector<double> accuracies;
  double average = 0.0;
  double maximum = 0.0;
  double wall_ms = 0.0;
  std::vector<double> round_wcss;
  /// Lowest-wcss result over all rounds.
  ClusterAssignment best;
};

/// Seed of round r in `evaluate`.
std::uint64_t derive_round_seed(std::uint64_t seed, std::size_t round);

/// Runs `rounds` k-means rounds and scores each against `truth` when given.
/// Rounds may run in parallel; results do not depend on the thread count.
ClusterReport evaluate(const DenseMatrix& y, std::optional<std::span<const std::size_t>> truth,
                       std::size_t c, std::size_t rounds, std::uint64_t seed,
                       const KMeansOptions& options = {});

}  // namespace adaam
