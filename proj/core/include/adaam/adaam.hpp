#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "adaam/graph.hpp"
#include "adaam/linalg.hpp"
#include "adaam/lpp.hpp"

namespace adaam {

/// Instances with zero column means plus the means that were removed.
struct CenteredData {
  DenseMatrix values;
  Vector column_means;
};

/// Subtracts column means. Throws InvalidParams for fewer than two rows and
/// NonFinite on NaN/Inf.
CenteredData center(const DenseMatrix& x);

enum class FactorSource { FromData, FromProjection };

/// Column-orthonormal n x t factor P of a low-rank affinity P P^T.
struct OrthoFactor {
  DenseMatrix basis;
  FactorSource source = FactorSource::FromData;
};

/// A learned affinity: its factor and the sparsified P P^T.
struct AffinityEstimate {
  OrthoFactor factor;
  SparsifyResult sparse;
  /// Rank actually used; below the request when the data were rank deficient.
  std::size_t rank = 0;
  bool rank_truncated = false;
};

/// Top-`rank` left singular vectors of the centered data (they maximize
/// tr(P^T X X^T P)), and P P^T sparsified with `options`. Default rank is
/// min(c, numerical rank).
AffinityEstimate intermediate_affinity(const CenteredData& x, std::size_t c,
                                       std::optional<std::size_t> rank,
                                       const SparsifyOptions& options);

/// Unit-norm columns: the m eigenvectors of X^T (L - delta) X with the
/// smallest eigenvalues, L the Laplacian of `knn`. Delta has zero degrees
/// before sparsification, so its Laplacian is just -delta. Candidates are
/// restricted to the row space of X; throws RankDeficient when m exceeds
/// its numerical rank.
Projection projection_step(const CenteredData& x, const SparseAffinity& knn,
                           const SparseAffinity& delta, std::size_t m);

/// Same construction as `intermediate_affinity` on the projected data X A.
/// Default rank is min(m, numerical rank of X A).
AffinityEstimate final_affinity(const CenteredData& x, const DenseMatrix& map, std::size_t c,
                                std::optional<std::size_t> rank,
                                const SparsifyOptions& options);

enum class Method { Adaam, KnnLpp };

std::string_view to_string(Method method) noexcept;

struct AdaamConfig {
  std::size_t clusters = 0;
  /// k of the k-NN graph; default Round(log2(n / c)) clamped to [1, n - 1].
  std::optional<std::size_t> neighbours;
  /// Projected dimension m; default c.
  std::optional<std::size_t> dimension;
  std::size_t iterations = 1;
  double alpha1 = 2.5;
  double alpha2 = 5.0;
  std::optional<double> bandwidth;
  bool squared_kernel = false;
  std::optional<std::size_t> intermediate_rank;
  std::optional<std::size_t> final_rank;
  bool sparsify_diagonal = true;
  std::uint64_t seed = 0;
};

/// Every knob after defaults were applied.
struct ResolvedConfig {
  Method method = Method::Adaam;
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t clusters = 0;
  std::size_t neighbours = 0;
  std::size_t dimension = 0;
  std::size_t iterations = 1;
  double alpha1 = 2.5;
  double alpha2 = 5.0;
  double bandwidth = 0.0;
  bool squared_kernel = false;
  std::size_t intermediate_rank = 0;
  std::size_t final_rank = 0;
  bool sparsify_diagonal = true;
  /// Iterations beyond the first re-sparsify with alpha2.
  bool resparsify_each_iteration = true;
  std::uint64_t seed = 0;
};

struct AdaamModel {
  Projection projection;
  /// d x d, equal to map * map^T.
  DenseMatrix metric;
  Vector column_means;
  ResolvedConfig config;
  std::vector<std::string> warnings;
};

/// Round(log2(n / c)), half away from zero, clamped to [1, n - 1].
std::size_t default_neighbours(std::size_t n, std::size_t c);

/// The full AdaAM pipeline: center, k-NN heat kernel, intermediate affinity,
/// projection step, final affinity (repeated `iterations` times), then LPP on
/// the final affinity plus the k-NN degree diagonal.
AdaamModel adaam_fit(const DenseMatrix& x, const AdaamConfig& config);

/// Baseline: LPP directly on the k-NN heat kernel, same defaults.
AdaamModel knn_lpp_fit(const DenseMatrix& x, const AdaamConfig& config);

/// (x_new - fitted means) * map.
DenseMatrix transform(const AdaamModel& model, const DenseMatrix& x_new);

/// JSON document with format_version 1. The metric is not stored; it is
/// recomputed from the map on load.
std::string serialize_model(const AdaamModel& model);
AdaamModel parse_model(std::string_view text);
void save_model(const AdaamModel& model, const std::string& path);
AdaamModel load_model(const std::string& path);

}  // namespace adaam
