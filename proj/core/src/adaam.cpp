#include "adaam/adaam.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "adaam/error.hpp"

namespace adaam {
namespace {

AffinityEstimate low_rank_affinity(const DenseMatrix& data, std::size_t c,
                                   std::size_t default_rank, std::optional<std::size_t> rank,
                                   const SparsifyOptions& options, FactorSource source) {
  const auto n = static_cast<std::size_t>(data.rows());
  const std::size_t full = std::min(n, static_cast<std::size_t>(data.cols()));
  const std::size_t requested = rank.value_or(default_rank);
  if (requested == 0 || requested > full) {
    throw Error(ErrorCode::RankRequestTooLarge,
                "affinity rank " + std::to_string(requested) + " outside [1, " + std::to_string(full) + "]");
  }
  const ThinSvd svd = thin_svd(data, full);
  const std::size_t numeric = numerical_rank(svd.singular);
  if (numeric == 0) {
    throw Error(ErrorCode::DegenerateData, "data have zero rank after centering");
  }

  AffinityEstimate out;
  out.rank = std::min(requested, numeric);
  out.rank_truncated = out.rank < requested;
  out.factor.basis = svd.left.leftCols(static_cast<Eigen::Index>(out.rank));
  out.factor.source = source;
  out.sparse = sparsify_low_rank(out.factor.basis, c, options);
  return out;
}

void validate(const DenseMatrix& x, const AdaamConfig& config) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (config.clusters < 2) throw Error(ErrorCode::InvalidParams, "need at least two clusters");
  if (config.clusters > n) {
    throw Error(ErrorCode::ClusterCountTooLarge,
                std::to_string(config.clusters) + " clusters for " + std::to_string(n) + " instances");
  }
  if (config.iterations == 0) throw Error(ErrorCode::InvalidParams, "iterations must be >= 1");
  if (!(config.alpha1 > 0.0) || !(config.alpha2 > 0.0)) {
    throw Error(ErrorCode::InvalidParams, "alpha must be positive");
  }
}

ResolvedConfig resolve(const DenseMatrix& x, const AdaamConfig& config, Method method,
                       std::vector<std::string>& warnings) {
  validate(x, config);
  ResolvedConfig r;
  r.method = method;
  r.n = static_cast<std::size_t>(x.rows());
  r.d = static_cast<std::size_t>(x.cols());
  r.clusters = config.clusters;
  r.neighbours = config.neighbours.value_or(default_neighbours(r.n, r.clusters));
  if (config.dimension) {
    if (*config.dimension == 0 || *config.dimension > r.d) {
      throw Error(ErrorCode::InvalidParams, "projected dimension must lie in [1, d]");
    }
    r.dimension = *config.dimension;
  } else {
    r.dimension = std::min(r.clusters, r.d);
    if (r.dimension < r.clusters) {
      warnings.push_back("projected dimension clamped to d = " + std::to_string(r.d));
    }
  }
  r.iterations = config.iterations;
  r.alpha1 = config.alpha1;
  r.alpha2 = config.alpha2;
  r.squared_kernel = config.squared_kernel;
  r.sparsify_diagonal = config.sparsify_diagonal;
  r.seed = config.seed;
  return r;
}

void note_affinity(const AffinityEstimate& est, const char* stage, std::vector<std::string>& warnings) {
  if (est.rank_truncated) {
    warnings.push_back(std::string(stage) + ": rank truncated to numerical rank " +
                       std::to_string(est.rank));
  }
  if (est.sparse.budget_too_small) {
    warnings.push_back(std::string(stage) + ": sparsification budget " +
                       std::to_string(est.sparse.budget) + " is below n");
  }
}

void note_projection(const Projection& p, std::vector<std::string>& warnings) {
  if (p.degree_shift > 0.0) {
    warnings.push_back("LPP constraint degrees shifted by " + std::to_string(p.degree_shift));
  }
}

}  // namespace

std::string_view to_string(Method method) noexcept {
  switch (method) {
    case Method::Adaam: return "adaam";
    case Method::KnnLpp: return "knn-lpp";
  }
  return "unknown";
}

CenteredData center(const DenseMatrix& x) {
  require_finite(x, "data");
  if (x.rows() < 2) throw Error(ErrorCode::InvalidParams, "centering needs at least two rows");
  CenteredData out;
  out.column_means = x.colwise().mean().transpose();
  out.values = x.rowwise() - out.column_means.transpose();
  return out;
}

AffinityEstimate intermediate_affinity(const CenteredData& x, std::size_t c,
                                       std::optional<std::size_t> rank,
                                       const SparsifyOptions& options) {
  const std::size_t full = std::min(x.values.rows(), x.values.cols());
  return low_rank_affinity(x.values, c, std::min(c, full), rank, options, FactorSource::FromData);
}

Projection projection_step(const CenteredData& x, const SparseAffinity& knn,
                           const SparseAffinity& delta, std::size_t m) {
  const auto n = static_cast<std::size_t>(x.values.rows());
  const auto d = static_cast<std::size_t>(x.values.cols());
  if (knn.size() != n || delta.size() != n) {
    throw Error(ErrorCode::ShapeMismatch, "affinity size differs from instance count");
  }
  if (m == 0 || m > d) throw Error(ErrorCode::ShapeMismatch, "projection dimension must lie in [1, d]");

  // Directions with X a = 0 score zero and would be chosen whenever the
  // operator has fewer than m negative eigenvalues, so solve on the row space.
  const ThinSvd svd = thin_svd(x.values, std::min(n, d));
  const std::size_t rank = numerical_rank(svd.singular);
  if (m > rank) {
    throw Error(ErrorCode::RankDeficient, "projection dimension " + std::to_string(m) +
                                              " exceeds data rank " + std::to_string(rank));
  }
  const DenseMatrix basis = svd.right.leftCols(static_cast<Eigen::Index>(rank));
  const DenseMatrix reduced = x.values * basis;
  const DenseMatrix combined =
      symmetrized(laplacian_quadratic(knn, reduced) - reduced.transpose() * delta.multiply(reduced));
  const EigenPairs pairs = symmetric_eig(combined);

  Projection out;
  const auto cols = static_cast<Eigen::Index>(m);
  out.map = basis * pairs.vectors.leftCols(cols);
  out.eigenvalues = pairs.values.head(cols);
  apply_sign_convention(out.map);
  return out;
}

AffinityEstimate final_affinity(const CenteredData& x, const DenseMatrix& map, std::size_t c,
                                std::optional<std::size_t> rank,
                                const SparsifyOptions& options) {
  if (map.rows() != x.values.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "projection rows differ from data dimension");
  }
  const DenseMatrix projected = x.values * map;
  const std::size_t full = std::min(projected.rows(), projected.cols());
  return low_rank_affinity(projected, c, full, rank, options, FactorSource::FromProjection);
}

std::size_t default_neighbours(std::size_t n, std::size_t c) {
  if (c == 0 || n < 2) throw Error(ErrorCode::InvalidParams, "need n >= 2 and c >= 1");
  const double k = std::round(std::log2(static_cast<double>(n) / static_cast<double>(c)));
  const double upper = static_cast<double>(n - 1);
  return static_cast<std::size_t>(std::clamp(k, 1.0, upper));
}

AdaamModel adaam_fit(const DenseMatrix& x, const AdaamConfig& config) {
  AdaamModel model;
  model.config = resolve(x, config, Method::Adaam, model.warnings);
  ResolvedConfig& rc = model.config;

  const CenteredData data = center(x);
  model.column_means = data.column_means;

  const HeatKernelGraph knn =
      knn_heat_kernel(data.values, rc.neighbours, {config.bandwidth, config.squared_kernel});
  rc.bandwidth = knn.bandwidth;

  const SparsifyOptions first{rc.alpha1, rc.sparsify_diagonal};
  const SparsifyOptions second{rc.alpha2, rc.sparsify_diagonal};

  const AffinityEstimate intermediate =
      intermediate_affinity(data, rc.clusters, config.intermediate_rank, first);
  note_affinity(intermediate, "intermediate affinity", model.warnings);
  rc.intermediate_rank = intermediate.rank;

  const SparseAffinity* delta = &intermediate.sparse.affinity;
  AffinityEstimate adaptive;
  for (std::size_t pass = 0; pass < rc.iterations; ++pass) {
    const Projection step = projection_step(data, knn.affinity, *delta, rc.dimension);
    const std::size_t default_rank = config.final_rank.value_or(rc.dimension);
    adaptive = final_affinity(data, step.map, rc.clusters, default_rank, second);
    note_affinity(adaptive, "final affinity", model.warnings);
    delta = &adaptive.sparse.affinity;
  }
  rc.final_rank = adaptive.rank;

  const SparseAffinity assembled = adaptive.sparse.affinity.plus_diagonal(degree(knn.affinity));
  model.projection = lpp(data.values, assembled, rc.dimension);
  note_projection(model.projection, model.warnings);
  model.metric = metric_of(model.projection.map);
  return model;
}

AdaamModel knn_lpp_fit(const DenseMatrix& x, const AdaamConfig& config) {
  AdaamModel model;
  model.config = resolve(x, config, Method::KnnLpp, model.warnings);
  ResolvedConfig& rc = model.config;

  const CenteredData data = center(x);
  model.column_means = data.column_means;
  const HeatKernelGraph knn =
      knn_heat_kernel(data.values, rc.neighbours, {config.bandwidth, config.squared_kernel});
  rc.bandwidth = knn.bandwidth;

  model.projection = lpp(data.values, knn.affinity, rc.dimension);
  note_projection(model.projection, model.warnings);
  model.metric = metric_of(model.projection.map);
  return model;
}

DenseMatrix transform(const AdaamModel& model, const DenseMatrix& x_new) {
  if (x_new.cols() != model.projection.map.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "input has " + std::to_string(x_new.cols()) +
                                              " features, model expects " +
                                              std::to_string(model.projection.map.rows()));
  }
  require_finite(x_new, "transform input");
  return (x_new.rowwise() - model.column_means.transpose()) * model.projection.map;
}

}  // namespace adaam
