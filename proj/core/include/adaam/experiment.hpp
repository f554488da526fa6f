#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "adaam/adaam.hpp"
#include "adaam/cluster.hpp"
#include "adaam/dataset.hpp"

namespace adaam {

enum class RunMethod { Adaam, KnnLpp, Raw };

std::string_view to_string(RunMethod method) noexcept;
std::optional<RunMethod> parse_run_method(std::string_view text) noexcept;

/// Experiment knobs. Unset optionals take the protocol defaults: c from the
/// label count, k = Round(log2(n / c)), m = c.
struct RunConfig {
  RunMethod method = RunMethod::Adaam;
  std::optional<std::size_t> clusters;
  std::optional<std::size_t> neighbours;
  std::optional<std::size_t> dimension;
  double alpha1 = 2.5;
  double alpha2 = 5.0;
  std::optional<double> bandwidth;
  bool squared_kernel = false;
  std::size_t iterations = 1;
  std::size_t rounds = 10;
  std::uint64_t seed = 0;
  bool standardize = false;
  bool sparsify_diagonal = true;
};

struct RunReport {
  std::string dataset;
  std::size_t n = 0;
  std::size_t d = 0;
  /// Every optional filled in; bandwidth is set for the graph-based methods.
  RunConfig config;
  ClusterReport clustering;
  double fit_ms = 0.0;
  std::vector<std::string> warnings;
};

/// Fills clusters, neighbours and dimension. Throws InvalidParams when the
/// cluster count is neither given nor derivable from labels.
RunConfig resolve_run_config(const LabeledDataset& data, const RunConfig& config);

/// Column standardization to unit variance (constant columns untouched);
/// applied before everything else when RunConfig::standardize is set.
DenseMatrix standardized(const DenseMatrix& x);

/// Fits the metric for method adaam or knn-lpp. Throws InvalidParams for raw.
AdaamModel fit_model(const LabeledDataset& data, const RunConfig& config);

/// Fits (unless raw), embeds the training data, and runs the k-means protocol.
RunReport run_experiment(const LabeledDataset& data, const RunConfig& config);

/// Newline-terminated JSON with format_version 1.
std::string serialize_report(const RunReport& report);

}  // namespace adaam
