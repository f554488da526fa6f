#include "adaam/experiment.hpp"

#include <chrono>
#include <cmath>

#include <nlohmann/json.hpp>

#include "adaam/error.hpp"

namespace adaam {
namespace {

constexpr int kReportFormatVersion = 1;

AdaamConfig to_model_config(const RunConfig& rc) {
  AdaamConfig mc;
  mc.clusters = rc.clusters.value_or(0);
  mc.neighbours = rc.neighbours;
  mc.dimension = rc.dimension;
  mc.iterations = rc.iterations;
  mc.alpha1 = rc.alpha1;
  mc.alpha2 = rc.alpha2;
  mc.bandwidth = rc.bandwidth;
  mc.squared_kernel = rc.squared_kernel;
  mc.sparsify_diagonal = rc.sparsify_diagonal;
  mc.seed = rc.seed;
  return mc;
}

}  // namespace

std::string_view to_string(RunMethod method) noexcept {
  switch (method) {
    case RunMethod::Adaam: return "adaam";
    case RunMethod::KnnLpp: return "knn-lpp";
    case RunMethod::Raw: return "raw";
  }
  return "unknown";
}

std::optional<RunMethod> parse_run_method(std::string_view text) noexcept {
  if (text == "adaam") return RunMethod::Adaam;
  if (text == "knn-lpp") return RunMethod::KnnLpp;
  if (text == "raw") return RunMethod::Raw;
  return std::nullopt;
}

RunConfig resolve_run_config(const LabeledDataset& data, const RunConfig& config) {
  RunConfig rc = config;
  const auto n = static_cast<std::size_t>(data.x.rows());
  const auto d = static_cast<std::size_t>(data.x.cols());
  if (!rc.clusters) {
    const std::size_t classes = data.class_count();
    if (classes == 0) {
      throw Error(ErrorCode::InvalidParams, "cluster count required for unlabeled data");
    }
    rc.clusters = classes;
  }
  if (*rc.clusters == 0 || *rc.clusters > n) {
    throw Error(ErrorCode::ClusterCountTooLarge,
                std::to_string(*rc.clusters) + " clusters for " + std::to_string(n) + " instances");
  }
  if (rc.rounds == 0) throw Error(ErrorCode::InvalidParams, "rounds must be >= 1");
  if (!rc.neighbours) rc.neighbours = default_neighbours(n, *rc.clusters);
  if (!rc.dimension) {
    rc.dimension = rc.method == RunMethod::Raw ? d : std::min(*rc.clusters, d);
  }
  return rc;
}

DenseMatrix standardized(const DenseMatrix& x) {
  if (x.rows() < 2) return x;
  const Eigen::RowVectorXd mean = x.colwise().mean();
  DenseMatrix out = x.rowwise() - mean;
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    const double sd = std::sqrt(out.col(j).squaredNorm() / static_cast<double>(out.rows()));
    if (sd > 0.0) out.col(j) /= sd;
  }
  return out;
}

AdaamModel fit_model(const LabeledDataset& data, const RunConfig& config) {
  const RunConfig rc = resolve_run_config(data, config);
  const DenseMatrix x = rc.standardize ? standardized(data.x) : data.x;
  switch (rc.method) {
    case RunMethod::Adaam: return adaam_fit(x, to_model_config(rc));
    case RunMethod::KnnLpp: return knn_lpp_fit(x, to_model_config(rc));
    case RunMethod::Raw: break;
  }
  throw Error(ErrorCode::InvalidParams, "method raw has no model to fit");
}

RunReport run_experiment(const LabeledDataset& data, const RunConfig& config) {
  RunReport report;
  report.dataset = data.name;
  report.n = static_cast<std::size_t>(data.x.rows());
  report.d = static_cast<std::size_t>(data.x.cols());
  report.config = resolve_run_config(data, config);
  RunConfig& rc = report.config;

  const auto start = std::chrono::steady_clock::now();
  const DenseMatrix x = rc.standardize ? standardized(data.x) : data.x;
  DenseMatrix embedded;
  if (rc.method == RunMethod::Raw) {
    embedded = center(x).values;
  } else {
    AdaamModel model = rc.method == RunMethod::Adaam ? adaam_fit(x, to_model_config(rc))
                                                     : knn_lpp_fit(x, to_model_config(rc));
    rc.bandwidth = model.config.bandwidth;
    rc.dimension = model.config.dimension;
    report.warnings = std::move(model.warnings);
    embedded = transform(model, x);
  }
  report.fit_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  std::optional<std::span<const std::size_t>> truth;
  if (data.labels) truth = std::span<const std::size_t>(*data.labels);
  report.clustering = evaluate(embedded, truth, *rc.clusters, rc.rounds, rc.seed);
  return report;
}

std::string serialize_report(const RunReport& report) {
  using nlohmann::json;
  const RunConfig& rc = report.config;
  const ClusterReport& cr = report.clustering;

  json config;
  config["method"] = std::string(to_string(rc.method));
  config["clusters"] = rc.clusters.value_or(0);
  config["k"] = rc.neighbours.value_or(0);
  config["m"] = rc.dimension.value_or(0);
  config["alpha1"] = rc.alpha1;
  config["alpha2"] = rc.alpha2;
  config["bandwidth"] = rc.bandwidth ? json(*rc.bandwidth) : json(nullptr);
  config["squared_kernel"] = rc.squared_kernel;
  config["iterations"] = rc.iterations;
  config["rounds"] = rc.rounds;
  config["seed"] = rc.seed;
  config["standardize"] = rc.standardize;
  config["sparsify_diagonal"] = rc.sparsify_diagonal;
  config["resparsify_each_iteration"] = true;
  config["kmeans_space"] = "raw projection";

  json doc;
  doc["format_version"] = kReportFormatVersion;
  doc["method"] = config["method"];
  doc["dataset"] = report.dataset;
  doc["n"] = report.n;
  doc["d"] = report.d;
  doc["c"] = config["clusters"];
  doc["k"] = config["k"];
  doc["rounds"] = rc.rounds;
  doc["seed"] = rc.seed;
  if (cr.accuracies.empty()) {
    doc["accuracies"] = json::array();
    doc["avg"] = nullptr;
    doc["max"] = nullptr;
  } else {
    doc["accuracies"] = cr.accuracies;
    doc["avg"] = cr.average;
    doc["max"] = cr.maximum;
  }
  doc["wall_ms"] = report.fit_ms + cr.wall_ms;
  doc["fit_ms"] = report.fit_ms;
  doc["round_wcss"] = cr.round_wcss;
  doc["warnings"] = report.warnings;
  doc["config"] = std::move(config);
  return doc.dump(2) + "\n";
}

}  // namespace adaam
