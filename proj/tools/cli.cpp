#include "cli.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "adaam/adaam.hpp"
#include "adaam/dataset.hpp"
#include "adaam/error.hpp"
#include "adaam/experiment.hpp"

namespace adaam::cli {
namespace {

struct DataFlags {
  std::string input;
  std::string labels_col;
  CLI::Option* labels_opt = nullptr;

  void attach(CLI::App* app, bool required = true) {
    auto* opt = app->add_option("--input", input, "Dataset path (CSV, or AAM1 binary)");
    if (required) opt->required();
    labels_opt = app->add_option("--labels-col", labels_col,
                                 "Label column of a CSV input, by zero-based index or header name");
  }

  std::optional<LabelColumn> label_column() const {
    if (!labels_opt || labels_opt->count() == 0) return std::nullopt;
    if (!labels_col.empty() && std::all_of(labels_col.begin(), labels_col.end(),
                                           [](unsigned char ch) { return std::isdigit(ch); })) {
      return LabelColumn(static_cast<std::size_t>(std::stoull(labels_col)));
    }
    return LabelColumn(labels_col);
  }

  LabeledDataset load(const std::string& path) const { return load_dataset(path, label_column()); }
};

struct ModelFlags {
  std::string method = "adaam";
  std::size_t clusters = 0;
  std::size_t k = 0;
  std::size_t dim = 0;
  double alpha1 = 2.5;
  double alpha2 = 5.0;
  double bandwidth = 0.0;
  bool squared_kernel = false;
  bool exclude_diagonal = false;
  bool standardize = false;
  std::size_t iterations = 1;
  std::size_t rounds = 10;
  std::uint64_t seed = 0;

  CLI::Option* clusters_opt = nullptr;
  CLI::Option* k_opt = nullptr;
  CLI::Option* dim_opt = nullptr;
  CLI::Option* bandwidth_opt = nullptr;

  void attach(CLI::App* app, bool clustering) {
    clusters_opt = app->add_option("--clusters", clusters, "Cluster count c (default: label count)")
                       ->check(CLI::PositiveNumber);
    k_opt = app->add_option("--k", k, "Neighbourhood size (default Round(log2(n/c)))")
                ->check(CLI::PositiveNumber);
    dim_opt = app->add_option("--dim", dim, "Projected dimension m (default c)")->check(CLI::PositiveNumber);
    app->add_option("--alpha1", alpha1, "First sparsification coefficient")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app->add_option("--alpha2", alpha2, "Second sparsification coefficient")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    bandwidth_opt = app->add_option("--bandwidth", bandwidth, "Heat-kernel bandwidth (default: mean k-NN distance)")
                        ->check(CLI::PositiveNumber);
    app->add_flag("--squared-kernel", squared_kernel, "Use exp(-||xi-xj||^2 / t)");
    app->add_flag("--exclude-diagonal", exclude_diagonal,
                  "Drop diagonal affinity entries during sparsification");
    app->add_option("--iterations", iterations, "Affinity/projection refinement passes")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app->add_option("--seed", seed, "Seed (k-means rounds; echoed in models)")->capture_default_str();
    if (clustering) {
      app->add_option("--method", method, "adaam, knn-lpp or raw")
          ->capture_default_str()
          ->check(CLI::IsMember({"adaam", "knn-lpp", "raw"}));
      app->add_option("--rounds", rounds, "k-means rounds (10 runs each)")
          ->capture_default_str()
          ->check(CLI::PositiveNumber);
      app->add_flag("--standardize", standardize, "Scale features to unit variance after centering");
    } else {
      app->add_option("--method", method, "adaam or knn-lpp")
          ->capture_default_str()
          ->check(CLI::IsMember({"adaam", "knn-lpp"}));
    }
  }

  RunConfig config() const {
    RunConfig rc;
    rc.method = *parse_run_method(method);
    if (clusters_opt->count()) rc.clusters = clusters;
    if (k_opt->count()) rc.neighbours = k;
    if (dim_opt->count()) rc.dimension = dim;
    if (bandwidth_opt->count()) rc.bandwidth = bandwidth;
    rc.alpha1 = alpha1;
    rc.alpha2 = alpha2;
    rc.squared_kernel = squared_kernel;
    rc.sparsify_diagonal = !exclude_diagonal;
    rc.iterations = iterations;
    rc.rounds = rounds;
    rc.seed = seed;
    rc.standardize = standardize;
    return rc;
  }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  file << text;
  if (!file) throw Error(ErrorCode::Io, "write to '" + path + "' failed");
}

bool has_suffix(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string format_accuracy(const ClusterReport& r, double value) {
  if (r.accuracies.empty()) return "    -";
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%6.2f", 100.0 * value);
  return buffer;
}

void print_warnings(const std::vector<std::string>& warnings, std::ostream& err) {
  for (const auto& w : warnings) err << "warning: " << w << '\n';
}

std::string table_row(const RunReport& r) {
  char buffer[256];
  std::snprintf(buffer, sizeof buffer, "%-16s %-8s %5zu %4zu %4zu %4zu  %s  %s %10.1f",
                r.dataset.c_str(), std::string(to_string(r.config.method)).c_str(), r.n,
                *r.config.clusters, *r.config.neighbours, *r.config.dimension,
                format_accuracy(r.clustering, r.clustering.average).c_str(),
                format_accuracy(r.clustering, r.clustering.maximum).c_str(),
                r.fit_ms + r.clustering.wall_ms);
  return buffer;
}

constexpr const char* kTableHeader = "dataset          method       n    c    k    m     avg     max    wall_ms";

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Adaptive affinity metric learning and k-means evaluation", "adaam"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Expand all subcommand help");

  // fit
  DataFlags fit_data;
  ModelFlags fit_model_flags;
  std::string fit_out;
  auto* fit = app.add_subcommand("fit", "Learn a metric and write the model file");
  fit_data.attach(fit);
  fit_model_flags.attach(fit, false);
  fit->add_option("--out", fit_out, "Model output path (JSON)")->required();

  // transform
  DataFlags tr_data;
  std::string tr_model;
  std::string tr_out;
  auto* tr = app.add_subcommand("transform", "Embed a dataset with a fitted model");
  tr_data.attach(tr);
  tr->add_option("--model", tr_model, "Model file written by fit")->required()->check(CLI::ExistingFile);
  tr->add_option("--out", tr_out, "Embedded CSV output path (labels appended when present)")->required();

  // cluster
  DataFlags cl_data;
  ModelFlags cl_model;
  std::string cl_report;
  std::string cl_out;
  auto* cl = app.add_subcommand("cluster", "Project and run the k-means protocol");
  cl_data.attach(cl);
  cl_model.attach(cl, true);
  cl->add_option("--report", cl_report, "Write the JSON report here");
  cl->add_option("--out", cl_out, "Write the lowest-wcss cluster labels here (one per line)");

  // bench
  std::vector<std::string> bench_inputs;
  std::string bench_labels;
  ModelFlags bench_model;
  std::vector<std::string> bench_methods{"adaam", "knn-lpp"};
  std::vector<std::size_t> bench_ks;
  std::string bench_report;
  auto* bench = app.add_subcommand("bench", "Compare methods over datasets and neighbourhood sizes");
  bench->add_option("--input", bench_inputs, "Dataset paths")->required()->expected(1, -1);
  auto* bench_labels_opt = bench->add_option("--labels-col", bench_labels, "Label column for CSV inputs");
  bench_model.attach(bench, true);
  bench->add_option("--methods", bench_methods, "Methods to compare")
      ->delimiter(',')
      ->check(CLI::IsMember({"adaam", "knn-lpp", "raw"}))
      ->capture_default_str();
  bench->add_option("--k-sweep", bench_ks, "Neighbourhood sizes to sweep, comma separated")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  bench->add_option("--report", bench_report, "Write all reports as a JSON array here");

  // synth
  BlobSpec blob;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "Generate Gaussian blobs");
  synth->add_option("--clusters", blob.clusters, "Number of blobs")->capture_default_str()->check(CLI::PositiveNumber);
  synth->add_option("--samples", blob.samples, "Number of instances")->capture_default_str()->check(CLI::PositiveNumber);
  synth->add_option("--features", blob.features, "Dimension")->capture_default_str()->check(CLI::PositiveNumber);
  synth->add_option("--separation", blob.separation, "Closest centre distance in units of sigma")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  synth->add_option("--sigma", blob.sigma, "Within-blob standard deviation")->capture_default_str()->check(CLI::PositiveNumber);
  synth->add_option("--seed", blob.seed, "Generator seed")->capture_default_str();
  synth->add_option("--out", synth_out, "Output path; .csv writes CSV (label last), otherwise AAM1 binary")
      ->required();

  std::vector<std::string> argv_storage;
  argv_storage.reserve(args.size() + 1);
  argv_storage.emplace_back("adaam");
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_storage) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*fit) {
      const LabeledDataset data = fit_data.load(fit_data.input);
      const AdaamModel model = fit_model(data, fit_model_flags.config());
      print_warnings(model.warnings, err);
      save_model(model, fit_out);
      out << "wrote " << to_string(model.config.method) << " model (d=" << model.config.d
          << ", m=" << model.config.dimension << ", k=" << model.config.neighbours << ") to " << fit_out
          << '\n';
    } else if (*tr) {
      const AdaamModel model = load_model(tr_model);
      const LabeledDataset data = tr_data.load(tr_data.input);
      save_csv(transform(model, data.x), data.labels, tr_out);
      out << "wrote " << data.x.rows() << " x " << model.config.dimension << " embedding to " << tr_out << '\n';
    } else if (*cl) {
      const LabeledDataset data = cl_data.load(cl_data.input);
      const RunReport report = run_experiment(data, cl_model.config());
      print_warnings(report.warnings, err);
      out << kTableHeader << '\n' << table_row(report) << '\n';
      if (!cl_report.empty()) write_text(cl_report, serialize_report(report));
      if (!cl_out.empty()) {
        std::string labels;
        for (std::size_t label : report.clustering.best.labels) labels += std::to_string(label) + "\n";
        write_text(cl_out, labels);
      }
    } else if (*bench) {
      DataFlags loader;
      loader.labels_col = bench_labels;
      loader.labels_opt = bench_labels_opt;
      std::vector<std::optional<std::size_t>> ks;
      if (bench_ks.empty()) {
        ks.emplace_back(std::nullopt);
      } else {
        for (std::size_t k : bench_ks) ks.emplace_back(k);
      }
      nlohmann::json all = nlohmann::json::array();
      out << kTableHeader << '\n';
      for (const auto& path : bench_inputs) {
        const LabeledDataset data = loader.load(path);
        for (const auto& method : bench_methods) {
          for (const auto& k : ks) {
            RunConfig rc = bench_model.config();
            rc.method = *parse_run_method(method);
            if (k) rc.neighbours = *k;
            const RunReport report = run_experiment(data, rc);
            print_warnings(report.warnings, err);
            out << table_row(report) << '\n';
            all.push_back(nlohmann::json::parse(serialize_report(report)));
          }
        }
      }
      if (!bench_report.empty()) write_text(bench_report, all.dump(2) + "\n");
    } else if (*synth) {
      const LabeledDataset data = synth_blobs(blob);
      if (has_suffix(synth_out, ".csv")) {
        save_csv(data.x, data.labels, synth_out);
      } else {
        save_binary(data, synth_out);
      }
      out << "wrote " << blob.samples << " x " << blob.features << " blobs (" << blob.clusters
          << " clusters) to " << synth_out << '\n';
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

}  // namespace adaam::cli
