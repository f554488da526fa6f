// Acceptance gate: one PASS/FAIL/SKIP line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <nlohmann/json.hpp>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "adaam/adaam.hpp"
#include "adaam/cluster.hpp"
#include "adaam/dataset.hpp"
#include "adaam/experiment.hpp"
#include "adaam/linalg.hpp"
#include "adaam/parallel.hpp"
#include "cli.hpp"
#include "convert.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using adaam::DenseMatrix;
using adaam::Vector;
using testing_support::to_dense;
using testing_support::to_oracle;

namespace {

enum class Status { Pass, Fail, Skip };

struct Outcome {
  Status status = Status::Pass;
  std::string detail;
};

// Collects the first few violations so a failing line says what broke.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    ++failures_;
    if (failures_ <= 3) notes_ += (notes_.empty() ? "" : "; ") + what;
  }
  Outcome outcome(std::string summary) const {
    if (failures_ == 0) return {Status::Pass, std::move(summary)};
    return {Status::Fail, std::to_string(failures_) + " violation(s): " + notes_};
  }

 private:
  int failures_ = 0;
  std::string notes_;
};

std::string fmt(double v, int digits = 3) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

// Groups ascending eigenvalues whose neighbours are closer than `gap`, so
// subspaces are compared only where they are well defined.
std::vector<std::pair<std::size_t, std::size_t>> clusters_of(const std::vector<double>& values, double gap) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t start = 0;
  for (std::size_t i = 1; i <= values.size(); ++i) {
    if (i == values.size() || values[i] - values[i - 1] > gap) {
      out.emplace_back(start, i);
      start = i;
    }
  }
  return out;
}

oracle::Matrix columns(const oracle::Matrix& m, std::size_t begin, std::size_t end) {
  oracle::Matrix out = oracle::zeros(m.size(), end - begin);
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = begin; j < end; ++j) out[i][j - begin] = m[i][j];
  return out;
}

Outcome spectral_core() {
  Checks checks;
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<std::size_t> size(1, 12);
  double worst_value = 0.0, worst_angle = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = size(rng);
    const auto s = oracle::random_symmetric(n, rng);
    const auto ref = oracle::jacobi_eig(s);
    const auto got = adaam::symmetric_eig(to_dense(s));
    const auto vectors = to_oracle(got.vectors);
    for (std::size_t k = 0; k < n; ++k) {
      worst_value = std::max(worst_value, std::abs(got.values[static_cast<Eigen::Index>(k)] - ref.values[k]));
    }
    for (auto [a, b] : clusters_of(ref.values, 1e-4)) {
      worst_angle = std::max(worst_angle, oracle::subspace_gap(columns(vectors, a, b), columns(ref.vectors, a, b)));
    }

    const std::size_t rows = size(rng), cols = size(rng);
    const auto x = oracle::random_matrix(rows, cols, rng);
    const std::size_t r = std::min(rows, cols);
    const auto svd = adaam::thin_svd(to_dense(x), r);
    const auto outer = oracle::jacobi_eig(oracle::multiply(x, oracle::transpose(x)));
    // Descending eigenvalues of X X^T are the squared singular values.
    std::vector<double> desc(outer.values.rbegin(), outer.values.rend());
    oracle::Matrix desc_vectors = oracle::zeros(rows, rows);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < rows; ++j) desc_vectors[i][j] = outer.vectors[i][rows - 1 - j];
    for (std::size_t k = 0; k < r; ++k) {
      const double sigma = svd.singular[static_cast<Eigen::Index>(k)];
      worst_value = std::max(worst_value, std::abs(sigma * sigma - std::max(desc[k], 0.0)));
    }
    std::vector<double> asc(desc.begin(), desc.begin() + static_cast<std::ptrdiff_t>(r));
    std::reverse(asc.begin(), asc.end());
    const auto left = to_oracle(svd.left);
    for (auto [a, b] : clusters_of(asc, 1e-4)) {
      // Back to descending column positions; skip the numerically null block.
      const std::size_t hi = r - a, lo = r - b;
      if (desc[hi - 1] < 1e-8) continue;
      worst_angle = std::max(worst_angle, oracle::subspace_gap(columns(left, lo, hi), columns(desc_vectors, lo, hi)));
    }
  }
  checks.expect(worst_value <= 1e-8, "eigenvalue error " + fmt(worst_value));
  checks.expect(worst_angle <= 1e-6, "subspace angle " + fmt(worst_angle));
  return checks.outcome("200 eig + 200 svd cases, max value err " + fmt(worst_value) + ", max angle " +
                        fmt(worst_angle));
}

Outcome zero_degree_invariant() {
  Checks checks;
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<std::size_t> size(2, 50);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = size(rng), d = 1 + rng() % 20, c = 1 + rng() % 10;
    const auto x = adaam::center(to_dense(oracle::random_matrix(n, d, rng, 5.0)));
    const auto est = adaam::intermediate_affinity(x, c, std::nullopt, {});
    const DenseMatrix& p = est.factor.basis;
    const double bound = 1e-8 * std::sqrt(static_cast<double>(n));
    const double row_sum = (p * p.transpose()).rowwise().sum().cwiseAbs().maxCoeff();
    const double ones = (Vector::Ones(static_cast<Eigen::Index>(n)).transpose() * p).cwiseAbs().maxCoeff();
    worst = std::max({worst, row_sum / std::sqrt(static_cast<double>(n)), ones / std::sqrt(static_cast<double>(n))});
    checks.expect(row_sum <= bound, "row sum " + fmt(row_sum) + " at n=" + std::to_string(n));
    checks.expect(ones <= bound, "1^T P " + fmt(ones) + " at n=" + std::to_string(n));
  }
  return checks.outcome("100 centered inputs, max |row sum|/sqrt(n) " + fmt(worst));
}

adaam::SparseAffinity from_dense(const oracle::Matrix& m) {
  std::vector<adaam::AffinityEntry> entries;
  Vector diagonal(static_cast<Eigen::Index>(m.size()));
  for (std::size_t i = 0; i < m.size(); ++i) {
    diagonal[static_cast<Eigen::Index>(i)] = m[i][i];
    for (std::size_t j = i + 1; j < m.size(); ++j) entries.push_back({i, j, m[i][j]});
  }
  return adaam::SparseAffinity(m.size(), std::move(entries), diagonal);
}

Outcome sparsifier_exactness() {
  Checks checks;
  checks.expect(adaam::sparsify_budget(1440, 20, 2.5) == 41472, "t(1440, 20, 2.5) != 41472");
  checks.expect(adaam::sparsify_budget(575, 20, 2.5) == 6612, "t(575, 20, 2.5) != 6612");
  checks.expect(adaam::sparsify_budget(575, 20, 5.0) == 3306, "t(575, 20, 5) != 3306");
  checks.expect(adaam::sparsify_budget(400, 4, 5.0) == 8000, "t(400, 4, 5) != 8000");
  std::mt19937_64 rng(4242);
  std::size_t cases = 0;
  for (std::size_t n : {8u, 20u}) {
    for (int trial = 0; trial < 40; ++trial) {
      oracle::Matrix m = oracle::zeros(n, n);
      const bool ties = trial % 2 == 0;
      std::uniform_int_distribution<int> coarse(-2, 2);
      std::uniform_real_distribution<double> fine(-1.0, 1.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) m[i][j] = m[j][i] = ties ? coarse(rng) : fine(rng);
      for (std::size_t c = 1; c <= 5; ++c) {
        for (double alpha : {1.0, 2.5, 5.0}) {
          for (bool diag : {true, false}) {
            const auto got = adaam::sparsify_top_t(from_dense(m), c, {alpha, diag});
            const auto budget = adaam::sparsify_budget(n, c, alpha);
            const DenseMatrix want = to_dense(oracle::brute_sparsify(m, budget, diag));
            ++cases;
            checks.expect(got.affinity.to_dense() == want,
                          "mismatch n=" + std::to_string(n) + " c=" + std::to_string(c) + " alpha=" + fmt(alpha));
            checks.expect(got.kept <= budget, "over budget");
          }
        }
      }
    }
  }
  return checks.outcome(std::to_string(cases) + " selections equal brute force; budgets match hand values");
}

Outcome pipeline_properties() {
  Checks checks;
  const auto data = adaam::synth_blobs({.clusters = 4, .samples = 200, .features = 10, .seed = 11});
  double worst_rel = 0.0;
  for (auto method : {adaam::Method::Adaam, adaam::Method::KnnLpp}) {
    const adaam::AdaamConfig config{.clusters = 4, .iterations = 2};
    adaam::set_max_threads(1);
    const auto model = method == adaam::Method::Adaam ? adaam::adaam_fit(data.x, config)
                                                      : adaam::knn_lpp_fit(data.x, config);
    adaam::set_max_threads(4);
    const auto again = method == adaam::Method::Adaam ? adaam::adaam_fit(data.x, config)
                                                      : adaam::knn_lpp_fit(data.x, config);
    adaam::set_max_threads(0);
    const std::string tag = std::string(adaam::to_string(method)) + ": ";
    const DenseMatrix& a = model.projection.map;
    checks.expect(model.metric == a * a.transpose(), tag + "metric is not map * map^T");
    const auto eig = adaam::symmetric_eig(model.metric);
    const double top = eig.values.cwiseAbs().maxCoeff();
    checks.expect(eig.values.minCoeff() >= -1e-12 * top, tag + "metric not PSD");
    std::size_t rank = 0;
    for (Eigen::Index i = 0; i < eig.values.size(); ++i) rank += eig.values[i] > 1e-10 * top;
    checks.expect(rank <= model.config.dimension, tag + "rank " + std::to_string(rank) + " > m");
    const DenseMatrix y = adaam::transform(model, data.x);
    for (Eigen::Index i = 0; i < data.x.rows(); ++i) {
      const Eigen::Index j = (i * 37 + 11) % data.x.rows();
      const double lhs = adaam::mahalanobis(model.metric, data.x.row(i).transpose(), data.x.row(j).transpose());
      const double rhs = (y.row(i) - y.row(j)).squaredNorm();
      const double rel = std::abs(lhs - rhs) / std::max(rhs, 1e-300);
      if (rhs > 0) worst_rel = std::max(worst_rel, rel);
      checks.expect(rel <= 1e-8 || std::abs(lhs - rhs) <= 1e-14, tag + "distance identity rel " + fmt(rel));
    }
    checks.expect(model.projection.map == again.projection.map, tag + "map differs between 1 and 4 threads");
    adaam::set_max_threads(1);
    const auto e1 = adaam::evaluate(y, std::span<const std::size_t>(*data.labels), 4, 4, 3);
    adaam::set_max_threads(4);
    const auto e4 = adaam::evaluate(y, std::span<const std::size_t>(*data.labels), 4, 4, 3);
    adaam::set_max_threads(0);
    checks.expect(e1.round_wcss == e4.round_wcss && e1.accuracies == e4.accuracies,
                  tag + "evaluation differs between 1 and 4 threads");
  }
  return checks.outcome("adaam + knn-lpp: M = A A^T (A is d x m), PSD, rank <= m; max distance rel err " +
                        fmt(worst_rel) + "; bit-identical at 1 and 4 threads");
}

struct CliRun {
  int code = 0;
  std::string err;
  nlohmann::json report;
};

CliRun cli(const std::vector<std::string>& args, const std::string& report_path) {
  std::ostringstream out, err;
  std::vector<std::string> full = args;
  full.insert(full.end(), {"--report", report_path});
  CliRun r;
  r.code = adaam::cli::run(full, out, err);
  r.err = err.str();
  if (r.code == 0) {
    std::ifstream in(report_path);
    r.report = nlohmann::json::parse(in);
  }
  return r;
}

std::string synth_blob_file(const fs::path& dir) {
  const std::string path = (dir / "blobs.aam").string();
  std::ostringstream out, err;
  const int code = adaam::cli::run({"synth", "--clusters", "4", "--samples", "400", "--features", "20",
                                    "--separation", "10", "--sigma", "1", "--seed", "7", "--out", path},
                                   out, err);
  if (code != 0) throw std::runtime_error("synth failed: " + err.str());
  return path;
}

Outcome synthetic_end_to_end(const fs::path& dir) {
  Checks checks;
  const auto blobs = synth_blob_file(dir);
  const auto adaam_run = cli({"cluster", "--input", blobs, "--method", "adaam", "--rounds", "10"},
                             (dir / "adaam.json").string());
  const auto raw_run = cli({"cluster", "--input", blobs, "--method", "raw", "--rounds", "10"},
                           (dir / "raw.json").string());
  checks.expect(adaam_run.code == 0, "adaam run failed: " + adaam_run.err);
  checks.expect(raw_run.code == 0, "raw run failed: " + raw_run.err);
  if (adaam_run.code != 0 || raw_run.code != 0) return checks.outcome("");
  const double a = adaam_run.report["avg"], r = raw_run.report["avg"];
  checks.expect(a >= 0.98, "adaam avg " + fmt(a) + " < 0.98");
  checks.expect(r >= 0.95, "raw avg " + fmt(r) + " < 0.95");
  return checks.outcome("adaam avg " + fmt(a, 4) + " (>= 0.98), raw avg " + fmt(r, 4) + " (>= 0.95)");
}

Outcome iteration_stability(const fs::path& dir) {
  Checks checks;
  const auto blobs = synth_blob_file(dir);
  const auto once = cli({"cluster", "--input", blobs, "--method", "adaam", "--iterations", "1"},
                        (dir / "it1.json").string());
  const auto thrice = cli({"cluster", "--input", blobs, "--method", "adaam", "--iterations", "3"},
                          (dir / "it3.json").string());
  checks.expect(once.code == 0 && thrice.code == 0, "cluster run failed: " + once.err + thrice.err);
  if (once.code != 0 || thrice.code != 0) return checks.outcome("");
  const double a1 = once.report["avg"], a3 = thrice.report["avg"];
  const double delta_pp = 100.0 * std::abs(a3 - a1);
  checks.expect(delta_pp <= 2.0, "accuracy moved " + fmt(delta_pp) + " pp");
  return checks.outcome("avg " + fmt(a1, 4) + " (1 pass) vs " + fmt(a3, 4) + " (3 passes), |delta| " +
                        fmt(delta_pp) + " pp <= 2");
}

Outcome protocol_fidelity() {
  Checks checks;
  std::mt19937_64 rng(555);
  std::size_t monotone_runs = 0;
  for (std::uint64_t round = 0; round < 20; ++round) {
    const std::size_t n = 40 + rng() % 80, c = 2 + rng() % 6;
    const DenseMatrix y = to_dense(oracle::random_matrix(n, 3, rng));
    const auto result = adaam::kmeans_round(y, c, round);
    double best = 0.0;
    for (std::size_t s = 0; s < adaam::kRunsPerRound; ++s) {
      const auto run = adaam::kmeans(y, c, round * adaam::kRunsPerRound + s);
      best = s == 0 ? run.wcss : std::min(best, run.wcss);
      checks.expect(result.run_wcss[s] == run.wcss, "run wcss not reproduced");
      for (std::size_t i = 1; i < run.wcss_trace.size(); ++i) {
        checks.expect(run.wcss_trace[i] <= run.wcss_trace[i - 1] * (1 + 1e-12), "wcss increased");
      }
      ++monotone_runs;
    }
    checks.expect(result.best.wcss == best, "round did not keep min wcss");
  }
  std::size_t matched = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t c = 1 + static_cast<std::size_t>(trial) % 6, n = 6 + rng() % 60;
    std::vector<std::size_t> a(n), t(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = rng() % c;
      t[i] = rng() % c;
    }
    const double got = adaam::accuracy(a, t), want = oracle::brute_accuracy(a, t);
    checks.expect(got == want, "accuracy " + fmt(got) + " vs enumeration " + fmt(want));
    ++matched;
  }
  return checks.outcome("20 instrumented rounds keep min wcss; " + std::to_string(monotone_runs) +
                        " monotone wcss traces; " + std::to_string(matched) + " accuracies equal c!-enumeration");
}

adaam::LabeledDataset load_user_dataset(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  char magic[4] = {};
  probe.read(magic, 4);
  if (probe && std::string(magic, 4) == "AAM1") return adaam::load_binary(path);
  std::string first;
  std::getline(std::ifstream(path) >> std::ws, first);
  std::size_t label = static_cast<std::size_t>(std::count(first.begin(), first.end(), ','));
  if (const char* col = std::getenv("ADAAM_UMIST_LABEL_COL")) label = std::stoul(col);
  return adaam::load_csv(path, adaam::LabelColumn{label});
}

Outcome umist_comparison() {
  const char* path = std::getenv("ADAAM_UMIST");
  if (path == nullptr || *path == '\0') {
    return {Status::Skip, "set ADAAM_UMIST to a 575 x 1600 UMIST export (labels in the last CSV column or AAM1)"};
  }
  Checks checks;
  const auto data = load_user_dataset(path);
  checks.expect(data.x.rows() == 575 && data.x.cols() == 1600 && data.class_count() == 20,
                "expected 575 x 1600 with 20 classes, got " + std::to_string(data.x.rows()) + " x " +
                    std::to_string(data.x.cols()) + " with " + std::to_string(data.class_count()));
  adaam::RunConfig config;
  config.neighbours = 5;
  config.dimension = 20;
  config.rounds = 10;
  config.method = adaam::RunMethod::Adaam;
  const auto ours = adaam::run_experiment(data, config);
  config.method = adaam::RunMethod::KnnLpp;
  const auto base = adaam::run_experiment(data, config);
  const double a = 100.0 * ours.clustering.average, b = 100.0 * base.clustering.average;
  checks.expect(a - b >= 2.0, "adaam " + fmt(a, 4) + " vs knn-lpp " + fmt(b, 4) + ": margin below 2 pp");
  checks.expect(a >= 55.0 && a <= 80.0, "adaam average " + fmt(a, 4) + " outside [55, 80]");
  return checks.outcome("adaam " + fmt(a, 4) + "% vs knn-lpp " + fmt(b, 4) + "%");
}

struct Criterion {
  const char* id;
  const char* title;
  double limit_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const fs::path dir = fs::temp_directory_path() / "adaam_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);

  const std::vector<Criterion> criteria{
      {"AC1", "spectral core vs brute-force oracle", 10.0, spectral_core},
      {"AC2", "zero row sums of the unsparsified affinity", 5.0, zero_degree_invariant},
      {"AC3", "sparsifier equals full sort and truncate", 1.0, sparsifier_exactness},
      {"AC4", "pipeline properties and thread determinism", 10.0, pipeline_properties},
      {"AC5", "synthetic blobs end to end", 30.0, [&] { return synthetic_end_to_end(dir); }},
      {"AC6", "UMIST: adaam beats knn-lpp by >= 2 pp", 300.0, umist_comparison},
      {"AC7", "evaluation protocol fidelity", 10.0, protocol_fidelity},
      {"AC8", "iteration stability on blobs", 60.0, [&] { return iteration_stability(dir); }},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {Status::Fail, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (outcome.status == Status::Pass && seconds > c.limit_s) {
      outcome = {Status::Fail, "took " + fmt(seconds) + " s, limit " + fmt(c.limit_s) + " s; " + outcome.detail};
    }
    const char* label = outcome.status == Status::Pass ? "PASS" : outcome.status == Status::Fail ? "FAIL" : "SKIP";
    std::printf("%s %s  %s [%.2f s / %.0f s]  %s\n", c.id, label, c.title, seconds, c.limit_s,
                outcome.detail.c_str());
    std::fflush(stdout);
    failed += outcome.status == Status::Fail;
  }
  fs::remove_all(dir);
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
