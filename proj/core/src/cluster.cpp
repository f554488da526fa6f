#include "adaam/cluster.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "adaam/error.hpp"
#include "adaam/parallel.hpp"

namespace adaam {
namespace {

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Portable uniform stream; std distributions differ across standard libraries.
class Uniform {
 public:
  explicit Uniform(std::uint64_t seed) : state_(seed) {}
  double next() noexcept { return static_cast<double>(splitmix64(state_) >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

double row_distance(const DenseMatrix& a, Eigen::Index i, const DenseMatrix& b, Eigen::Index j) {
  return (a.row(i) - b.row(j)).squaredNorm();
}

DenseMatrix plus_plus_seeds(const DenseMatrix& y, std::size_t c, Uniform& uniform) {
  const Eigen::Index n = y.rows();
  DenseMatrix centres(static_cast<Eigen::Index>(c), y.cols());
  std::vector<double> nearest(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  std::vector<bool> chosen(static_cast<std::size_t>(n), false);

  auto pick = [&](Eigen::Index idx, Eigen::Index slot) {
    centres.row(slot) = y.row(idx);
    chosen[static_cast<std::size_t>(idx)] = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      nearest[static_cast<std::size_t>(i)] =
          std::min(nearest[static_cast<std::size_t>(i)], row_distance(y, i, centres, slot));
    }
  };

  pick(std::min<Eigen::Index>(static_cast<Eigen::Index>(uniform.next() * static_cast<double>(n)), n - 1), 0);
  for (Eigen::Index slot = 1; slot < static_cast<Eigen::Index>(c); ++slot) {
    const double total = std::accumulate(nearest.begin(), nearest.end(), 0.0);
    Eigen::Index idx = -1;
    if (total > 0.0) {
      const double target = uniform.next() * total;
      double running = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double w = nearest[static_cast<std::size_t>(i)];
        if (w <= 0.0) continue;
        running += w;
        idx = i;
        if (running > target) break;
      }
    } else {
      // Every point coincides with a centre; take the first unused index.
      for (Eigen::Index i = 0; i < n && idx < 0; ++i) {
        if (!chosen[static_cast<std::size_t>(i)]) idx = i;
      }
    }
    pick(idx, slot);
  }
  return centres;
}

double total_wcss(const DenseMatrix& y, const std::vector<std::size_t>& labels, const DenseMatrix& centres) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    sum += row_distance(y, i, centres, static_cast<Eigen::Index>(labels[static_cast<std::size_t>(i)]));
  }
  return sum;
}

}  // namespace

ClusterAssignment kmeans(const DenseMatrix& y, std::size_t c, std::uint64_t seed, const KMeansOptions& options) {
  require_finite(y, "k-means input");
  const auto n = static_cast<std::size_t>(y.rows());
  if (c == 0) throw Error(ErrorCode::InvalidParams, "k-means needs at least one cluster");
  if (c > n) {
    throw Error(ErrorCode::ClusterCountTooLarge,
                std::to_string(c) + " clusters for " + std::to_string(n) + " points");
  }

  Uniform uniform(seed);
  ClusterAssignment out;
  out.seed = seed;
  out.centroids = plus_plus_seeds(y, c, uniform);
  out.labels.assign(n, 0);

  std::vector<double> distance(n);
  std::vector<std::size_t> sizes(c);
  for (std::size_t iter = 0; iter < std::max<std::size_t>(options.max_iterations, 1); ++iter) {
    bool changed = iter == 0;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < c; ++j) {
        const double dist = row_distance(y, static_cast<Eigen::Index>(i), out.centroids, static_cast<Eigen::Index>(j));
        if (dist < best_d) {
          best_d = dist;
          best = j;
        }
      }
      if (best != out.labels[i]) changed = true;
      out.labels[i] = best;
      distance[i] = best_d;
    }

    std::fill(sizes.begin(), sizes.end(), 0);
    for (std::size_t label : out.labels) ++sizes[label];
    for (std::size_t j = 0; j < c; ++j) {
      if (sizes[j] > 0) continue;
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (sizes[out.labels[i]] > 1 && (far == n || distance[i] > distance[far])) far = i;
      }
      --sizes[out.labels[far]];
      out.labels[far] = j;
      sizes[j] = 1;
      distance[far] = 0.0;
      changed = true;
    }

    out.centroids.setZero();
    for (std::size_t i = 0; i < n; ++i) {
      out.centroids.row(static_cast<Eigen::Index>(out.labels[i])) += y.row(static_cast<Eigen::Index>(i));
    }
    for (std::size_t j = 0; j < c; ++j) {
      out.centroids.row(static_cast<Eigen::Index>(j)) /= static_cast<double>(sizes[j]);
    }

    const double current = total_wcss(y, out.labels, out.centroids);
    const double previous = out.wcss_trace.empty() ? current : out.wcss_trace.back();
    out.wcss_trace.push_back(current);
    out.iterations_used = iter + 1;
    if (!changed) break;
    if (iter > 0 && previous - current <= options.tolerance * previous) break;
  }
  out.wcss = out.wcss_trace.back();
  return out;
}

RoundResult kmeans_round(const DenseMatrix& y, std::size_t c, std::uint64_t round_seed,
                         const KMeansOptions& options) {
  RoundResult out;
  out.run_wcss.reserve(kRunsPerRound);
  for (std::size_t run = 0; run < kRunsPerRound; ++run) {
    ClusterAssignment result = kmeans(y, c, round_seed * kRunsPerRound + run, options);
    out.run_wcss.push_back(result.wcss);
    if (run == 0 || result.wcss < out.best.wcss) {
      out.best = std::move(result);
      out.best_run = run;
    }
  }
  return out;
}

std::vector<std::size_t> solve_assignment(const DenseMatrix& cost) {
  if (cost.rows() != cost.cols()) throw Error(ErrorCode::ShapeMismatch, "assignment cost must be square");
  require_finite(cost, "assignment cost");
  const auto n = static_cast<std::size_t>(cost.rows());
  // Shortest augmenting path formulation with potentials, 1-based internally.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  for (std::size_t row = 1; row <= n; ++row) {
    match[0] = row;
    std::size_t col0 = 0;
    std::vector<double> min_slack(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[col0] = true;
      const std::size_t row0 = match[col0];
      double delta = inf;
      std::size_t col1 = 0;
      for (std::size_t col = 1; col <= n; ++col) {
        if (used[col]) continue;
        const double slack = cost(static_cast<Eigen::Index>(row0 - 1), static_cast<Eigen::Index>(col - 1)) -
                             u[row0] - v[col];
        if (slack < min_slack[col]) {
          min_slack[col] = slack;
          way[col] = col0;
        }
        if (min_slack[col] < delta) {
          delta = min_slack[col];
          col1 = col;
        }
      }
      for (std::size_t col = 0; col <= n; ++col) {
        if (used[col]) {
          u[match[col]] += delta;
          v[col] -= delta;
        } else {
          min_slack[col] -= delta;
        }
      }
      col0 = col1;
    } while (match[col0] != 0);
    do {
      const std::size_t col1 = way[col0];
      match[col0] = match[col1];
      col0 = col1;
    } while (col0 != 0);
  }
  std::vector<std::size_t> assignment(n);
  for (std::size_t col = 1; col <= n; ++col) assignment[match[col] - 1] = col - 1;
  return assignment;
}

double accuracy(std::span<const std::size_t> assigned, std::span<const std::size_t> truth) {
  if (assigned.size() != truth.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(assigned.size()) + " assignments vs " +
                                               std::to_string(truth.size()) + " labels");
  }
  if (assigned.empty()) throw Error(ErrorCode::LengthMismatch, "no labels to score");
  const std::size_t clusters = *std::max_element(assigned.begin(), assigned.end()) + 1;
  const std::size_t classes = *std::max_element(truth.begin(), truth.end()) + 1;
  const auto dim = static_cast<Eigen::Index>(std::max(clusters, classes));

  DenseMatrix counts = DenseMatrix::Zero(dim, dim);
  for (std::size_t i = 0; i < assigned.size(); ++i) {
    counts(static_cast<Eigen::Index>(assigned[i]), static_cast<Eigen::Index>(truth[i])) += 1.0;
  }
  const DenseMatrix cost = DenseMatrix::Constant(dim, dim, counts.maxCoeff()) - counts;
  const auto assignment = solve_assignment(cost);
  double matched = 0.0;
  for (Eigen::Index r = 0; r < dim; ++r) matched += counts(r, static_cast<Eigen::Index>(assignment[static_cast<std::size_t>(r)]));
  return matched / static_cast<double>(assigned.size());
}

std::uint64_t derive_round_seed(std::uint64_t seed, std::size_t round) {
  std::uint64_t state = seed;
  return splitmix64(state) + round;
}

ClusterReport evaluate(const DenseMatrix& y, std::optional<std::span<const std::size_t>> truth,
                       std::size_t c, std::size_t rounds, std::uint64_t seed, const KMeansOptions& options) {
  if (rounds == 0) throw Error(ErrorCode::InvalidParams, "need at least one round");
  if (truth && truth->size() != static_cast<std::size_t>(y.rows())) {
    throw Error(ErrorCode::LengthMismatch, "label count differs from instance count");
  }
  const auto start = std::chrono::steady_clock::now();

  std::vector<RoundResult> results(rounds);
  parallel_for(rounds, [&](std::size_t r) {
    results[r] = kmeans_round(y, c, derive_round_seed(seed, r), options);
  });

  ClusterReport report;
  std::size_t best_round = 0;
  for (std::size_t r = 0; r < rounds; ++r) {
    report.round_wcss.push_back(results[r].best.wcss);
    if (results[r].best.wcss < results[best_round].best.wcss) best_round = r;
    if (truth) report.accuracies.push_back(accuracy(results[r].best.labels, *truth));
  }
  if (!report.accuracies.empty()) {
    double sum = 0.0;
    for (double a : report.accuracies) sum += a;
    report.average = sum / static_cast<double>(report.accuracies.size());
    report.maximum = *std::max_element(report.accuracies.begin(), report.accuracies.end());
  }
  report.best = std::move(results[best_round].best);
  report.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace adaam
