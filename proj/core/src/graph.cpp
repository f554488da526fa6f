#include "adaam/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <string>
#include <utility>

#include "adaam/error.hpp"
#include "adaam/parallel.hpp"

namespace adaam {

SparseAffinity::SparseAffinity(std::size_t n) : n_(n), diagonal_(Vector::Zero(static_cast<Eigen::Index>(n))) {}

SparseAffinity::SparseAffinity(std::size_t n, std::vector<AffinityEntry> entries, Vector diagonal)
    : n_(n), diagonal_(std::move(diagonal)) {
  if (diagonal_.size() == 0 && n > 0) diagonal_ = Vector::Zero(static_cast<Eigen::Index>(n));
  if (static_cast<std::size_t>(diagonal_.size()) != n) {
    throw Error(ErrorCode::ShapeMismatch, "diagonal length differs from affinity size");
  }
  if (!diagonal_.allFinite()) throw Error(ErrorCode::NonFinite, "affinity diagonal");

  entries_.reserve(entries.size());
  for (auto e : entries) {
    if (e.i >= n || e.j >= n) throw Error(ErrorCode::ShapeMismatch, "affinity index out of range");
    if (e.i == e.j) throw Error(ErrorCode::InvalidParams, "diagonal weight passed as an entry");
    if (!std::isfinite(e.weight)) throw Error(ErrorCode::NonFinite, "affinity weight");
    if (e.weight == 0.0) continue;
    if (e.i > e.j) std::swap(e.i, e.j);
    entries_.push_back(e);
  }
  std::sort(entries_.begin(), entries_.end(), [](const AffinityEntry& a, const AffinityEntry& b) {
    return std::pair(a.i, a.j) < std::pair(b.i, b.j);
  });
  const auto dup = std::adjacent_find(entries_.begin(), entries_.end(),
                                      [](const AffinityEntry& a, const AffinityEntry& b) {
                                        return a.i == b.i && a.j == b.j;
                                      });
  if (dup != entries_.end()) {
    throw Error(ErrorCode::InvalidParams,
                "duplicate pair (" + std::to_string(dup->i) + ", " + std::to_string(dup->j) + ")");
  }
}

std::size_t SparseAffinity::nonzeros() const noexcept {
  std::size_t count = 2 * entries_.size();
  for (Eigen::Index i = 0; i < diagonal_.size(); ++i) {
    if (diagonal_[i] != 0.0) ++count;
  }
  return count;
}

Vector SparseAffinity::row_sums() const {
  Vector sums = diagonal_;
  for (const auto& e : entries_) {
    sums[static_cast<Eigen::Index>(e.i)] += e.weight;
    sums[static_cast<Eigen::Index>(e.j)] += e.weight;
  }
  return sums;
}

DenseMatrix SparseAffinity::multiply(const DenseMatrix& y) const {
  if (static_cast<std::size_t>(y.rows()) != n_) {
    throw Error(ErrorCode::ShapeMismatch, "operand rows differ from affinity size");
  }
  DenseMatrix out = diagonal_.asDiagonal() * y;
  for (const auto& e : entries_) {
    const auto i = static_cast<Eigen::Index>(e.i);
    const auto j = static_cast<Eigen::Index>(e.j);
    out.row(i) += e.weight * y.row(j);
    out.row(j) += e.weight * y.row(i);
  }
  return out;
}

DenseMatrix SparseAffinity::to_dense() const {
  const auto n = static_cast<Eigen::Index>(n_);
  DenseMatrix dense = DenseMatrix::Zero(n, n);
  dense.diagonal() = diagonal_;
  for (const auto& e : entries_) {
    dense(static_cast<Eigen::Index>(e.i), static_cast<Eigen::Index>(e.j)) = e.weight;
    dense(static_cast<Eigen::Index>(e.j), static_cast<Eigen::Index>(e.i)) = e.weight;
  }
  return dense;
}

SparseAffinity SparseAffinity::plus_diagonal(const Vector& extra) const {
  if (static_cast<std::size_t>(extra.size()) != n_) {
    throw Error(ErrorCode::ShapeMismatch, "diagonal increment length");
  }
  SparseAffinity out = *this;
  out.diagonal_ += extra;
  if (!out.diagonal_.allFinite()) throw Error(ErrorCode::NonFinite, "affinity diagonal");
  return out;
}

HeatKernelGraph knn_heat_kernel(const DenseMatrix& x, std::size_t k, const HeatKernelOptions& options) {
  require_finite(x, "heat kernel input");
  const auto n = static_cast<std::size_t>(x.rows());
  if (k == 0 || k >= n) {
    throw Error(ErrorCode::KTooLarge,
                "k = " + std::to_string(k) + " must lie in [1, n) with n = " + std::to_string(n));
  }
  if (options.bandwidth && !(*options.bandwidth > 0.0 && std::isfinite(*options.bandwidth))) {
    throw Error(ErrorCode::InvalidParams, "bandwidth must be positive");
  }

  auto squared_distance = [&](std::size_t a, std::size_t b) {
    return (x.row(static_cast<Eigen::Index>(a)) - x.row(static_cast<Eigen::Index>(b))).squaredNorm();
  };

  std::vector<std::vector<std::size_t>> neighbours(n);
  parallel_for(n, [&](std::size_t i) {
    std::vector<std::pair<double, std::size_t>> row;
    row.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) row.emplace_back(squared_distance(i, j), j);
    }
    std::partial_sort(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k), row.end());
    auto& out = neighbours[i];
    out.reserve(k);
    for (std::size_t r = 0; r < k; ++r) out.push_back(row[r].second);
  });

  std::vector<std::pair<std::size_t, std::size_t>> edges;
  edges.reserve(n * k);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j : neighbours[i]) edges.emplace_back(std::min(i, j), std::max(i, j));
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  std::vector<double> argument(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const double sq = squared_distance(edges[e].first, edges[e].second);
    argument[e] = options.squared ? sq : std::sqrt(sq);
  }

  HeatKernelGraph graph;
  if (options.bandwidth) {
    graph.bandwidth = *options.bandwidth;
  } else {
    const double total = std::accumulate(argument.begin(), argument.end(), 0.0);
    graph.bandwidth = total / static_cast<double>(argument.size());
    if (!(graph.bandwidth > 0.0)) {
      throw Error(ErrorCode::DegenerateData,
                  "all neighbour distances are zero; supply an explicit bandwidth");
    }
  }

  std::vector<AffinityEntry> entries;
  entries.reserve(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    entries.push_back({edges[e].first, edges[e].second, std::exp(-argument[e] / graph.bandwidth)});
  }
  graph.affinity = SparseAffinity(n, std::move(entries), Vector::Zero(static_cast<Eigen::Index>(n)));
  return graph;
}

Vector degree(const SparseAffinity& affinity) { return affinity.row_sums(); }

DenseMatrix laplacian_quadratic(const SparseAffinity& affinity, const DenseMatrix& y) {
  if (static_cast<std::size_t>(y.rows()) != affinity.size()) {
    throw Error(ErrorCode::ShapeMismatch, "operand rows differ from affinity size");
  }
  // (L y)_i = sum_j w_ij (y_i - y_j); diagonal weights cancel exactly.
  DenseMatrix ly = DenseMatrix::Zero(y.rows(), y.cols());
  for (const auto& e : affinity.entries()) {
    const auto i = static_cast<Eigen::Index>(e.i);
    const auto j = static_cast<Eigen::Index>(e.j);
    const auto diff = (y.row(i) - y.row(j)).eval();
    ly.row(i) += e.weight * diff;
    ly.row(j) -= e.weight * diff;
  }
  return symmetrized(y.transpose() * ly);
}

std::size_t sparsify_budget(std::size_t n, std::size_t c, double alpha) {
  if (c == 0 || !(alpha > 0.0) || !std::isfinite(alpha)) {
    throw Error(ErrorCode::InvalidParams, "sparsification needs c >= 1 and alpha > 0");
  }
  const long double grid = static_cast<long double>(n) * static_cast<long double>(n);
  const long double denom = static_cast<long double>(alpha) * static_cast<long double>(c);
  auto budget = static_cast<std::size_t>(std::floor(grid / denom));
  // Guard against the quotient landing just below an integer.
  while (static_cast<long double>(budget + 1) * denom <= grid) ++budget;
  while (budget > 0 && static_cast<long double>(budget) * denom > grid) --budget;
  return budget;
}

namespace {

struct Candidate {
  double magnitude;
  std::size_t i;
  std::size_t j;
  double value;

  std::size_t cost() const noexcept { return i == j ? 1 : 2; }
};

// Strict ranking: larger magnitude first, then lexicographic (i, j).
bool ranks_before(const Candidate& a, const Candidate& b) noexcept {
  if (a.magnitude != b.magnitude) return a.magnitude > b.magnitude;
  if (a.i != b.i) return a.i < b.i;
  return a.j < b.j;
}

// Keeps the best-ranked candidates whose grid cost first reaches the budget;
// the weakest member sits on top of the heap.
class TopSelector {
 public:
  explicit TopSelector(std::size_t budget) : budget_(budget) {}

  void offer(const Candidate& c) {
    if (c.magnitude == 0.0) return;
    if (budget_ == 0) return;
    // Already full and c ranks below the weakest member: it would be evicted.
    if (total_ >= budget_ && ranks_before(heap_.top(), c)) return;
    heap_.push(c);
    total_ += c.cost();
    while (!heap_.empty() && total_ - heap_.top().cost() >= budget_) {
      total_ -= heap_.top().cost();
      heap_.pop();
    }
  }

  std::vector<Candidate> take() {
    std::vector<Candidate> all;
    all.reserve(heap_.size());
    while (!heap_.empty()) {
      all.push_back(heap_.top());
      heap_.pop();
    }
    std::sort(all.begin(), all.end(), ranks_before);
    std::vector<Candidate> kept;
    std::size_t used = 0;
    for (const auto& c : all) {
      if (used + c.cost() > budget_) break;
      used += c.cost();
      kept.push_back(c);
    }
    total_ = 0;
    return kept;
  }

 private:
  struct WorstOnTop {
    bool operator()(const Candidate& a, const Candidate& b) const noexcept { return ranks_before(a, b); }
  };

  std::size_t budget_;
  std::size_t total_ = 0;
  std::priority_queue<Candidate, std::vector<Candidate>, WorstOnTop> heap_;
};

SparsifyResult assemble(std::size_t n, std::size_t budget, std::vector<Candidate> kept) {
  SparsifyResult result;
  result.budget = budget;
  result.budget_too_small = budget < n;
  Vector diagonal = Vector::Zero(static_cast<Eigen::Index>(n));
  std::vector<AffinityEntry> entries;
  entries.reserve(kept.size());
  for (const auto& c : kept) {
    result.kept += c.cost();
    if (c.i == c.j) {
      diagonal[static_cast<Eigen::Index>(c.i)] = c.value;
    } else {
      entries.push_back({c.i, c.j, c.value});
    }
  }
  result.affinity = SparseAffinity(n, std::move(entries), std::move(diagonal));
  return result;
}

}  // namespace

SparsifyResult sparsify_top_t(const SparseAffinity& affinity, std::size_t c, const SparsifyOptions& options) {
  const std::size_t n = affinity.size();
  const std::size_t budget = sparsify_budget(n, c, options.alpha);
  TopSelector selector(budget);
  if (options.include_diagonal) {
    for (std::size_t i = 0; i < n; ++i) {
      const double v = affinity.diagonal()[static_cast<Eigen::Index>(i)];
      selector.offer({std::abs(v), i, i, v});
    }
  }
  for (const auto& e : affinity.entries()) selector.offer({std::abs(e.weight), e.i, e.j, e.weight});
  return assemble(n, budget, selector.take());
}

SparsifyResult sparsify_low_rank(const DenseMatrix& factor, std::size_t c, const SparsifyOptions& options) {
  require_finite(factor, "low-rank factor");
  const auto n = static_cast<std::size_t>(factor.rows());
  const std::size_t budget = sparsify_budget(n, c, options.alpha);
  TopSelector selector(budget);

  constexpr Eigen::Index kBlock = 256;
  const DenseMatrix factor_t = factor.transpose();
  for (Eigen::Index start = 0; start < factor.rows(); start += kBlock) {
    const Eigen::Index len = std::min(kBlock, factor.rows() - start);
    const DenseMatrix block = factor.middleRows(start, len) * factor_t;
    for (Eigen::Index r = 0; r < len; ++r) {
      const auto i = static_cast<std::size_t>(start + r);
      const std::size_t first = options.include_diagonal ? i : i + 1;
      for (std::size_t j = first; j < n; ++j) {
        const double v = block(r, static_cast<Eigen::Index>(j));
        selector.offer({std::abs(v), i, j, v});
      }
    }
  }
  return assemble(n, budget, selector.take());
}

}  // namespace adaam
