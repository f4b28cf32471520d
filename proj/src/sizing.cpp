#include "lfsr/sizing.hpp"

#include "lfsr/log.hpp"
#include "lfsr/parallel.hpp"

#include <algorithm>
#include <queue>

namespace lfsr {

double SizingFunction::operator()(const Point3& x) const {
  if (!index) throw ContractError("sizing function has no spatial index");
  return values[static_cast<std::size_t>(index->nearest(x).id)];
}

double SizingFunction::min() const { return *std::min_element(values.begin(), values.end()); }
double SizingFunction::max() const { return *std::max_element(values.begin(), values.end()); }

SizingFunction facet_sizing(const ScalarField& lfs, Reach reach, double size_max, double size_min_ratio,
                            const KdTree* index) {
  if (!(size_min_ratio > 0.0)) throw InputError("size_min ratio must be positive");
  SizingFunction s;
  s.index = index;
  s.size_min = size_min_ratio * reach.value;
  s.size_max = size_max;
  if (!(s.size_max >= s.size_min))
    throw InputError("size_max (" + std::to_string(size_max) + ") is below size_min (" +
                     std::to_string(s.size_min) + ")");
  const double lfs_max = lfs.max();
  s.values.resize(lfs.size());
  const double span = lfs_max - reach.value;
  if (!(span > 1e-12 * std::max(1.0, lfs_max))) {
    log_warn("LFS is constant; sizing falls back to size_min everywhere");
    std::fill(s.values.begin(), s.values.end(), s.size_min);
    return s;
  }
  for (std::size_t i = 0; i < lfs.size(); ++i) {
    const double t = (lfs.values[i] - reach.value) / span;
    s.values[i] = std::clamp(t * (s.size_max - s.size_min) + s.size_min, s.size_min, s.size_max);
  }
  return s;
}

KnnGraph build_knn_graph(const KdTree& index, int k, bool symmetrize) {
  KnnGraph g;
  const std::size_t n = index.size();
  g.adjacency.resize(n);
  parallel_for(n, [&](std::size_t i) {
    thread_local std::vector<Neighbor> nn;
    index.k_nearest(index.point(static_cast<int>(i)), k + 1, nn);
    for (const auto& q : nn)
      if (static_cast<std::size_t>(q.id) != i && g.adjacency[i].size() < static_cast<std::size_t>(k))
        g.adjacency[i].push_back(q.id);
  });
  if (symmetrize) {
    std::vector<std::vector<int>> sym = g.adjacency;
    for (std::size_t i = 0; i < n; ++i)
      for (int j : g.adjacency[i]) sym[static_cast<std::size_t>(j)].push_back(static_cast<int>(i));
    for (auto& a : sym) {
      std::sort(a.begin(), a.end());
      a.erase(std::unique(a.begin(), a.end()), a.end());
    }
    g.adjacency = std::move(sym);
  }
  return g;
}

SizingFunction smooth_sizing(SizingFunction sizing, const KnnGraph& graph, std::span<const Point3> points) {
  const std::size_t n = sizing.values.size();
  if (graph.adjacency.size() != n || points.size() != n) throw ContractError("sizing/graph size mismatch");
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> queue;
  for (std::size_t i = 0; i < n; ++i) queue.emplace(sizing.values[i], static_cast<int>(i));
  std::vector<char> settled(n, 0);
  while (!queue.empty()) {
    const auto [value, p] = queue.top();
    queue.pop();
    if (settled[static_cast<std::size_t>(p)] || value != sizing.values[static_cast<std::size_t>(p)]) continue;
    settled[static_cast<std::size_t>(p)] = 1;
    for (int q : graph.adjacency[static_cast<std::size_t>(p)]) {
      if (settled[static_cast<std::size_t>(q)]) continue;
      const double bound = value + (points[static_cast<std::size_t>(q)] - points[static_cast<std::size_t>(p)]).norm();
      if (sizing.values[static_cast<std::size_t>(q)] > bound) {
        sizing.values[static_cast<std::size_t>(q)] = bound;
        queue.emplace(bound, q);
      }
    }
  }
  return sizing;
}

}  // namespace lfsr
