#pragma once

#include "lfsr/lfs_field.hpp"

#include <vector>

namespace lfsr {

// Per-point facet sizes; at an arbitrary x the value of the nearest sample.
struct SizingFunction {
  double size_min = 0.0;
  double size_max = 0.0;
  std::vector<double> values;
  const KdTree* index = nullptr;

  double operator()(const Point3& x) const;
  double min() const;
  double max() const;
};

// size = (lfs - I_R) / (lfs_max - I_R) (size_max - size_min) + size_min with
// size_min = ratio * I_R; a constant lfs gives size_min everywhere.
SizingFunction facet_sizing(const ScalarField& lfs, Reach reach, double size_max, double size_min_ratio,
                            const KdTree* index = nullptr);

struct KnnGraph {
  std::vector<std::vector<int>> adjacency;
};

// k nearest neighbors (self excluded); symmetrize adds reverse edges
KnnGraph build_knn_graph(const KdTree& index, int k, bool symmetrize = true);

// Dijkstra-style clamp: pops the smallest unsettled size and lowers every
// unsettled neighbor q to size(p) + |p - q| when it exceeds that bound.
SizingFunction smooth_sizing(SizingFunction sizing, const KnnGraph& graph, std::span<const Point3> points);

}  // namespace lfsr
