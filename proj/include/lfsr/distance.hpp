#pragma once

#include "lfsr/kd_tree.hpp"

namespace lfsr {

// d_u(x) = min_p |x - p|, 1-Lipschitz
double unsigned_distance(const KdTree& index, const Point3& x);

// sqrt of the mean squared distance to the k nearest samples; k is clamped
// to the cloud size with a warning
double robust_distance(const KdTree& index, const Point3& x, int k);

// min over input points of robust_distance(p, k)
double epsilon_threshold(const KdTree& index, int k);

}  // namespace lfsr
