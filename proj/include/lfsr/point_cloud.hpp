#pragma once

#include "lfsr/types.hpp"

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace lfsr {

// Input samples. Point ids are the positions 0..N-1; normals are optional
// and unoriented.
struct PointCloud {
  std::vector<Point3> points;
  std::vector<Vector3> normals;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_normals() const { return !normals.empty(); }

  // throws InputError on empty clouds, non-finite coordinates, or
  // normals of the wrong count or length
  void validate() const;
};

struct BoundingSphere {
  Point3 center = Point3::Zero();
  double radius = 0.0;

  double diameter() const { return 2.0 * radius; }
  bool contains(const Point3& p) const { return (p - center).norm() <= radius; }
};

// centroid c and r = 2 max |p - c|, which bounds the max pairwise distance
BoundingSphere loose_bounding_sphere(std::span<const Point3> points);

struct Aabb {
  Point3 min = Point3::Constant(std::numeric_limits<double>::infinity());
  Point3 max = Point3::Constant(-std::numeric_limits<double>::infinity());

  void extend(const Point3& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }
  Vector3 extent() const { return max - min; }
  double max_edge() const { return extent().maxCoeff(); }
};

Aabb bounding_box(std::span<const Point3> points);

}  // namespace lfsr
