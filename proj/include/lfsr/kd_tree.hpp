#pragma once

#include "lfsr/point_cloud.hpp"

#include <cmath>
#include <span>
#include <vector>

namespace lfsr {

struct Neighbor {
  int id = -1;
  double sq_dist = 0.0;

  double dist() const { return std::sqrt(sq_dist); }
  // ordering used everywhere: distance first, then id
  friend bool operator<(const Neighbor& a, const Neighbor& b) {
    return a.sq_dist < b.sq_dist || (a.sq_dist == b.sq_dist && a.id < b.id);
  }
};

// Static kd-tree. Queries are exact: results equal a brute-force scan with
// ties broken by ascending id.
class KdTree {
public:
  KdTree() = default;
  explicit KdTree(std::span<const Point3> points);

  std::size_t size() const { return points_.size(); }
  const Point3& point(int id) const { return points_[static_cast<std::size_t>(id)]; }
  std::span<const Point3> points() const { return points_; }

  // min(k, N) neighbors sorted by (distance, id)
  std::vector<Neighbor> k_nearest(const Point3& q, int k) const;
  void k_nearest(const Point3& q, int k, std::vector<Neighbor>& out) const;
  Neighbor nearest(const Point3& q) const;
  // all points with |p - q| <= radius, sorted
  std::vector<Neighbor> radius_search(const Point3& q, double radius) const;

private:
  struct Node {
    Point3 lo, hi;
    int begin = 0, end = 0;  // range in order_
    int left = -1, right = -1;
  };

  int build(int begin, int end);
  void search(int node, const Point3& q, std::size_t k, std::vector<Neighbor>& heap) const;
  void search_radius(int node, const Point3& q, double sq_radius, std::vector<Neighbor>& out) const;

  std::vector<Point3> points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
};

using SpatialIndex = KdTree;

// throws InputError on an empty cloud
KdTree build_index(const PointCloud& cloud);

}  // namespace lfsr
