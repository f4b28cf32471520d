#include "lfsr/kd_tree.hpp"

#include <algorithm>
#include <numeric>

namespace lfsr {

namespace {

constexpr int kLeafSize = 8;

double box_sq_dist(const Point3& lo, const Point3& hi, const Point3& q) {
  double d = 0.0;
  for (int a = 0; a < 3; ++a) {
    double t = 0.0;
    if (q[a] < lo[a]) t = lo[a] - q[a];
    else if (q[a] > hi[a]) t = q[a] - hi[a];
    d += t * t;
  }
  return d;
}

}  // namespace

KdTree::KdTree(std::span<const Point3> points) : points_(points.begin(), points.end()) {
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0);
  nodes_.reserve(2 * points_.size() / kLeafSize + 2);
  if (!points_.empty()) build(0, static_cast<int>(points_.size()));
}

int KdTree::build(int begin, int end) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({});
  Point3 lo = Point3::Constant(std::numeric_limits<double>::infinity());
  Point3 hi = -lo;
  for (int i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  nodes_[id].lo = lo;
  nodes_[id].hi = hi;
  nodes_[id].begin = begin;
  nodes_[id].end = end;
  if (end - begin <= kLeafSize) return id;
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  const int mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](int a, int b) {
                     const double pa = points_[a][axis], pb = points_[b][axis];
                     return pa < pb || (pa == pb && a < b);
                   });
  const int left = build(begin, mid);
  const int right = build(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void KdTree::search(int node, const Point3& q, std::size_t k, std::vector<Neighbor>& heap) const {
  const Node& nd = nodes_[node];
  if (nd.left < 0) {
    for (int i = nd.begin; i < nd.end; ++i) {
      const int id = order_[i];
      const Neighbor cand{id, (points_[id] - q).squaredNorm()};
      if (heap.size() < k) {
        heap.push_back(cand);
        std::push_heap(heap.begin(), heap.end());
      } else if (cand < heap.front()) {
        std::pop_heap(heap.begin(), heap.end());
        heap.back() = cand;
        std::push_heap(heap.begin(), heap.end());
      }
    }
    return;
  }
  const Node& l = nodes_[nd.left];
  const Node& r = nodes_[nd.right];
  const double dl = box_sq_dist(l.lo, l.hi, q);
  const double dr = box_sq_dist(r.lo, r.hi, q);
  const int first = dl <= dr ? nd.left : nd.right;
  const int second = dl <= dr ? nd.right : nd.left;
  const double d_first = std::min(dl, dr), d_second = std::max(dl, dr);
  // equality is not pruned: an equidistant point may carry a smaller id
  if (heap.size() < k || d_first <= heap.front().sq_dist) search(first, q, k, heap);
  if (heap.size() < k || d_second <= heap.front().sq_dist) search(second, q, k, heap);
}

void KdTree::k_nearest(const Point3& q, int k, std::vector<Neighbor>& out) const {
  out.clear();
  if (points_.empty() || k <= 0) return;
  const std::size_t kk = std::min<std::size_t>(static_cast<std::size_t>(k), points_.size());
  out.reserve(kk);
  search(0, q, kk, out);
  std::sort_heap(out.begin(), out.end());
}

std::vector<Neighbor> KdTree::k_nearest(const Point3& q, int k) const {
  std::vector<Neighbor> out;
  k_nearest(q, k, out);
  return out;
}

Neighbor KdTree::nearest(const Point3& q) const {
  std::vector<Neighbor> out;
  k_nearest(q, 1, out);
  return out.empty() ? Neighbor{} : out.front();
}

void KdTree::search_radius(int node, const Point3& q, double sq_radius,
                           std::vector<Neighbor>& out) const {
  const Node& nd = nodes_[node];
  if (box_sq_dist(nd.lo, nd.hi, q) > sq_radius) return;
  if (nd.left < 0) {
    for (int i = nd.begin; i < nd.end; ++i) {
      const int id = order_[i];
      const double d = (points_[id] - q).squaredNorm();
      if (d <= sq_radius) out.push_back({id, d});
    }
    return;
  }
  search_radius(nd.left, q, sq_radius, out);
  search_radius(nd.right, q, sq_radius, out);
}

std::vector<Neighbor> KdTree::radius_search(const Point3& q, double radius) const {
  std::vector<Neighbor> out;
  if (!points_.empty()) search_radius(0, q, radius * radius, out);
  std::sort(out.begin(), out.end());
  return out;
}

KdTree build_index(const PointCloud& cloud) {
  if (cloud.empty()) throw InputError("cannot index an empty point cloud");
  return KdTree(cloud.points);
}

}  // namespace lfsr
