#include "lfsr/metrics.hpp"

#include "lfsr/log.hpp"
#include "lfsr/parallel.hpp"
#include "lfsr/predicates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <ostream>

namespace lfsr {

namespace {

constexpr int kLeafSize = 4;

double box_sq_dist(const Point3& q, const Point3& lo, const Point3& hi) {
  double d = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double e = std::max({lo[k] - q[k], 0.0, q[k] - hi[k]});
    d += e * e;
  }
  return d;
}

}  // namespace

Point3 closest_point_on_triangle(const Point3& p, const Point3& a, const Point3& b, const Point3& c) {
  const Vector3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;
  const Vector3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + (d1 / (d1 - d3)) * ab;
  const Vector3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + (d2 / (d2 - d6)) * ac;
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0)
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
  const double denom = 1.0 / (va + vb + vc);
  if (!std::isfinite(denom)) {
    // degenerate triangle: closest point on its edges
    Point3 best = a;
    double bd = (p - a).squaredNorm();
    for (auto [s, t] : {std::pair{a, b}, std::pair{b, c}, std::pair{c, a}}) {
      const Vector3 e = t - s;
      const double l2 = e.squaredNorm();
      const double u = l2 > 0.0 ? std::clamp((p - s).dot(e) / l2, 0.0, 1.0) : 0.0;
      const Point3 x = s + u * e;
      if ((p - x).squaredNorm() < bd) bd = (p - x).squaredNorm(), best = x;
    }
    return best;
  }
  return a + ab * (vb * denom) + ac * (vc * denom);
}

TriangleBvh::TriangleBvh(const TriangleMesh& mesh) : mesh_(mesh) {
  const std::size_t n = mesh.triangles.size();
  lo_.resize(n);
  hi_.resize(n);
  centroid_.resize(n);
  order_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& t = mesh.triangles[i];
    const Point3 &a = mesh.vertices[t[0]], &b = mesh.vertices[t[1]], &c = mesh.vertices[t[2]];
    lo_[i] = a.cwiseMin(b).cwiseMin(c);
    hi_[i] = a.cwiseMax(b).cwiseMax(c);
    centroid_[i] = (a + b + c) / 3.0;
    order_[i] = static_cast<int>(i);
  }
  if (n > 0) {
    nodes_.reserve(2 * n / kLeafSize + 2);
    build(0, static_cast<int>(n));
  }
}

int TriangleBvh::build(int begin, int end) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  Point3 lo = Point3::Constant(std::numeric_limits<double>::infinity()), hi = -lo;
  for (int i = begin; i < end; ++i) {
    lo = lo.cwiseMin(lo_[order_[i]]);
    hi = hi.cwiseMax(hi_[order_[i]]);
  }
  nodes_[id].lo = lo;
  nodes_[id].hi = hi;
  nodes_[id].begin = begin;
  nodes_[id].end = end;
  if (end - begin <= kLeafSize) return id;
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  const int mid = (begin + end) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end, [&](int a, int b) {
    const double ca = centroid_[a][axis], cb = centroid_[b][axis];
    return ca < cb || (ca == cb && a < b);
  });
  const int l = build(begin, mid);
  const int r = build(mid, end);
  nodes_[id].left = l;
  nodes_[id].right = r;
  return id;
}

double TriangleBvh::closest(const Point3& q, Point3* closest_point, int* triangle) const {
  double best = std::numeric_limits<double>::infinity();
  int best_t = -1;
  Point3 best_p = q;
  if (nodes_.empty()) return best;
  std::vector<std::pair<double, int>> stack;
  stack.emplace_back(box_sq_dist(q, nodes_[0].lo, nodes_[0].hi), 0);
  while (!stack.empty()) {
    const auto [d, id] = stack.back();
    stack.pop_back();
    if (d > best) continue;
    const Node& node = nodes_[id];
    if (node.left < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        const int t = order_[i];
        const auto& tri = mesh_.triangles[t];
        const Point3 x = closest_point_on_triangle(q, mesh_.vertices[tri[0]], mesh_.vertices[tri[1]],
                                                   mesh_.vertices[tri[2]]);
        const double e = (x - q).squaredNorm();
        if (e < best || (e == best && t < best_t)) best = e, best_t = t, best_p = x;
      }
      continue;
    }
    const double dl = box_sq_dist(q, nodes_[node.left].lo, nodes_[node.left].hi);
    const double dr = box_sq_dist(q, nodes_[node.right].lo, nodes_[node.right].hi);
    // push the farther child first so the nearer one is visited next
    if (dl <= dr) {
      stack.emplace_back(dr, node.right);
      stack.emplace_back(dl, node.left);
    } else {
      stack.emplace_back(dl, node.left);
      stack.emplace_back(dr, node.right);
    }
  }
  if (closest_point) *closest_point = best_p;
  if (triangle) *triangle = best_t;
  return best;
}

void TriangleBvh::overlapping(const Point3& lo, const Point3& hi, std::vector<int>& out) const {
  out.clear();
  if (nodes_.empty()) return;
  auto overlap = [&](const Point3& a, const Point3& b) {
    return (a.array() <= hi.array()).all() && (lo.array() <= b.array()).all();
  };
  std::vector<int> stack = {0};
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if (!overlap(node.lo, node.hi)) continue;
    if (node.left < 0) {
      for (int i = node.begin; i < node.end; ++i)
        if (overlap(lo_[order_[i]], hi_[order_[i]])) out.push_back(order_[i]);
      continue;
    }
    stack.push_back(node.left);
    stack.push_back(node.right);
  }
  std::sort(out.begin(), out.end());
}

DistanceStats point_to_mesh_distances(std::span<const Point3> points, const TriangleMesh& mesh) {
  if (points.empty() || mesh.triangles.empty()) throw InputError("distance evaluation needs points and triangles");
  const TriangleBvh bvh(mesh);
  std::vector<double> d(points.size());
  parallel_for(points.size(), [&](std::size_t i) { d[i] = std::sqrt(bvh.closest(points[i])); });
  DistanceStats s;
  // sequential sum keeps the result independent of the thread count
  for (double x : d) {
    s.chamfer += x;
    s.hausdorff = std::max(s.hausdorff, x);
  }
  s.chamfer /= static_cast<double>(d.size());
  return s;
}

namespace {

using EdgeKey = std::pair<int, int>;

std::map<EdgeKey, std::vector<int>> edge_faces(const TriangleMesh& mesh) {
  std::map<EdgeKey, std::vector<int>> edges;
  for (std::size_t f = 0; f < mesh.triangles.size(); ++f)
    for (int k = 0; k < 3; ++k) {
      int a = mesh.triangles[f][k], b = mesh.triangles[f][(k + 1) % 3];
      if (a > b) std::swap(a, b);
      edges[{a, b}].push_back(static_cast<int>(f));
    }
  return edges;
}

// true when face f traverses the directed edge a -> b
bool has_directed(const std::array<int, 3>& t, int a, int b) {
  for (int k = 0; k < 3; ++k)
    if (t[k] == a && t[(k + 1) % 3] == b) return true;
  return false;
}

struct UnionFind {
  std::vector<int> p;
  explicit UnionFind(std::size_t n) : p(n) { std::iota(p.begin(), p.end(), 0); }
  int find(int x) {
    while (p[x] != x) x = p[x] = p[p[x]];
    return x;
  }
  void unite(int a, int b) {
    a = find(a), b = find(b);
    if (a != b) p[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

EdgeStats edge_stats(const TriangleMesh& mesh) {
  EdgeStats s;
  const auto edges = edge_faces(mesh);
  s.edges = edges.size();
  for (const auto& [e, fs] : edges) {
    if (fs.size() == 1) ++s.boundary_edges;
    else if (fs.size() > 2) ++s.nonmanifold_edges;
    else if (has_directed(mesh.triangles[fs[0]], e.first, e.second) ==
             has_directed(mesh.triangles[fs[1]], e.first, e.second))
      ++s.inconsistent_orientation;
  }
  // vertex umbrellas: faces around a vertex must be edge-connected
  std::vector<std::vector<int>> vf(mesh.vertices.size());
  for (std::size_t f = 0; f < mesh.triangles.size(); ++f)
    for (int v : mesh.triangles[f]) vf[v].push_back(static_cast<int>(f));
  for (std::size_t v = 0; v < vf.size(); ++v) {
    const auto& fs = vf[v];
    if (fs.size() < 2) continue;
    UnionFind uf(fs.size());
    // faces sharing a second vertex with each other around v
    std::map<int, int> first_with;
    for (std::size_t i = 0; i < fs.size(); ++i)
      for (int w : mesh.triangles[fs[i]]) {
        if (w == static_cast<int>(v)) continue;
        auto [it, fresh] = first_with.emplace(w, static_cast<int>(i));
        if (!fresh) uf.unite(it->second, static_cast<int>(i));
      }
    for (std::size_t i = 1; i < fs.size(); ++i)
      if (uf.find(static_cast<int>(i)) != uf.find(0)) {
        ++s.nonmanifold_vertices;
        break;
      }
  }
  return s;
}

bool is_manifold(const TriangleMesh& mesh) {
  const EdgeStats s = edge_stats(mesh);
  return s.nonmanifold_edges == 0 && s.nonmanifold_vertices == 0;
}

bool is_watertight(const TriangleMesh& mesh) {
  if (mesh.triangles.empty()) return false;
  const EdgeStats s = edge_stats(mesh);
  return s.nonmanifold_edges == 0 && s.nonmanifold_vertices == 0 && s.boundary_edges == 0;
}

Topology topology(const TriangleMesh& mesh) {
  const EdgeStats es = edge_stats(mesh);
  if (es.nonmanifold_edges > 0 || es.nonmanifold_vertices > 0)
    throw ValidityError("topology needs a manifold mesh (" + std::to_string(es.nonmanifold_edges) +
                        " non-manifold edges, " + std::to_string(es.nonmanifold_vertices) +
                        " non-manifold vertices)");
  const std::size_t nf = mesh.triangles.size();
  UnionFind uf(nf);
  const auto edges = edge_faces(mesh);
  for (const auto& [e, fs] : edges)
    for (std::size_t k = 1; k < fs.size(); ++k) uf.unite(fs[0], fs[k]);
  std::map<int, int> comp_id;
  for (std::size_t f = 0; f < nf; ++f) comp_id.emplace(uf.find(static_cast<int>(f)), 0);
  int next = 0;
  for (auto& [root, id] : comp_id) id = next++;
  std::vector<long> V(next, 0), E(next, 0), F(next, 0);
  std::vector<bool> open(next, false);
  for (std::size_t f = 0; f < nf; ++f) ++F[comp_id[uf.find(static_cast<int>(f))]];
  for (const auto& [e, fs] : edges) {
    const int c = comp_id[uf.find(fs[0])];
    ++E[c];
    if (fs.size() == 1) open[c] = true;
  }
  std::vector<int> vcomp(mesh.vertices.size(), -1);
  for (std::size_t f = 0; f < nf; ++f)
    for (int v : mesh.triangles[f]) vcomp[v] = comp_id[uf.find(static_cast<int>(f))];
  for (int c : vcomp)
    if (c >= 0) ++V[c];
  Topology t;
  t.components = next;
  for (int c = 0; c < next; ++c) {
    const long chi = V[c] - E[c] + F[c];
    t.genus.push_back(open[c] ? -1 : static_cast<int>((2 - chi) / 2));
  }
  return t;
}

std::vector<std::size_t> angle_histogram(const TriangleMesh& mesh, int bins) {
  std::vector<std::size_t> h(static_cast<std::size_t>(bins), 0);
  for (const auto& t : mesh.triangles)
    for (int k = 0; k < 3; ++k) {
      const Point3& p = mesh.vertices[t[k]];
      const Vector3 u = mesh.vertices[t[(k + 1) % 3]] - p, v = mesh.vertices[t[(k + 2) % 3]] - p;
      const double deg = std::atan2(u.cross(v).norm(), u.dot(v)) * 180.0 / std::numbers::pi;
      const int b = std::clamp(static_cast<int>(deg / 180.0 * bins), 0, bins - 1);
      ++h[static_cast<std::size_t>(b)];
    }
  return h;
}

double min_angle_deg(const TriangleMesh& mesh) {
  double m = 180.0;
  for (const auto& t : mesh.triangles)
    for (int k = 0; k < 3; ++k) {
      const Point3& p = mesh.vertices[t[k]];
      const Vector3 u = mesh.vertices[t[(k + 1) % 3]] - p, v = mesh.vertices[t[(k + 2) % 3]] - p;
      m = std::min(m, std::atan2(u.cross(v).norm(), u.dot(v)) * 180.0 / std::numbers::pi);
    }
  return m;
}

std::vector<double> facet_areas(const TriangleMesh& mesh) {
  std::vector<double> a;
  a.reserve(mesh.triangles.size());
  for (const auto& t : mesh.triangles)
    a.push_back(0.5 * (mesh.vertices[t[1]] - mesh.vertices[t[0]]).cross(mesh.vertices[t[2]] - mesh.vertices[t[0]]).norm());
  return a;
}

namespace {

struct P2 {
  double x, y;
};

int o2(const P2& a, const P2& b, const P2& c) { return orient2d(a.x, a.y, b.x, b.y, c.x, c.y); }

bool on_segment_2d(const P2& a, const P2& b, const P2& p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

// closed segment intersection
bool segments_2d(const P2& a, const P2& b, const P2& c, const P2& d) {
  const int d1 = o2(c, d, a), d2 = o2(c, d, b), d3 = o2(a, b, c), d4 = o2(a, b, d);
  if (d1 * d2 < 0 && d3 * d4 < 0) return true;
  if (d1 == 0 && on_segment_2d(c, d, a)) return true;
  if (d2 == 0 && on_segment_2d(c, d, b)) return true;
  if (d3 == 0 && on_segment_2d(a, b, c)) return true;
  if (d4 == 0 && on_segment_2d(a, b, d)) return true;
  return false;
}

// closed point-in-triangle
bool in_triangle_2d(const P2& p, const P2& a, const P2& b, const P2& c) {
  const int s1 = o2(a, b, p), s2 = o2(b, c, p), s3 = o2(c, a, p);
  const bool neg = s1 < 0 || s2 < 0 || s3 < 0, pos = s1 > 0 || s2 > 0 || s3 > 0;
  return !(neg && pos);
}

struct Projector {
  int i, j;
  explicit Projector(const std::array<Point3, 3>& t) {
    const Vector3 n = (t[1] - t[0]).cross(t[2] - t[0]);
    int k = 0;
    n.cwiseAbs().maxCoeff(&k);
    i = (k + 1) % 3;
    j = (k + 2) % 3;
  }
  P2 operator()(const Point3& p) const { return {p[i], p[j]}; }
};

bool segment_triangle_2d(const P2& p, const P2& q, const P2& a, const P2& b, const P2& c) {
  return in_triangle_2d(p, a, b, c) || in_triangle_2d(q, a, b, c) || segments_2d(p, q, a, b) ||
         segments_2d(p, q, b, c) || segments_2d(p, q, c, a);
}

// closed segment-triangle intersection in 3D
bool segment_triangle(const Point3& p, const Point3& q, const std::array<Point3, 3>& t) {
  const int s1 = orient3d(t[0], t[1], t[2], p), s2 = orient3d(t[0], t[1], t[2], q);
  if (s1 * s2 > 0) return false;
  if (s1 == 0 && s2 == 0) {
    const Projector pr(t);
    return segment_triangle_2d(pr(p), pr(q), pr(t[0]), pr(t[1]), pr(t[2]));
  }
  const int o1 = orient3d(p, q, t[0], t[1]), o2v = orient3d(p, q, t[1], t[2]), o3 = orient3d(p, q, t[2], t[0]);
  const bool neg = o1 < 0 || o2v < 0 || o3 < 0, pos = o1 > 0 || o2v > 0 || o3 > 0;
  return !(neg && pos);
}

bool coplanar(const std::array<Point3, 3>& t, const std::array<Point3, 3>& u) {
  for (const Point3& p : u)
    if (orient3d(t[0], t[1], t[2], p) != 0) return false;
  return true;
}

}  // namespace

bool triangles_intersect(const std::array<Point3, 3>& t_in, const std::array<Point3, 3>& u_in) {
  std::array<Point3, 3> t = t_in, u = u_in;
  // move shared vertices to the front of both triangles
  int shared = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = shared; j < 3; ++j)
      if (t[i] == u[j] && i >= shared) {
        std::swap(t[shared], t[i]);
        std::swap(u[shared], u[j]);
        ++shared;
        break;
      }
  if (shared == 3) return true;
  if (shared == 2) {
    if (!coplanar(t, u)) return false;
    const Projector pr(t);
    const int sa = o2(pr(t[0]), pr(t[1]), pr(t[2])), sb = o2(pr(u[0]), pr(u[1]), pr(u[2]));
    return sa == sb;  // folded onto the same side
  }
  if (shared == 1) {
    if (!coplanar(t, u)) return segment_triangle(t[1], t[2], u) || segment_triangle(u[1], u[2], t);
    const Projector pr(t);
    const P2 a = pr(t[0]), b = pr(t[1]), c = pr(t[2]), d = pr(u[1]), e = pr(u[2]);
    const P2 v = a;
    // anything beyond the common vertex
    auto in_closed_minus_v = [&](const P2& p, const P2& x, const P2& y) { return in_triangle_2d(p, v, x, y); };
    if (in_closed_minus_v(b, d, e) || in_closed_minus_v(c, d, e) || in_closed_minus_v(d, b, c) ||
        in_closed_minus_v(e, b, c))
      return true;
    return segments_2d(b, c, d, e) || segments_2d(b, c, v, d) || segments_2d(b, c, v, e) ||
           segments_2d(d, e, v, b) || segments_2d(d, e, v, c);
  }
  if (!coplanar(t, u)) {
    for (int k = 0; k < 3; ++k)
      if (segment_triangle(t[k], t[(k + 1) % 3], u) || segment_triangle(u[k], u[(k + 1) % 3], t)) return true;
    return false;
  }
  const Projector pr(t);
  const P2 a = pr(t[0]), b = pr(t[1]), c = pr(t[2]), d = pr(u[0]), e = pr(u[1]), f = pr(u[2]);
  return segment_triangle_2d(a, b, d, e, f) || segment_triangle_2d(b, c, d, e, f) ||
         segment_triangle_2d(c, a, d, e, f) || in_triangle_2d(d, a, b, c);
}

std::size_t count_self_intersections(const TriangleMesh& mesh, std::size_t stop_after) {
  const TriangleBvh bvh(mesh);
  const std::size_t n = mesh.triangles.size();
  std::vector<std::size_t> hits(n, 0);
  parallel_for(n, [&](std::size_t i) {
    const auto& ti = mesh.triangles[i];
    const std::array<Point3, 3> t = {mesh.vertices[ti[0]], mesh.vertices[ti[1]], mesh.vertices[ti[2]]};
    const Point3 lo = t[0].cwiseMin(t[1]).cwiseMin(t[2]), hi = t[0].cwiseMax(t[1]).cwiseMax(t[2]);
    std::vector<int> cand;
    bvh.overlapping(lo, hi, cand);
    for (int j : cand) {
      if (j <= static_cast<int>(i)) continue;
      const auto& tj = mesh.triangles[j];
      const std::array<Point3, 3> u = {mesh.vertices[tj[0]], mesh.vertices[tj[1]], mesh.vertices[tj[2]]};
      if (triangles_intersect(t, u)) ++hits[i];
    }
  });
  std::size_t total = 0;
  for (std::size_t h : hits) total += h;
  if (stop_after > 0) total = std::min(total, stop_after);
  return total;
}

double global_error_bound(double r_min, double reach) { return r_min * r_min / (2.0 * reach); }

std::vector<double> facet_error_to_level_set(const TriangleMesh& mesh, const std::function<double(const Point3&)>& f,
                                             double max_distance, double tolerance) {
  std::vector<double> err(mesh.triangles.size(), 0.0);
  parallel_for(mesh.triangles.size(), [&](std::size_t i) {
    const auto& t = mesh.triangles[i];
    const Point3 &p = mesh.vertices[t[0]], &q = mesh.vertices[t[1]], &r = mesh.vertices[t[2]];
    const Vector3 n = (q - p).cross(r - p).normalized();
    if (!n.allFinite()) return;
    double e = 0.0;
    constexpr int kDiv = 4;
    for (int a = 0; a <= kDiv; ++a)
      for (int b = 0; a + b <= kDiv; ++b) {
        const Point3 x = p + (double(a) / kDiv) * (q - p) + (double(b) / kDiv) * (r - p);
        const bool neg = f(x) < 0.0;
        // march outward in both directions until the sign flips
        double found = max_distance;
        const double step = std::max(tolerance, max_distance / 64.0);
        for (double s = step; s <= max_distance + 0.5 * step && found == max_distance; s += step)
          for (double dir : {1.0, -1.0}) {
            if ((f(x + dir * s * n) < 0.0) == neg) continue;
            double lo = s - step, hi = s;
            while (hi - lo > tolerance) {
              const double m = 0.5 * (lo + hi);
              if ((f(x + dir * m * n) < 0.0) == neg) lo = m;
              else hi = m;
            }
            found = std::min(found, 0.5 * (lo + hi));
          }
        e = std::max(e, found);
      }
    err[i] = e;
  });
  return err;
}

std::vector<double> facet_error_to_points(const TriangleMesh& mesh, std::span<const Point3> points) {
  std::vector<double> err(mesh.triangles.size(), 0.0);
  const TriangleBvh bvh(mesh);
  std::vector<int> owner(points.size(), -1);
  std::vector<double> dist(points.size(), 0.0);
  parallel_for(points.size(), [&](std::size_t i) {
    int t = -1;
    dist[i] = std::sqrt(bvh.closest(points[i], nullptr, &t));
    owner[i] = t;
  });
  for (std::size_t i = 0; i < points.size(); ++i)
    if (owner[i] >= 0) err[owner[i]] = std::max(err[owner[i]], dist[i]);
  return err;
}

ErrorAudit audit_error_bound(const TriangleMesh& mesh, std::span<const double> ball_radii,
                             std::vector<double> measured, const TruthSurface& truth, double reach,
                             double slack) {
  const std::size_t n = mesh.triangles.size();
  if (ball_radii.size() != n || measured.size() != n) throw ContractError("one value per facet is required");
  ErrorAudit a;
  a.slack = slack;
  a.measured = std::move(measured);
  a.bound.assign(n, std::numeric_limits<double>::infinity());
  parallel_for(n, [&](std::size_t f) {
    const auto& t = mesh.triangles[f];
    const Point3 c = (mesh.vertices[t[0]] + mesh.vertices[t[1]] + mesh.vertices[t[2]]) / 3.0;
    const double rc = truth.curvature_radius(c);
    if (std::isfinite(rc) && rc > 0.0) a.bound[f] = ball_radii[f] * ball_radii[f] / (2.0 * rc);
  });
  const auto areas = facet_areas(mesh);
  std::size_t smallest = 0;
  for (std::size_t f = 0; f < n; ++f) {
    if (!std::isfinite(a.bound[f])) ++a.exempt;
    else if (a.measured[f] > (1.0 + slack) * a.bound[f]) ++a.violations;
    if (areas[f] < areas[smallest]) smallest = f;
  }
  if (n > 0) a.r_min = ball_radii[smallest];
  a.global_bound = global_error_bound(a.r_min, reach);
  return a;
}

EvalReport evaluate(const TriangleMesh& mesh, std::span<const Point3> points) {
  EvalReport r;
  r.facet_count = mesh.triangles.size();
  r.vertex_count = mesh.vertices.size();
  if (!points.empty() && !mesh.triangles.empty()) r.distances = point_to_mesh_distances(points, mesh);
  r.angle_histogram = angle_histogram(mesh);
  r.min_angle_deg = mesh.triangles.empty() ? 0.0 : min_angle_deg(mesh);
  r.manifold = is_manifold(mesh);
  r.watertight = r.manifold && is_watertight(mesh);
  r.self_intersections = count_self_intersections(mesh);
  if (r.manifold && !mesh.triangles.empty()) r.topology = topology(mesh);
  else log_warn("mesh is not manifold; topology metrics skipped");
  return r;
}

nlohmann::ordered_json to_json(const ErrorAudit& a) {
  nlohmann::ordered_json j;
  j["measure"] = a.measure;
  j["facets"] = a.measured.size();
  j["violations"] = a.violations;
  j["violation_fraction"] = a.violation_fraction();
  j["exempt"] = a.exempt;
  j["slack"] = a.slack;
  j["r_min"] = a.r_min;
  j["global_bound"] = a.global_bound;
  double mx = 0.0;
  for (double m : a.measured) mx = std::max(mx, m);
  j["max_measured_error"] = mx;
  return j;
}

nlohmann::ordered_json to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["chamfer"] = r.distances.chamfer;
  j["hausdorff"] = r.distances.hausdorff;
  j["facet_count"] = r.facet_count;
  j["vertex_count"] = r.vertex_count;
  j["min_angle_deg"] = r.min_angle_deg;
  j["watertight"] = r.watertight;
  j["manifold"] = r.manifold;
  j["self_intersections"] = r.self_intersections;
  if (r.topology) {
    j["components"] = r.topology->components;
    j["genus_per_component"] = r.topology->genus;
  } else {
    j["components"] = nullptr;
    j["genus_per_component"] = nullptr;
  }
  j["angle_histogram"] = r.angle_histogram;
  if (!r.audits.empty()) {
    j["error_bound_audit"] = nlohmann::ordered_json::array();
    for (const auto& a : r.audits) j["error_bound_audit"].push_back(to_json(a));
  }
  return j;
}

void write_histogram_csv(std::ostream& out, const std::vector<std::size_t>& histogram) {
  out << "bin_lo_deg,bin_hi_deg,count\n";
  const double w = 180.0 / static_cast<double>(histogram.size());
  for (std::size_t b = 0; b < histogram.size(); ++b) out << b * w << ',' << (b + 1) * w << ',' << histogram[b] << '\n';
}

}  // namespace lfsr
