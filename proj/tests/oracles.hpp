#pragma once

// Brute-force reference implementations shared by the unit tests and the
// acceptance runner.

#include <lfsr/delaunay.hpp>
#include <lfsr/io.hpp>
#include <lfsr/lipschitz_search.hpp>
#include <lfsr/metrics.hpp>
#include <lfsr/sign_solver.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

using lfsr::Point3;

// maximal runs of {f <= eps} found by sampling [a, b] at a fixed step
inline std::vector<std::pair<double, double>> sublevel_runs(const std::function<double(double)>& f, double a,
                                                            double b, double eps, double step = 1e-5) {
  std::vector<std::pair<double, double>> runs;
  const long n = static_cast<long>(std::ceil((b - a) / step));
  bool inside = false;
  double start = a;
  for (long i = 0; i <= n; ++i) {
    const double t = std::min(b, a + double(i) * step);
    const bool below = f(t) <= eps;
    if (below && !inside) start = t;
    if (!below && inside) runs.emplace_back(start, a + double(i - 1) * step);
    inside = below;
  }
  if (inside) runs.emplace_back(start, b);
  return runs;
}

inline double sublevel_min(const std::function<double(double)>& f, double a, double b, double step = 1e-5) {
  double m = std::numeric_limits<double>::infinity();
  const long n = static_cast<long>(std::ceil((b - a) / step));
  for (long i = 0; i <= n; ++i) m = std::min(m, f(std::min(b, a + double(i) * step)));
  return m;
}

struct SearchComparison {
  std::size_t runs = 0;
  std::size_t hits = 0;
  bool verdict_match = true;
  bool count_match = true;
  std::size_t false_prunes = 0;  // oracle crossings with no hit within eps
  double max_location_error = 0.0;
  bool separated = true;  // adjacent runs further apart than 2 eps
  std::size_t search_evaluations = 0;
  std::size_t oracle_evaluations = 0;
};

// dichotomic search against the dense oracle. Hits estimate the eps level
// crossings, i.e. the run ends that are not ends of [a, b].
inline SearchComparison compare_search(const std::function<double(double)>& f, double a, double b, double eps,
                                       double step = 1e-5) {
  SearchComparison c;
  const auto runs = sublevel_runs(f, a, b, eps, step);
  const auto hits = lfsr::dichotomic_search(f, a, b, eps);
  std::vector<double> crossings;
  for (const auto& r : runs) {
    if (r.first > a) crossings.push_back(r.first);
    if (r.second < b) crossings.push_back(r.second);
  }
  c.runs = runs.size();
  c.hits = hits.size();
  c.search_evaluations = hits.evaluations;
  c.oracle_evaluations = static_cast<std::size_t>(std::ceil((b - a) / step)) + 1;
  for (std::size_t i = 1; i < runs.size(); ++i) c.separated &= runs[i].first - runs[i - 1].second > 2 * eps;
  c.verdict_match = crossings.empty() == hits.empty();
  c.count_match = hits.size() == crossings.size();
  for (double x : crossings) {
    bool reached = false;
    for (double h : hits.hits) reached |= std::abs(h - x) <= eps;
    if (!reached) ++c.false_prunes;
  }
  for (double h : hits.hits) {
    double best = std::numeric_limits<double>::infinity();
    for (double x : crossings) best = std::min(best, std::abs(h - x));
    c.max_location_error = std::max(c.max_location_error, best);
  }
  return c;
}

// distance from a unit-speed segment (t in [0, length]) to random points
// scattered near it; 1-Lipschitz in t
struct RandomDistanceFunction {
  std::vector<Point3> points;
  Point3 origin;
  lfsr::Vector3 direction;
  double length = 1.0;
  double spacing = 0.0;
  double operator()(double t) const {
    const Point3 x = origin + t * direction;
    double d = std::numeric_limits<double>::infinity();
    for (const auto& p : points) d = std::min(d, (x - p).norm());
    return d;
  }
};

inline RandomDistanceFunction random_distance_function(std::mt19937_64& rng, int count = 20) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RandomDistanceFunction f;
  f.origin = Point3(g(rng), g(rng), g(rng));
  f.direction = Point3(g(rng), g(rng), g(rng)).normalized();
  f.length = 0.5 + u(rng);
  f.spacing = f.length / count;
  for (int i = 0; i < count; ++i) {
    const Point3 on = f.origin + (-0.1 + 1.2 * u(rng)) * f.length * f.direction;
    const lfsr::Vector3 off = Point3(g(rng), g(rng), g(rng)).normalized() * (0.6 * f.spacing * u(rng));
    f.points.push_back(on + off);
  }
  return f;
}

// plain double insphere via a 4x4 determinant with a relative margin;
// returns +1 strictly inside, -1 strictly outside, 0 undecided
inline int insphere_brute(const Point3& a, const Point3& b, const Point3& c, const Point3& d, const Point3& e) {
  Eigen::Matrix4d m;
  const Point3 p[4] = {a, b, c, d};
  double scale = 0;
  for (int i = 0; i < 4; ++i) {
    const Point3 q = p[i] - e;
    m.row(i) << q.x(), q.y(), q.z(), q.squaredNorm();
    scale = std::max(scale, q.squaredNorm());
  }
  Eigen::Matrix3d o;
  o << (a - d).transpose(), (b - d).transpose(), (c - d).transpose();
  const double det = m.determinant() * (o.determinant() > 0 ? 1.0 : -1.0);
  const double tol = 1e-10 * scale * scale;
  if (det > tol) return 1;
  if (det < -tol) return -1;
  return 0;
}

struct EmptySphereReport {
  std::size_t cells = 0;
  std::size_t violations = 0;
  std::size_t negative_cells = 0;
  std::size_t bad_adjacency = 0;
};

// every finite cell against every vertex
inline EmptySphereReport check_delaunay(const lfsr::Delaunay3& tri) {
  EmptySphereReport r;
  const auto& cells = tri.cells();
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto& cell = cells[c];
    if (!cell.alive) continue;
    for (int i = 0; i < 4; ++i) {
      const int n = cell.n[i];
      if (!tri.is_alive(n)) {
        ++r.bad_adjacency;
        continue;
      }
      bool back = false;
      for (int j = 0; j < 4; ++j) back |= tri.cell(n).n[j] == int(c);
      if (!back) ++r.bad_adjacency;
    }
    if (tri.is_infinite(int(c))) continue;
    ++r.cells;
    const auto p = tri.cell_points(int(c));
    Eigen::Matrix3d o;
    o << (p[0] - p[3]).transpose(), (p[1] - p[3]).transpose(), (p[2] - p[3]).transpose();
    if (!(o.determinant() > 0)) ++r.negative_cells;
    for (std::size_t v = 0; v < tri.number_of_vertices(); ++v) {
      if (int(v) == cell.v[0] || int(v) == cell.v[1] || int(v) == cell.v[2] || int(v) == cell.v[3]) continue;
      if (insphere_brute(p[0], p[1], p[2], p[3], tri.point(int(v))) > 0) ++r.violations;
    }
  }
  return r;
}

// minimizer of x^T (S^T S + lambda B^T B) x subject to sum x = |V|, via the
// dense KKT matrix and a full-pivot LU
inline std::pair<Eigen::VectorXd, double> dense_kkt_solve(const lfsr::KktSystem& sys) {
  const Eigen::MatrixXd K = Eigen::MatrixXd(sys.full_matrix());
  const Eigen::VectorXd rhs = sys.rhs();
  const Eigen::VectorXd sol = K.fullPivLu().solve(rhs);
  return {sol.head(sys.num_vertices), sol[sys.num_vertices]};
}

struct HistogramModes {
  int peaks = 0;
  bool zero_in_gap = false;
  std::vector<double> counts;  // smoothed
  std::vector<int> peak_bins;
  double lo = 0, hi = 0;
};

// Peaks of a [1 2 1]-smoothed histogram whose topographic prominence is at
// least half their height. With two peaks, the gap holds 0 when the bin of 0
// lies between them and is below a quarter of the smaller peak.
inline HistogramModes histogram_modes(const Eigen::VectorXd& values, int bins = 30) {
  HistogramModes m;
  m.lo = values.minCoeff();
  m.hi = values.maxCoeff();
  const double w = (m.hi - m.lo) / bins;
  auto bin_of = [&](double v) { return std::clamp(int((v - m.lo) / w), 0, bins - 1); };
  std::vector<double> raw(bins, 0.0);
  for (double v : values) raw[bin_of(v)] += 1.0;
  m.counts.assign(bins, 0.0);
  for (int i = 0; i < bins; ++i)
    m.counts[i] = (2 * raw[i] + (i > 0 ? raw[i - 1] : 0.0) + (i + 1 < bins ? raw[i + 1] : 0.0)) / 4.0;
  const auto& c = m.counts;
  for (int i = 0; i < bins; ++i) {
    if (!(c[i] > 0.0) || (i > 0 && c[i - 1] >= c[i]) || (i + 1 < bins && c[i + 1] > c[i])) continue;
    // lowest point before reaching higher ground on each side
    double left = c[i], right = c[i];
    bool left_higher = false, right_higher = false;
    for (int j = i - 1; j >= 0 && !left_higher; --j) {
      if (c[j] > c[i]) left_higher = true;
      else left = std::min(left, c[j]);
    }
    for (int j = i + 1; j < bins && !right_higher; ++j) {
      if (c[j] > c[i]) right_higher = true;
      else right = std::min(right, c[j]);
    }
    double col;
    if (left_higher && right_higher) col = std::max(left, right);
    else if (left_higher) col = left;
    else if (right_higher) col = right;
    else col = 0.0;  // the highest peak
    if (c[i] - col >= 0.5 * c[i]) m.peak_bins.push_back(i);
  }
  m.peaks = int(m.peak_bins.size());
  if (m.peaks == 2 && m.lo < 0.0 && m.hi > 0.0) {
    const int z = bin_of(0.0);
    const double lower = std::min(c[m.peak_bins[0]], c[m.peak_bins[1]]);
    m.zero_in_gap = m.peak_bins[0] < z && z < m.peak_bins[1] && c[z] < 0.25 * lower;
  }
  return m;
}

// one-sided point-to-mesh distances by scanning every triangle
inline lfsr::DistanceStats brute_point_to_mesh(const std::vector<Point3>& pts, const lfsr::TriangleMesh& mesh) {
  lfsr::DistanceStats s;
  double sum = 0;
  for (const auto& p : pts) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& t : mesh.triangles) {
      const Point3 q = lfsr::closest_point_on_triangle(p, mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
      best = std::min(best, (p - q).norm());
    }
    sum += best;
    s.hausdorff = std::max(s.hausdorff, best);
  }
  s.chamfer = sum / double(pts.size());
  return s;
}

// icosphere of radius r by repeated midpoint subdivision
inline lfsr::TriangleMesh icosphere(int subdivisions, double r = 1.0, const Point3& center = Point3::Zero()) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  lfsr::TriangleMesh m;
  m.vertices = {Point3(-1, t, 0), Point3(1, t, 0),  Point3(-1, -t, 0), Point3(1, -t, 0),
                Point3(0, -1, t), Point3(0, 1, t),  Point3(0, -1, -t), Point3(0, 1, -t),
                Point3(t, 0, -1), Point3(t, 0, 1),  Point3(-t, 0, -1), Point3(-t, 0, 1)};
  for (auto& v : m.vertices) v.normalize();
  m.triangles = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                 {11, 10, 2}, {10, 7, 6}, {7, 1, 8},   {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
                 {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      m.vertices.push_back((m.vertices[a] + m.vertices[b]).normalized());
      return mid[key] = int(m.vertices.size()) - 1;
    };
    std::vector<std::array<int, 3>> next;
    for (const auto& f : m.triangles) {
      const int ab = midpoint(f[0], f[1]), bc = midpoint(f[1], f[2]), ca = midpoint(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    m.triangles = std::move(next);
  }
  for (auto& v : m.vertices) v = center + r * v;
  return m;
}

// torus mesh on a (nu x nv) parameter grid
inline lfsr::TriangleMesh torus_mesh(int nu, int nv, double R, double r) {
  lfsr::TriangleMesh m;
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j) {
      const double u = 2 * M_PI * i / nu, v = 2 * M_PI * j / nv;
      m.vertices.emplace_back((R + r * std::cos(v)) * std::cos(u), (R + r * std::cos(v)) * std::sin(u), r * std::sin(v));
    }
  auto id = [&](int i, int j) { return ((i + nu) % nu) * nv + (j + nv) % nv; };
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j) {
      m.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      m.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  return m;
}

inline lfsr::TriangleMesh merge(lfsr::TriangleMesh a, const lfsr::TriangleMesh& b) {
  const int off = int(a.vertices.size());
  a.vertices.insert(a.vertices.end(), b.vertices.begin(), b.vertices.end());
  for (auto t : b.triangles) a.triangles.push_back({t[0] + off, t[1] + off, t[2] + off});
  return a;
}

}  // namespace oracle
