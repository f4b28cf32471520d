#include "lfsr/surface_mesher.hpp"

#include "lfsr/delaunay.hpp"
#include "lfsr/log.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <numbers>
#include <ostream>
#include <queue>
#include <random>
#include <unordered_map>

namespace lfsr {

double triangle_min_angle_deg(const Point3& a, const Point3& b, const Point3& c) {
  auto angle = [](const Vector3& u, const Vector3& v) {
    return std::atan2(u.cross(v).norm(), u.dot(v));
  };
  const double A = angle(b - a, c - a), B = angle(a - b, c - b);
  const double C = std::numbers::pi - A - B;
  return std::min({A, B, C}) * 180.0 / std::numbers::pi;
}

Point3 triangle_circumcenter(const Point3& a, const Point3& b, const Point3& c) {
  const Vector3 ab = b - a, ac = c - a;
  const Vector3 n = ab.cross(ac);
  const double n2 = n.squaredNorm();
  if (!(n2 > 0.0)) return (a + b + c) / 3.0;
  return a + (ab.squaredNorm() * ac.cross(n) + ac.squaredNorm() * n.cross(ab)) / (2.0 * n2);
}

namespace {

struct FacetEval {
  bool restricted = false;
  bool positive_toward_neighbor = true;
  SurfaceDelaunayBall ball;
  double priority = 0.0;
  bool bad = false;
};

struct QueueItem {
  double priority;
  int cell, facet;
  std::uint64_t stamp_c, stamp_n;
  Point3 target;
  bool operator<(const QueueItem& o) const {
    if (priority != o.priority) return priority < o.priority;
    return stamp_c > o.stamp_c;
  }
};

class Mesher {
public:
  Mesher(const std::function<double(const Point3&)>& f, const BoundingSphere& domain,
         const std::function<double(const Point3&)>& sizing, double size_min, const MeshingCriteria& crit)
      : f_(f), domain_(domain), sizing_(sizing), size_min_(size_min), crit_(crit) {
    tol_ = crit.bisection_ratio * size_min;
    ray_length_ = 4.0 * domain.radius;
  }

  bool negative(const Point3& x) { return f_(x) < 0.0; }

  // bisection between points of opposite sign; returns a point within tol
  Point3 bisect(Point3 a, Point3 b, bool neg_a, double* bracket = nullptr) {
    while ((b - a).norm() > tol_) {
      const Point3 m = 0.5 * (a + b);
      if (negative(m) == neg_a) a = m;
      else b = m;
    }
    if (bracket) *bracket = (b - a).norm();
    return 0.5 * (a + b);
  }

  // clips p + t (q - p), t in [0,1], to the domain ball
  bool clip(const Point3& p, const Point3& q, double& t0, double& t1) const {
    const Vector3 d = q - p, m = p - domain_.center;
    const double a = d.squaredNorm();
    const double b = m.dot(d);
    const double c = m.squaredNorm() - domain_.radius * domain_.radius;
    if (!(a > 0.0)) return c <= 0.0 && (t0 = 0.0, t1 = 1.0, true);
    const double disc = b * b - a * c;
    if (disc <= 0.0) return false;
    const double s = std::sqrt(disc);
    t0 = std::max(0.0, (-b - s) / a);
    t1 = std::min(1.0, (-b + s) / a);
    return t0 < t1;
  }

  void cache_cell(int c) {
    if (cache_stamp_.size() <= static_cast<std::size_t>(c)) {
      cache_stamp_.resize(static_cast<std::size_t>(c) + 1, 0);
      cache_cc_.resize(static_cast<std::size_t>(c) + 1);
      cache_neg_.resize(static_cast<std::size_t>(c) + 1);
      cache_in_.resize(static_cast<std::size_t>(c) + 1);
    }
    const auto& cell = dt_.cell(c);
    if (cache_stamp_[c] == cell.stamp || dt_.is_infinite(c)) return;
    cache_stamp_[c] = cell.stamp;
    const Point3 cc = dt_.circumcenter(c);
    cache_cc_[c] = cc;
    const bool in = cc.allFinite() && (cc - domain_.center).norm() < domain_.radius;
    cache_in_[c] = in;
    cache_neg_[c] = in ? negative(cc) : false;
  }

  // dual segment of facet (c, i), from the c side to the neighbor side
  bool dual_segment(int c, int i, Point3& p, Point3& q) {
    const int nb = dt_.cell(c).n[i];
    const bool ci = dt_.is_infinite(c), ni = dt_.is_infinite(nb);
    if (ci && ni) return false;
    const auto fv = dt_.facet_vertices(c, i);
    for (int v : fv)
      if (v == Delaunay3::kInfinite) return false;
    const Point3 &a = dt_.point(fv[0]), &b = dt_.point(fv[1]), &d = dt_.point(fv[2]);
    const Vector3 nrm = (b - a).cross(d - a).normalized();  // points from c to nb
    if (!ci) cache_cell(c);
    if (!ni) cache_cell(nb);
    if (!ci && !ni) {
      p = cache_cc_[c];
      q = cache_cc_[nb];
    } else if (ni) {
      p = cache_cc_[c];
      q = p + ray_length_ * nrm;
    } else {
      q = cache_cc_[nb];
      p = q - ray_length_ * nrm;
    }
    return p.allFinite() && q.allFinite();
  }

  FacetEval evaluate(int c, int i) {
    FacetEval ev;
    Point3 p, q;
    if (!dual_segment(c, i, p, q)) return ev;
    double t0, t1;
    if (!clip(p, q, t0, t1)) return ev;
    const int nb = dt_.cell(c).n[i];
    const Point3 p0 = p + t0 * (q - p), p1 = p + t1 * (q - p);
    const bool neg0 = (t0 == 0.0 && !dt_.is_infinite(c) && cache_in_[c]) ? cache_neg_[c] : negative(p0);
    const bool neg1 = (t1 == 1.0 && !dt_.is_infinite(nb) && cache_in_[nb]) ? cache_neg_[nb] : negative(p1);
    if (neg0 == neg1) return ev;
    ev.restricted = true;
    ev.positive_toward_neighbor = neg0;
    double bracket = 0.0;
    const Point3 center = bisect(p0, p1, neg0, &bracket);
    const auto fv = dt_.facet_vertices(c, i);
    const Point3 &a = dt_.point(fv[0]), &b = dt_.point(fv[1]), &d = dt_.point(fv[2]);
    ev.ball.center = center;
    ev.ball.radius = (center - a).norm();
    ev.ball.bracket = bracket;
    const double size = sizing_(center);
    const double angle = triangle_min_angle_deg(a, b, d);
    const double offset = (center - triangle_circumcenter(a, b, d)).norm();
    const bool small_angle = angle < crit_.min_facet_angle_deg;
    const bool too_big = ev.ball.radius > size;
    const bool too_far = ev.ball.radius > crit_.distance_floor_ratio * size_min_ &&
                         offset > crit_.distance_ratio * ev.ball.radius;
    ev.bad = small_angle || too_big || too_far;
    ev.priority = ev.ball.radius / size;
    return ev;
  }

  void push_cell_facets(int c) {
    for (int i = 0; i < 4; ++i) {
      const FacetEval ev = evaluate(c, i);
      if (!ev.restricted || !ev.bad) continue;
      const int nb = dt_.cell(c).n[i];
      queue_.push({ev.priority, c, i, dt_.cell(c).stamp, dt_.cell(nb).stamp, ev.ball.center});
    }
  }

  void insert(const Point3& p, int hint) {
    if (dt_.number_of_vertices() >= crit_.vertex_budget)
      throw BudgetExceeded("surface meshing exceeded the vertex budget of " + std::to_string(crit_.vertex_budget) +
                           " (" + std::to_string(queue_.size()) + " facets still queued, " +
                           std::to_string(stats_.insertions) + " insertions)");
    bool inserted = false;
    const bool was3 = dt_.dimension() == 3;
    dt_.insert(p, hint, &inserted);
    if (!inserted) {
      ++stats_.unrefinable;
      return;
    }
    ++stats_.insertions;
    if (!was3 && dt_.dimension() != 3) return;
    for (int c : dt_.last_created_cells())
      if (!dt_.is_infinite(c)) cache_cell(c);
    for (int c : dt_.last_created_cells()) push_cell_facets(c);
  }

  void refine() {
    while (!queue_.empty()) {
      const QueueItem it = queue_.top();
      queue_.pop();
      if (!dt_.is_alive(it.cell) || dt_.cell(it.cell).stamp != it.stamp_c) continue;
      const int nb = dt_.cell(it.cell).n[it.facet];
      if (!dt_.is_alive(nb) || dt_.cell(nb).stamp != it.stamp_n) continue;
      insert(it.target, it.cell);
    }
  }

  std::size_t seed(std::span<const Chord> chords) {
    std::vector<Point3> seeds;
    // a chord is split into pieces so that closed surfaces, which a long
    // chord crosses an even number of times, are still found
    auto try_chord = [&](const Point3& a, const Point3& b, int pieces, std::vector<Point3>& out) {
      double t0, t1;
      if (!clip(a, b, t0, t1)) return;
      const Point3 p0 = a + t0 * (b - a), p1 = a + t1 * (b - a);
      Point3 prev = p0;
      bool prev_neg = negative(p0);
      for (int k = 1; k <= pieces; ++k) {
        const Point3 cur = k == pieces ? p1 : Point3(p0 + (double(k) / pieces) * (p1 - p0));
        const bool cur_neg = negative(cur);
        if (cur_neg != prev_neg) out.push_back(bisect(prev, cur, prev_neg));
        prev = cur;
        prev_neg = cur_neg;
      }
    };
    constexpr int kProbePieces = 32;
    // four seeds span a tetrahedron but rarely have a restricted facet
    constexpr std::size_t kMinSeeds = 24;
    for (const Chord& ch : chords) try_chord(ch.a, ch.b, 1, seeds);
    std::mt19937_64 rng(mix_seed(crit_.seed, 0x5eed));
    auto random_on_sphere = [&]() {
      const double z = 2.0 * uniform01(rng) - 1.0;
      const double phi = 2.0 * std::numbers::pi * uniform01(rng);
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      return Point3(domain_.center + domain_.radius * Vector3(r * std::cos(phi), r * std::sin(phi), z));
    };
    std::size_t probes = chords.size();
    while (seeds.size() < kMinSeeds && probes < static_cast<std::size_t>(crit_.max_probe_chords)) {
      const Point3 a = random_on_sphere(), b = random_on_sphere();
      try_chord(a, b, kProbePieces, seeds);
      ++probes;
    }
    stats_.probe_chords = probes;
    if (seeds.empty())
      throw NoSurfaceError("no sign change found after " + std::to_string(probes) + " probe chords");

    // thin seeds to the local sizing; denser seeds would outlive refinement
    std::vector<double> spacing(seeds.size());
    double cell = size_min_;
    for (std::size_t i = 0; i < seeds.size(); ++i) cell = std::max(cell, spacing[i] = std::max(size_min_, sizing_(seeds[i])));
    std::unordered_map<std::uint64_t, std::vector<int>> grid;
    auto key = [&](long x, long y, long z) {
      return (static_cast<std::uint64_t>(x & 0x1fffff) << 42) | (static_cast<std::uint64_t>(y & 0x1fffff) << 21) |
             static_cast<std::uint64_t>(z & 0x1fffff);
    };
    std::vector<Point3> kept;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      const Point3& s = seeds[i];
      const long gx = std::lround(std::floor(s.x() / cell)), gy = std::lround(std::floor(s.y() / cell)),
                 gz = std::lround(std::floor(s.z() / cell));
      bool close = false;
      for (long dx = -1; dx <= 1 && !close; ++dx)
        for (long dy = -1; dy <= 1 && !close; ++dy)
          for (long dz = -1; dz <= 1 && !close; ++dz) {
            auto it = grid.find(key(gx + dx, gy + dy, gz + dz));
            if (it == grid.end()) continue;
            for (int k : it->second)
              if ((kept[static_cast<std::size_t>(k)] - s).norm() < spacing[i]) {
                close = true;
                break;
              }
          }
      if (close) continue;
      grid[key(gx, gy, gz)].push_back(static_cast<int>(kept.size()));
      kept.push_back(s);
    }
    for (const Point3& s : kept) {
      dt_.insert(s);
      ++stats_.seeds;
    }
    while (dt_.dimension() != 3 && probes < static_cast<std::size_t>(crit_.max_probe_chords)) {
      const Point3 a = random_on_sphere(), b = random_on_sphere();
      ++probes;
      std::vector<Point3> found;
      try_chord(a, b, kProbePieces, found);
      for (const Point3& x : found) {
        dt_.insert(x);
        ++stats_.seeds;
      }
    }
    stats_.probe_chords = probes;
    if (dt_.dimension() != 3) throw NoSurfaceError("surface samples do not span three dimensions");
    for (std::size_t c = 0; c < dt_.cells().size(); ++c)
      if (dt_.cells()[c].alive && !dt_.is_infinite(static_cast<int>(c))) cache_cell(static_cast<int>(c));
    for (std::size_t c = 0; c < dt_.cells().size(); ++c)
      if (dt_.cells()[c].alive) push_cell_facets(static_cast<int>(c));
    return kept.size();
  }

  struct Restricted {
    int cell, facet;
    std::array<int, 3> v;  // oriented toward positive f
    SurfaceDelaunayBall ball;
  };

  std::vector<Restricted> collect() {
    std::vector<Restricted> out;
    for (std::size_t ci = 0; ci < dt_.cells().size(); ++ci) {
      const auto& cell = dt_.cells()[ci];
      if (!cell.alive) continue;
      const int c = static_cast<int>(ci);
      for (int i = 0; i < 4; ++i) {
        const int nb = cell.n[i];
        // visit each facet once, from the smaller stamp side
        if (cell.stamp > dt_.cell(nb).stamp) continue;
        const FacetEval ev = evaluate(c, i);
        if (!ev.restricted) continue;
        auto fv = dt_.facet_vertices(c, i);
        if (!ev.positive_toward_neighbor) std::swap(fv[1], fv[2]);
        out.push_back({c, i, fv, ev.ball});
      }
    }
    return out;
  }

  // refines around non-manifold edges and vertices; true when manifold
  bool repair(const std::vector<Restricted>& facets, bool fix = true) {
    std::map<std::pair<int, int>, std::vector<int>> edges;
    std::map<int, std::vector<int>> vfaces;
    for (std::size_t f = 0; f < facets.size(); ++f) {
      const auto& v = facets[f].v;
      for (int k = 0; k < 3; ++k) {
        int a = v[k], b = v[(k + 1) % 3];
        if (a > b) std::swap(a, b);
        edges[{a, b}].push_back(static_cast<int>(f));
        vfaces[v[k]].push_back(static_cast<int>(f));
      }
    }
    std::vector<int> offenders;
    for (const auto& [e, fs] : edges)
      if (fs.size() != 2) offenders.insert(offenders.end(), fs.begin(), fs.end());
    if (offenders.empty()) {
      // umbrella check: the faces around a vertex form one cycle
      for (const auto& [v, fs] : vfaces) {
        std::map<int, std::vector<int>> link;
        for (int f : fs)
          for (int k = 0; k < 3; ++k)
            if (facets[static_cast<std::size_t>(f)].v[k] != v) link[facets[static_cast<std::size_t>(f)].v[k]].push_back(f);
        // walk the link graph
        std::vector<int> seen;
        std::vector<int> stack = {fs.front()};
        while (!stack.empty()) {
          const int f = stack.back();
          stack.pop_back();
          if (std::find(seen.begin(), seen.end(), f) != seen.end()) continue;
          seen.push_back(f);
          for (int k = 0; k < 3; ++k) {
            const int w = facets[static_cast<std::size_t>(f)].v[k];
            if (w == v) continue;
            for (int g : link[w]) stack.push_back(g);
          }
        }
        if (seen.size() != fs.size()) offenders.insert(offenders.end(), fs.begin(), fs.end());
      }
    }
    if (offenders.empty()) return true;
    if (!fix) return false;
    std::sort(offenders.begin(), offenders.end());
    offenders.erase(std::unique(offenders.begin(), offenders.end()), offenders.end());
    // refine the largest offending facet(s)
    std::sort(offenders.begin(), offenders.end(), [&](int a, int b) {
      const double ra = facets[static_cast<std::size_t>(a)].ball.radius, rb = facets[static_cast<std::size_t>(b)].ball.radius;
      return ra > rb || (ra == rb && a < b);
    });
    const std::size_t count = std::max<std::size_t>(1, offenders.size() / 4);
    std::vector<std::pair<Point3, int>> targets;
    for (std::size_t k = 0; k < count; ++k) {
      const auto& f = facets[static_cast<std::size_t>(offenders[k])];
      targets.emplace_back(f.ball.center, f.cell);
    }
    for (const auto& [p, c] : targets) {
      insert(p, dt_.is_alive(c) ? c : -1);
      ++stats_.manifold_repairs;
    }
    return false;
  }

  SurfaceMesh run(std::span<const Chord> chords) {
    seed(chords);
    refine();
    std::vector<Restricted> facets = collect();
    bool manifold = false;
    for (int round = 0; round < crit_.manifold_rounds; ++round) {
      if (repair(facets)) {
        manifold = true;
        break;
      }
      refine();
      facets = collect();
    }
    if (!manifold) manifold = repair(facets, false);
    stats_.manifold = manifold;

    SurfaceMesh mesh;
    std::vector<int> remap(dt_.number_of_vertices(), -1);
    std::vector<int> used;
    for (const auto& f : facets)
      for (int v : f.v) used.push_back(v);
    std::sort(used.begin(), used.end());
    used.erase(std::unique(used.begin(), used.end()), used.end());
    for (int v : used) {
      remap[static_cast<std::size_t>(v)] = static_cast<int>(mesh.vertices.size());
      mesh.vertices.push_back(dt_.point(v));
    }
    // deterministic facet order
    std::vector<std::size_t> order(facets.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    auto sorted_key = [&](std::size_t i) {
      auto v = facets[i].v;
      std::sort(v.begin(), v.end());
      return v;
    };
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sorted_key(a) < sorted_key(b); });
    for (std::size_t i : order) {
      const auto& f = facets[i];
      mesh.triangles.push_back({remap[f.v[0]], remap[f.v[1]], remap[f.v[2]]});
      FacetDiagnostics d;
      const Point3 &a = dt_.point(f.v[0]), &b = dt_.point(f.v[1]), &c = dt_.point(f.v[2]);
      d.min_angle_deg = triangle_min_angle_deg(a, b, c);
      d.ball = f.ball;
      d.sizing_at_center = sizing_(f.ball.center);
      d.center_offset = (f.ball.center - triangle_circumcenter(a, b, c)).norm();
      const bool bad = d.min_angle_deg < crit_.min_facet_angle_deg || d.ball.radius > d.sizing_at_center ||
                       (d.ball.radius > crit_.distance_floor_ratio * size_min_ &&
                        d.center_offset > crit_.distance_ratio * d.ball.radius);
      if (bad) ++stats_.bad_facets_left;
      mesh.facets.push_back(d);
    }
    mesh.stats = stats_;
    log_info("surface mesher: ", mesh.vertices.size(), " vertices, ", mesh.triangles.size(), " facets, ",
             stats_.insertions, " insertions, ", stats_.manifold_repairs, " manifold repairs",
             manifold ? "" : " (NOT manifold)");
    return mesh;
  }

private:
  const std::function<double(const Point3&)>& f_;
  BoundingSphere domain_;
  const std::function<double(const Point3&)>& sizing_;
  double size_min_;
  MeshingCriteria crit_;
  double tol_ = 0.0;
  double ray_length_ = 0.0;
  Delaunay3 dt_;
  std::vector<std::uint64_t> cache_stamp_;
  std::vector<Point3> cache_cc_;
  std::vector<char> cache_neg_, cache_in_;
  std::priority_queue<QueueItem> queue_;
  MesherStats stats_;
};

}  // namespace

SurfaceMesh extract_surface(const std::function<double(const Point3&)>& f, const BoundingSphere& domain,
                            const std::function<double(const Point3&)>& sizing, double size_min,
                            std::span<const Chord> seed_chords, const MeshingCriteria& criteria) {
  if (!(size_min > 0.0)) throw ContractError("size_min must be positive");
  Mesher m(f, domain, sizing, size_min, criteria);
  return m.run(seed_chords);
}

void write_facet_csv(std::ostream& out, const SurfaceMesh& mesh) {
  out << "facet,min_angle,R,sizing,offset\n" << std::setprecision(12);
  for (std::size_t i = 0; i < mesh.facets.size(); ++i) {
    const auto& d = mesh.facets[i];
    out << i << ',' << d.min_angle_deg << ',' << d.ball.radius << ',' << d.sizing_at_center << ','
        << d.center_offset << '\n';
  }
}

}  // namespace lfsr
