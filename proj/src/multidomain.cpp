#include "lfsr/multidomain.hpp"

#include "lfsr/log.hpp"
#include "lfsr/parallel.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <queue>

namespace lfsr {

const char* to_string(DomainLabel l) {
  switch (l) {
    case DomainLabel::envelope: return "envelope";
    case DomainLabel::shell: return "shell";
    case DomainLabel::outside: return "outside";
  }
  return "?";
}

double envelope_function(const KdTree& index, std::span<const Vector3> normals, const Point3& x, int k,
                         double h) {
  thread_local std::vector<Neighbor> nn;
  index.k_nearest(x, k, nn);
  if (nn.empty()) return 0.0;
  const double inv_h2 = 1.0 / (h * h);
  const double d0 = nn.front().sq_dist;
  double num = 0.0, den = 0.0;
  for (const auto& q : nn) {
    const double w = std::exp(-(q.sq_dist - d0) * inv_h2);
    num += w * std::abs((x - index.point(q.id)).dot(normals[static_cast<std::size_t>(q.id)]));
    den += w;
  }
  return num / den;
}

double default_bandwidth(const KdTree& index, int k) {
  std::vector<double> spacing(index.size());
  parallel_for(index.size(), [&](std::size_t i) {
    thread_local std::vector<Neighbor> nn;
    index.k_nearest(index.point(static_cast<int>(i)), k + 1, nn);
    double s = 0.0;
    int c = 0;
    for (const auto& q : nn)
      if (static_cast<std::size_t>(q.id) != i) {
        s += q.dist();
        ++c;
      }
    spacing[i] = c > 0 ? s / c : 0.0;
  });
  double mean = 0.0;
  for (double s : spacing) mean += s;
  mean /= static_cast<double>(spacing.size());
  return 2.0 * mean;
}

CellQuality cell_quality(const Delaunay3& tri, int c) {
  const auto p = tri.cell_points(c);
  CellQuality q;
  q.circumcenter = circumcenter(p[0], p[1], p[2], p[3]);
  q.circumradius = (q.circumcenter - p[0]).norm();
  q.shortest_edge = shortest_edge(p[0], p[1], p[2], p[3]);
  return q;
}

namespace {

std::vector<Point3> fibonacci_sphere(const BoundingSphere& s, std::size_t n) {
  std::vector<Point3> pts;
  pts.reserve(n);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (std::size_t i = 0; i < n; ++i) {
    const double z = 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * static_cast<double>(i);
    pts.push_back(s.center + s.radius * Vector3(r * std::cos(phi), r * std::sin(phi), z));
  }
  return pts;
}

struct QueueItem {
  double priority;
  int cell;
  std::uint64_t stamp;
  Point3 target;
  bool operator<(const QueueItem& o) const {
    return priority < o.priority || (priority == o.priority && stamp > o.stamp);
  }
};

class Refiner {
public:
  Refiner(const KdTree& index, std::span<const Vector3> normals, const EnvelopeParams& env,
          MultiDomain& md)
      : index_(index), normals_(normals), env_(env), md_(md) {}

  DomainLabel classify(const Point3& x) const {
    if ((x - md_.sphere.center).norm() > md_.sphere.radius) return DomainLabel::outside;
    return envelope_function(index_, normals_, x, env_.k, env_.h) <= md_.reach ? DomainLabel::envelope
                                                                                : DomainLabel::shell;
  }

  void examine(int c) {
    const Delaunay3& tri = md_.tri;
    const auto& cell = tri.cell(c);
    const auto& crit = md_.criteria;
    const int k = tri.infinite_index(c);
    if (k >= 0) {
      // hull facet of the sphere sampling
      const auto f = tri.facet_vertices(c, k);
      const Point3 &a = tri.point(f[0]), &b = tri.point(f[1]), &d = tri.point(f[2]);
      const Vector3 ab = b - a, ad = d - a;
      const Vector3 nrm = ab.cross(ad);
      const double n2 = nrm.squaredNorm();
      if (!(n2 > 0.0)) return;
      const Vector3 off = (ab.squaredNorm() * ad.cross(nrm) + ad.squaredNorm() * nrm.cross(ab)) / (2.0 * n2);
      const double rad = off.norm();
      if (rad <= crit.sphere_facet_size) return;
      Vector3 dir = (a + off) - md_.sphere.center;
      if (!(dir.norm() > 0.0)) dir = nrm;
      const Point3 target = md_.sphere.center + md_.sphere.radius * dir.normalized();
      queue_.push({rad / crit.sphere_facet_size, c, cell.stamp, target});
      return;
    }
    const CellQuality q = cell_quality(tri, c);
    if (!std::isfinite(q.circumradius)) return;
    if ((q.circumcenter - md_.sphere.center).norm() >= md_.sphere.radius) return;
    const Point3 bary = tri.barycenter(c);
    const DomainLabel label = classify(bary);
    double size = std::numeric_limits<double>::infinity();
    if (label == DomainLabel::envelope) {
      size = crit.envelope_cell_size;
      if (crit.envelope_size_field) size = std::min(size, crit.envelope_size_field(bary));
    } else if (label == DomainLabel::shell) {
      size = crit.shell_cell_size;
    }
    const double size_ratio = q.circumradius / size;
    const double shape_ratio = q.radius_edge() / crit.radius_edge_bound;
    const double priority = std::max(size_ratio, shape_ratio);
    if (priority > 1.0) queue_.push({priority, c, cell.stamp, q.circumcenter});
  }

  void run() {
    Delaunay3& tri = md_.tri;
    for (std::size_t c = 0; c < tri.cells().size(); ++c)
      if (tri.cells()[c].alive) examine(static_cast<int>(c));
    while (!queue_.empty()) {
      const QueueItem it = queue_.top();
      queue_.pop();
      if (!tri.is_alive(it.cell) || tri.cell(it.cell).stamp != it.stamp) continue;
      if (tri.number_of_vertices() >= md_.criteria.vertex_budget)
        throw BudgetExceeded("multi-domain refinement exceeded the vertex budget of " +
                             std::to_string(md_.criteria.vertex_budget) + " (" +
                             std::to_string(queue_.size()) + " cells still queued)");
      bool inserted = false;
      tri.insert(it.target, it.cell, &inserted);
      if (!inserted) continue;
      if ((it.target - md_.sphere.center).norm() >= md_.sphere.radius * (1.0 - 1e-12)) ++md_.stats.boundary_vertices;
      const std::vector<int> created = tri.last_created_cells();
      for (int c : created) examine(c);
    }
  }

private:
  const KdTree& index_;
  std::span<const Vector3> normals_;
  EnvelopeParams env_;
  MultiDomain& md_;
  std::priority_queue<QueueItem> queue_;
};

// Isolated envelope bubbles around a few stray samples (outlier clusters fit
// their own tangent planes) are not part of the surface.
void cast_off_small_components(MultiDomain& md, const KdTree& index, int min_samples) {
  const Delaunay3& tri = md.tri;
  const std::size_t nc = tri.cells().size();
  std::vector<int> comp(nc, -1);
  std::vector<std::vector<int>> members;
  for (std::size_t c = 0; c < nc; ++c) {
    if (!tri.cells()[c].alive || md.labels[c] != DomainLabel::envelope || comp[c] >= 0) continue;
    const int id = static_cast<int>(members.size());
    members.emplace_back();
    std::vector<int> stack{static_cast<int>(c)};
    comp[c] = id;
    while (!stack.empty()) {
      const int x = stack.back();
      stack.pop_back();
      members[static_cast<std::size_t>(id)].push_back(x);
      for (int n : tri.cell(x).n) {
        const auto un = static_cast<std::size_t>(n);
        if (n >= 0 && comp[un] < 0 && md.labels[un] == DomainLabel::envelope) {
          comp[un] = id;
          stack.push_back(n);
        }
      }
    }
  }
  md.stats.envelope_components = members.size();
  if (min_samples <= 0 || members.size() <= 1) return;

  const KdTree vertex_index(tri.points());
  std::vector<int> located(index.size(), -1);
  parallel_for(index.size(), [&](std::size_t i) {
    const Point3& p = index.point(static_cast<int>(i));
    located[i] = tri.locate(p, tri.vertex_cell(vertex_index.nearest(p).id));
  });
  std::vector<int> count(members.size(), 0);
  for (int c : located)
    if (c >= 0 && comp[static_cast<std::size_t>(c)] >= 0) ++count[static_cast<std::size_t>(comp[static_cast<std::size_t>(c)])];
  for (std::size_t k = 0; k < members.size(); ++k) {
    if (count[k] >= min_samples) continue;
    for (int c : members[k]) md.labels[static_cast<std::size_t>(c)] = DomainLabel::shell;
    md.stats.cast_off_cells += members[k].size();
  }
  if (md.stats.cast_off_cells > 0)
    log_info("multi-domain: ", md.stats.cast_off_cells, " cells of small envelope components relabeled shell");
}

}  // namespace

MultiDomain refine_multidomain(const KdTree& index, std::span<const Vector3> normals,
                               const EnvelopeParams& envelope, const BoundingSphere& sphere, Reach reach,
                               RefinementCriteria criteria) {
  if (!(reach.value > 0.0)) throw ContractError("multi-domain refinement needs a positive reach");
  if (normals.size() != index.size()) throw ContractError("one normal per point is required");
  if (criteria.envelope_cell_size <= 0.0) criteria.envelope_cell_size = reach.value;
  if (criteria.shell_cell_size <= 0.0) criteria.shell_cell_size = sphere.radius / 8.0;
  if (criteria.sphere_facet_size <= 0.0) criteria.sphere_facet_size = sphere.radius / 8.0;
  if (criteria.radius_edge_bound < 1.0) throw ContractError("radius-edge bound below 1");
  EnvelopeParams env = envelope;
  if (env.h <= 0.0) env.h = default_bandwidth(index, env.k);

  MultiDomain md;
  md.sphere = sphere;
  md.reach = reach.value;
  md.criteria = criteria;

  // sphere sampling at roughly the facet size, plus the center
  const double s = criteria.sphere_facet_size;
  const auto n_sphere = static_cast<std::size_t>(
      std::max(16.0, std::ceil(4.0 * std::numbers::pi * sphere.radius * sphere.radius / (0.5 * s * s))));
  md.tri.insert(sphere.center);
  for (const Point3& p : fibonacci_sphere(sphere, n_sphere)) md.tri.insert(p);
  md.stats.sphere_vertices = md.tri.number_of_vertices();

  Refiner refiner(index, normals, env, md);
  refiner.run();
  md.stats.steiner_vertices = md.tri.number_of_vertices() - md.stats.sphere_vertices;

  const auto& cells = md.tri.cells();
  md.labels.assign(cells.size(), DomainLabel::outside);
  std::vector<int> finite;
  for (std::size_t c = 0; c < cells.size(); ++c)
    if (cells[c].alive && !md.tri.is_infinite(static_cast<int>(c))) finite.push_back(static_cast<int>(c));
  parallel_for(finite.size(), [&](std::size_t i) {
    md.labels[static_cast<std::size_t>(finite[i])] = refiner.classify(md.tri.barycenter(finite[i]));
  });
  const int min_samples = criteria.min_component_samples < 0 ? env.k : criteria.min_component_samples;
  cast_off_small_components(md, index, min_samples);
  for (int c : finite) {
    switch (md.labels[static_cast<std::size_t>(c)]) {
      case DomainLabel::envelope: ++md.stats.envelope_cells; break;
      case DomainLabel::shell: ++md.stats.shell_cells; break;
      case DomainLabel::outside: ++md.stats.outside_cells; break;
    }
  }
  log_info("multi-domain: ", md.tri.number_of_vertices(), " vertices, ", md.stats.envelope_cells,
           " envelope / ", md.stats.shell_cells, " shell / ", md.stats.outside_cells, " outside cells");
  return md;
}

void write_tet_mesh(std::ostream& out, const MultiDomain& md) {
  out << std::setprecision(17);
  out << "vertices " << md.tri.number_of_vertices() << '\n';
  for (const auto& p : md.tri.points()) out << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  std::size_t n = 0;
  for (std::size_t c = 0; c < md.tri.cells().size(); ++c)
    if (md.tri.cells()[c].alive && !md.tri.is_infinite(static_cast<int>(c))) ++n;
  out << "cells " << n << '\n';
  for (std::size_t c = 0; c < md.tri.cells().size(); ++c) {
    const auto& cell = md.tri.cells()[c];
    if (!cell.alive || md.tri.is_infinite(static_cast<int>(c))) continue;
    out << cell.v[0] << ' ' << cell.v[1] << ' ' << cell.v[2] << ' ' << cell.v[3] << ' '
        << to_string(md.labels[c]) << '\n';
  }
}

}  // namespace lfsr
