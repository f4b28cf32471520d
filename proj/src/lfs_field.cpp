#include "lfsr/lfs_field.hpp"

#include "lfsr/parallel.hpp"

#include <algorithm>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>

namespace lfsr {

const char* to_string(LfsSource s) {
  switch (s) {
    case LfsSource::curvature: return "curvature";
    case LfsSource::diameter: return "diameter";
    case LfsSource::fallback: return "fallback";
  }
  return "?";
}

double ScalarField::min() const { return *std::min_element(values.begin(), values.end()); }
double ScalarField::max() const { return *std::max_element(values.begin(), values.end()); }
double ScalarField::mean() const {
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

LfsEstimate estimate_lfs(const KdTree& index, std::span<const Vector3> normals, double eps,
                         const BoundingSphere& sphere, const LfsOptions& options) {
  const std::size_t n = index.size();
  if (normals.size() != n) throw ContractError("estimate_lfs needs one normal per point");
  if (!options.use_curvature && !options.use_diameter)
    throw ContractError("LFS needs at least one of curvature and diameter");
  const double clamp = sphere.diameter();
  LfsEstimate est;
  est.field.values.resize(n);
  est.field.provenance.resize(n);
  est.curvature_radius.assign(n, clamp);
  est.diameter.resize(n);

  parallel_for(n, [&](std::size_t i) {
    const Point3& p = index.point(static_cast<int>(i));
    bool fit_ok = true;
    double r = clamp;
    if (options.use_curvature) {
      try {
        r = curvature_radius(fit_monge(index, p, options.jet), clamp);
      } catch (const DegenerateFitError&) {
        fit_ok = false;
      }
    }
    est.curvature_radius[i] = r;

    DiameterSample ds{clamp, DiameterKind::fallback, 0};
    if (options.use_diameter) {
      ConeSearchParams cone = options.cone;
      cone.rng_seed = mix_seed(options.cone.rng_seed, i);
      ds = shape_diameter(index, p, normals[i], cone, eps, clamp);
    }
    est.diameter[i] = ds;

    const double half = 0.5 * ds.value;
    double v;
    LfsSource src;
    if (!options.use_diameter) {
      v = r;
      src = fit_ok ? LfsSource::curvature : LfsSource::fallback;
    } else if (!fit_ok || !options.use_curvature) {
      v = half;
      src = !fit_ok || ds.kind == DiameterKind::fallback ? LfsSource::fallback : LfsSource::diameter;
    } else if (r <= half) {
      v = r;
      src = LfsSource::curvature;
    } else {
      v = half;
      src = ds.kind == DiameterKind::fallback ? LfsSource::fallback : LfsSource::diameter;
    }
    est.field.values[i] = v;
    est.field.provenance[i] = src;
  });
  return est;
}

ScalarField median_filter(const ScalarField& field, const KdTree& index, int k) {
  if (k < 3) throw ContractError("median filter needs k >= 3");
  ScalarField out = field;
  parallel_for(field.size(), [&](std::size_t i) {
    thread_local std::vector<Neighbor> nn;
    index.k_nearest(index.point(static_cast<int>(i)), k, nn);
    std::vector<double> v;
    v.reserve(nn.size());
    for (const auto& q : nn) v.push_back(field.values[static_cast<std::size_t>(q.id)]);
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size();
    out.values[i] = m % 2 == 1 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
  });
  return out;
}

ScalarField laplacian_smooth(const ScalarField& field, const KdTree& index, int k, int iterations,
                             double weight) {
  if (!(weight > 0.0 && weight <= 1.0)) throw ContractError("smoothing weight must be in (0, 1]");
  const std::size_t n = field.size();
  // neighbors exclude the point itself
  std::vector<std::vector<int>> adj(n);
  parallel_for(n, [&](std::size_t i) {
    thread_local std::vector<Neighbor> nn;
    index.k_nearest(index.point(static_cast<int>(i)), k + 1, nn);
    for (const auto& q : nn)
      if (static_cast<std::size_t>(q.id) != i && adj[i].size() < static_cast<std::size_t>(k))
        adj[i].push_back(q.id);
  });
  ScalarField cur = field, next = field;
  for (int it = 0; it < iterations; ++it) {
    parallel_for(n, [&](std::size_t i) {
      if (adj[i].empty()) {
        next.values[i] = cur.values[i];
        return;
      }
      double s = 0.0;
      for (int j : adj[i]) s += cur.values[static_cast<std::size_t>(j)];
      next.values[i] = (1.0 - weight) * cur.values[i] + weight * s / static_cast<double>(adj[i].size());
    });
    std::swap(cur, next);
  }
  return cur;
}

Reach reach(const ScalarField& field) {
  if (field.values.empty()) throw ContractError("reach of an empty field");
  return {field.min()};
}

void write_field_csv(std::ostream& out, const ScalarField& field) {
  out << "id,lfs,provenance\n";
  for (std::size_t i = 0; i < field.size(); ++i)
    out << i << ',' << std::setprecision(17) << field.values[i] << ','
        << (field.provenance.empty() ? "" : to_string(field.provenance[i])) << '\n';
}

void write_field_ply(std::ostream& out, std::span<const Point3> points, const ScalarField& field) {
  out << "ply\nformat ascii 1.0\nelement vertex " << points.size()
      << "\nproperty double x\nproperty double y\nproperty double z\nproperty double lfs\nend_header\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < points.size(); ++i)
    out << points[i].x() << ' ' << points[i].y() << ' ' << points[i].z() << ' ' << field.values[i] << '\n';
}

}  // namespace lfsr
