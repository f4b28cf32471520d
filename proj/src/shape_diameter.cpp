#include "lfsr/shape_diameter.hpp"

#include "lfsr/distance.hpp"
#include "lfsr/lipschitz_search.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>

namespace lfsr {

namespace {

// orthonormal (u, v) completing the axis; a pure function of the axis bits
void cap_basis(const Vector3& axis, Vector3& u, Vector3& v) {
  int k = 0;
  for (int a = 1; a < 3; ++a)
    if (std::abs(axis[a]) < std::abs(axis[k])) k = a;
  u = axis.cross(Vector3::Unit(k)).normalized();
  v = axis.cross(u);
}

std::uint64_t axis_seed(std::uint64_t seed, const Vector3& axis) {
  std::uint64_t h = seed;
  for (int a = 0; a < 3; ++a) h = mix_seed(h, std::bit_cast<std::uint64_t>(axis[a] + 0.0));
  return h;
}

}  // namespace

std::vector<Vector3> sample_cone_directions(const Vector3& axis, double apex_angle_deg, int count,
                                            std::mt19937_64& rng) {
  if (apex_angle_deg < 0.0 || apex_angle_deg > 90.0) throw ContractError("apex angle must be in [0, 90]");
  if (count < 1) throw ContractError("cone needs at least one ray");
  Vector3 u, v;
  cap_basis(axis, u, v);
  const double cos_max = std::cos(apex_angle_deg * std::numbers::pi / 180.0);
  std::vector<Vector3> dirs;
  dirs.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double c = 1.0 - uniform01(rng) * (1.0 - cos_max);
    const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    const double phi = 2.0 * std::numbers::pi * uniform01(rng);
    dirs.push_back(c * axis + s * (std::cos(phi) * u + std::sin(phi) * v));
  }
  return dirs;
}

double cone_distance(const KdTree& index, const Point3& x, const Vector3& axis,
                     const ConeSearchParams& params, double eps, double max_length, int* hits) {
  std::mt19937_64 rng(axis_seed(params.rng_seed, axis));
  const auto dirs = sample_cone_directions(axis, params.apex_angle_deg, params.rays_per_cone, rng);
  const double start = 2.0 * eps;
  const std::size_t kc = static_cast<std::size_t>(params.antipodal_count);
  std::vector<double> found;
  // rays in sampling order until k_c antipodal points are collected
  for (const Vector3& d : dirs) {
    if (start >= max_length || found.size() >= kc) break;
    auto f = [&](double t) { return unsigned_distance(index, x + t * d); };
    try {
      const bool start_below = f(start) <= eps;
      SearchOptions opt;
      opt.max_hits = start_below ? 3 : 2;
      CrossingSet cs = dichotomic_search(f, start, max_length, eps, opt);
      // a ray starting inside the tube first reports its exit
      if (start_below && !cs.hits.empty()) cs.hits.erase(cs.hits.begin());
      if (cs.hits.empty()) continue;
      const double t = cs.hits.size() >= 2 ? 0.5 * (cs.hits[0] + cs.hits[1]) : cs.hits[0];
      found.push_back(t);
    } catch (const SearchFailure&) {
    }
  }
  if (hits) *hits = static_cast<int>(found.size());
  if (found.empty()) return std::numeric_limits<double>::infinity();
  double s = 0.0;
  for (double t : found) s += t * t;
  return std::sqrt(s / static_cast<double>(found.size()));
}

DiameterSample shape_diameter(const KdTree& index, const Point3& x, const Vector3& n,
                              const ConeSearchParams& params, double eps, double fallback_diameter) {
  if (params.antipodal_count < 1) throw ContractError("antipodal count must be >= 1");
  int hits_sep = 0, hits_thick = 0;
  const double sigma = cone_distance(index, x, n, params, eps, fallback_diameter, &hits_sep);
  const double tau = cone_distance(index, x, Vector3(-n), params, eps, fallback_diameter, &hits_thick);
  DiameterSample s;
  s.antipodal_hits = hits_sep + hits_thick;
  if (s.antipodal_hits == 0) {
    s.value = fallback_diameter;
    s.kind = DiameterKind::fallback;
    return s;
  }
  if (tau <= sigma) {
    s.value = std::min(tau, fallback_diameter);
    s.kind = DiameterKind::thickness;
  } else {
    s.value = std::min(sigma, fallback_diameter);
    s.kind = DiameterKind::separation;
  }
  return s;
}

}  // namespace lfsr
