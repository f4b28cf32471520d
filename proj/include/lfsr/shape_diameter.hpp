#pragma once

#include "lfsr/kd_tree.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace lfsr {

struct ConeSearchParams {
  double apex_angle_deg = 10.0;
  int rays_per_cone = 30;
  int antipodal_count = 6;
  std::uint64_t rng_seed = 0;
};

// thickness is measured by the cone around -n, separation around +n
// (meaningful names when n points outward)
enum class DiameterKind { thickness, separation, fallback };

struct DiameterSample {
  double value = 0.0;
  DiameterKind kind = DiameterKind::fallback;
  int antipodal_hits = 0;
};

// uniform directions on the spherical cap of half-angle apex_angle_deg
std::vector<Vector3> sample_cone_directions(const Vector3& axis, double apex_angle_deg, int count,
                                            std::mt19937_64& rng);

// RMS distance to the first antipodal_count hits of the cone's rays, taken
// in sampling order; +infinity when no ray hits.
double cone_distance(const KdTree& index, const Point3& x, const Vector3& axis,
                     const ConeSearchParams& params, double eps, double max_length,
                     int* hits = nullptr);

// delta(x) = min(tau, sigma); fallback_diameter when neither cone hits.
// Rays start 2 eps away from x and stop at fallback_diameter.
DiameterSample shape_diameter(const KdTree& index, const Point3& x, const Vector3& n,
                              const ConeSearchParams& params, double eps, double fallback_diameter);

}  // namespace lfsr
