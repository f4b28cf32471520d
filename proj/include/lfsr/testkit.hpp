#pragma once

#include "lfsr/metrics.hpp"
#include "lfsr/point_cloud.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace lfsr {

enum class PrimitiveKind { sphere, cone, ellipsoid, capsule, two_capsules, slab, plane, torus };

const char* to_string(PrimitiveKind k);
PrimitiveKind primitive_from_string(const std::string& s);

struct Hole {
  Point3 center;
  double radius = 0.0;
};

// Analytic test surface. Shapes are centered at the origin with z as the
// axis of symmetry (x for the ellipsoid's major axis).
struct PrimitiveSpec {
  PrimitiveKind kind = PrimitiveKind::sphere;
  double radius = 1.0;       // sphere, cone base, capsule, torus tube
  double height = 2.0;       // cone
  double semi_axes[3] = {2.0, 1.0, 1.0};  // ellipsoid
  double half_length = 1.0;  // capsule cylinder half length
  double gap = 0.2;          // two capsules: distance between the surfaces
  double thickness = 0.2;    // slab
  double extent = 1.0;       // plane and slab half width
  double major_radius = 1.0;  // torus

  std::size_t count = 1000;
  bool non_uniform = false;
  double noise = 0.0;  // Gaussian sigma as a fraction of the largest bbox edge
  int outlier_clusters = 0;
  int cluster_size = 5;
  std::size_t background_outliers = 0;
  std::vector<Hole> holes;
  bool with_normals = false;
};

struct Sample {
  PointCloud cloud;
  std::vector<bool> outlier;  // per point
};

// deterministic for a fixed seed; outliers are appended after surface samples
Sample sample_primitive(const PrimitiveSpec& spec, std::uint64_t seed);
PointCloud sample(const PrimitiveSpec& spec, std::uint64_t seed);

Aabb primitive_bounds(const PrimitiveSpec& spec);

// ground-truth LFS at a surface point; nullopt when not known analytically
std::optional<double> ground_truth_lfs(const PrimitiveSpec& spec, const Point3& p);

// unsigned distance to the surface and smallest curvature radius at the
// nearest surface point (+inf on flat parts, 0 on sharp creases)
double surface_distance(const PrimitiveSpec& spec, const Point3& x);
double surface_curvature_radius(const PrimitiveSpec& spec, const Point3& x);
TruthSurface truth_surface(const PrimitiveSpec& spec);

// Medial-ball oracle: radius of the largest ball tangent at p on the side of
// side * n that holds none of the dense samples (+inf if unbounded).
double medial_ball_radius(std::span<const Point3> dense, const Point3& p, const Vector3& n, int side);
// centers of the finite medial balls of every dense sample, both sides
std::vector<Point3> medial_axis_samples(std::span<const Point3> dense, std::span<const Vector3> normals);

// "key=value" parameters, e.g. "kind=capsule count=2610 noise=0.005"
PrimitiveSpec parse_primitive(const std::string& text);
std::string describe(const PrimitiveSpec& spec);

}  // namespace lfsr
