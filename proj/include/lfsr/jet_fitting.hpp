#pragma once

#include "lfsr/kd_tree.hpp"

#include <span>
#include <vector>

namespace lfsr {

struct JetParams {
  int degree = 2;
  int k_neighbors = 18;

  int required_samples() const { return (degree + 1) * (degree + 2) / 2; }
};

// Local Monge frame: z = 1/2 (k1 x^2 + k2 y^2) + ... with |k1| >= |k2|.
// The normal is unoriented.
struct MongeForm {
  Point3 origin = Point3::Zero();
  Vector3 d1 = Vector3::UnitX();
  Vector3 d2 = Vector3::UnitY();
  Vector3 n = Vector3::UnitZ();
  double k1 = 0.0;
  double k2 = 0.0;
};

// Fits a degree-d jet to the samples in a PCA frame centered at x.
// Throws DegenerateFitError on rank-deficient neighborhoods.
MongeForm fit_monge(std::span<const Point3> neighborhood, const Point3& x, int degree);
MongeForm fit_monge(const KdTree& index, const Point3& x, const JetParams& params);

// min(1/|k1|, clamp_max)
double curvature_radius(const MongeForm& m, double clamp_max);

// best-fit plane normal of the samples; throws DegenerateFitError when they coincide
Vector3 plane_normal(std::span<const Point3> neighborhood);

// per-point jet normals; falls back to the plane normal on degenerate fits
std::vector<Vector3> estimate_normals(const KdTree& index, const JetParams& params);

}  // namespace lfsr
