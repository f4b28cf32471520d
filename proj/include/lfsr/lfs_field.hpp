#pragma once

#include "lfsr/jet_fitting.hpp"
#include "lfsr/shape_diameter.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace lfsr {

enum class LfsSource : std::uint8_t { curvature, diameter, fallback };

const char* to_string(LfsSource s);

// one value per input point id
struct ScalarField {
  std::vector<double> values;
  std::vector<LfsSource> provenance;

  std::size_t size() const { return values.size(); }
  double min() const;
  double max() const;
  double mean() const;
};

struct Reach {
  double value = 0.0;
};

struct LfsOptions {
  JetParams jet;
  ConeSearchParams cone;
  bool use_curvature = true;
  bool use_diameter = true;
};

// per-point details kept for diagnostics
struct LfsEstimate {
  ScalarField field;
  std::vector<double> curvature_radius;
  std::vector<DiameterSample> diameter;
};

// lfs = min(r, 0.5 delta) per point; ties go to curvature. Each point's cone
// seed is derived from options.cone.rng_seed and its id.
LfsEstimate estimate_lfs(const KdTree& index, std::span<const Vector3> normals, double eps,
                         const BoundingSphere& sphere, const LfsOptions& options);

ScalarField median_filter(const ScalarField& field, const KdTree& index, int k);
ScalarField laplacian_smooth(const ScalarField& field, const KdTree& index, int k, int iterations,
                             double weight);

Reach reach(const ScalarField& field);

// CSV "id,lfs,provenance"
void write_field_csv(std::ostream& out, const ScalarField& field);
// PLY points with an "lfs" vertex scalar
void write_field_ply(std::ostream& out, std::span<const Point3> points, const ScalarField& field);

}  // namespace lfsr
