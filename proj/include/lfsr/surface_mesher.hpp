#pragma once

#include "lfsr/io.hpp"
#include "lfsr/point_cloud.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace lfsr {

struct MeshingCriteria {
  double min_facet_angle_deg = 25.0;
  double distance_ratio = 0.2;
  // the distance criterion is skipped for balls smaller than this times size_min
  double distance_floor_ratio = 1.0;
  // bisection tolerance relative to size_min
  double bisection_ratio = 1e-3;
  std::size_t vertex_budget = 1000000;
  int max_probe_chords = 10000;
  int manifold_rounds = 64;
  std::uint64_t seed = 0;
};

struct Chord {
  Point3 a, b;
};

// surface Delaunay ball of a restricted facet; the center is located by
// bisection to within the bracket width
struct SurfaceDelaunayBall {
  Point3 center;
  double radius = 0.0;
  double bracket = 0.0;
};

struct FacetDiagnostics {
  double min_angle_deg = 0.0;
  SurfaceDelaunayBall ball;
  double sizing_at_center = 0.0;
  double center_offset = 0.0;  // |ball center - facet circumcenter|
  bool restricted = true;
};

struct MesherStats {
  std::size_t seeds = 0;
  std::size_t probe_chords = 0;
  std::size_t insertions = 0;
  std::size_t manifold_repairs = 0;
  std::size_t unrefinable = 0;
  std::size_t bad_facets_left = 0;
  bool manifold = false;
};

struct SurfaceMesh {
  std::vector<Point3> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<FacetDiagnostics> facets;
  MesherStats stats;

  TriangleMesh as_triangle_mesh() const { return {vertices, triangles}; }
};

// Restricted Delaunay refinement of the zero set of f inside the domain
// ball. Only the sign of f is used; f < 0 is the negative side. Facets are
// oriented so their normals point toward positive f.
SurfaceMesh extract_surface(const std::function<double(const Point3&)>& f, const BoundingSphere& domain,
                            const std::function<double(const Point3&)>& sizing, double size_min,
                            std::span<const Chord> seed_chords, const MeshingCriteria& criteria);

double triangle_min_angle_deg(const Point3& a, const Point3& b, const Point3& c);
Point3 triangle_circumcenter(const Point3& a, const Point3& b, const Point3& c);

// CSV "facet,min_angle,R,sizing,offset"
void write_facet_csv(std::ostream& out, const SurfaceMesh& mesh);

}  // namespace lfsr
