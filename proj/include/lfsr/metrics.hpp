#pragma once

#include "lfsr/io.hpp"

#include <json.hpp>

#include <array>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lfsr {

// Axis-aligned bounding volume hierarchy over the triangles of a mesh.
class TriangleBvh {
public:
  explicit TriangleBvh(const TriangleMesh& mesh);

  // exact closest point; returns the squared distance
  double closest(const Point3& q, Point3* closest_point = nullptr, int* triangle = nullptr) const;
  // triangles whose boxes overlap the box [lo, hi]
  void overlapping(const Point3& lo, const Point3& hi, std::vector<int>& out) const;

private:
  struct Node {
    Point3 lo, hi;
    int left = -1, right = -1;  // children, or -1 for a leaf
    int begin = 0, end = 0;     // range in order_ for leaves
  };
  int build(int begin, int end);

  const TriangleMesh& mesh_;
  std::vector<Node> nodes_;
  std::vector<int> order_;
  std::vector<Point3> lo_, hi_, centroid_;
};

Point3 closest_point_on_triangle(const Point3& p, const Point3& a, const Point3& b, const Point3& c);

struct DistanceStats {
  double chamfer = 0.0;    // mean
  double hausdorff = 0.0;  // max
};
// one-sided, from points to the mesh
DistanceStats point_to_mesh_distances(std::span<const Point3> points, const TriangleMesh& mesh);

struct EdgeStats {
  std::size_t edges = 0;
  std::size_t boundary_edges = 0;
  std::size_t nonmanifold_edges = 0;
  std::size_t nonmanifold_vertices = 0;
  std::size_t inconsistent_orientation = 0;
};
EdgeStats edge_stats(const TriangleMesh& mesh);
bool is_watertight(const TriangleMesh& mesh);
bool is_manifold(const TriangleMesh& mesh);

struct Topology {
  int components = 0;
  std::vector<int> genus;  // per component, -1 for open components
};
// connected components over shared edges; throws ValidityError on non-manifold input
Topology topology(const TriangleMesh& mesh);

// counts of interior angles per bin over [0, 180] degrees
std::vector<std::size_t> angle_histogram(const TriangleMesh& mesh, int bins = 60);
double min_angle_deg(const TriangleMesh& mesh);
std::vector<double> facet_areas(const TriangleMesh& mesh);

// exact triangle-triangle test; vertices with identical coordinates are
// treated as shared, and contact through shared vertices or edges alone is
// not an intersection
bool triangles_intersect(const std::array<Point3, 3>& t, const std::array<Point3, 3>& u);
std::size_t count_self_intersections(const TriangleMesh& mesh, std::size_t stop_after = 0);

// analytic reference surface
struct TruthSurface {
  std::function<double(const Point3&)> distance;  // unsigned distance to the surface
  // smallest principal curvature radius at the surface point nearest to x;
  // +inf where the surface is flat
  std::function<double(const Point3&)> curvature_radius;
};

struct ErrorAudit {
  std::string measure;           // what the per-facet error is measured against
  std::vector<double> measured;  // per facet
  std::vector<double> bound;     // per facet, R^2 / (2 r), inf when exempt
  std::size_t violations = 0;
  std::size_t exempt = 0;  // flat truth surface
  double slack = 0.1;
  double r_min = 0.0;
  double global_bound = 0.0;  // R_min^2 / (2 I_R)
  double violation_fraction() const { return measured.empty() ? 0.0 : double(violations) / double(measured.size()); }
};
double global_error_bound(double r_min, double reach);

// Per-facet errors. To the zero set of f: the largest distance from a
// lattice of facet points to a sign change of f along the facet normal,
// searched up to max_distance. To points: the largest distance from the
// points whose closest facet it is (0 for facets no point is closest to).
std::vector<double> facet_error_to_level_set(const TriangleMesh& mesh, const std::function<double(const Point3&)>& f,
                                             double max_distance, double tolerance);
std::vector<double> facet_error_to_points(const TriangleMesh& mesh, std::span<const Point3> points);

// local bound R^2 / (2 r) with r the truth curvature radius at the facet
// centroid; ball_radii[i] is the surface Delaunay ball radius of triangle i
ErrorAudit audit_error_bound(const TriangleMesh& mesh, std::span<const double> ball_radii,
                             std::vector<double> measured, const TruthSurface& truth, double reach,
                             double slack = 0.1);

struct EvalReport {
  DistanceStats distances;
  std::vector<std::size_t> angle_histogram;
  double min_angle_deg = 0.0;
  std::size_t facet_count = 0;
  std::size_t vertex_count = 0;
  bool watertight = false;
  bool manifold = false;
  std::size_t self_intersections = 0;
  std::optional<Topology> topology;
  std::vector<ErrorAudit> audits;
};

// topology is skipped (with a warning) for non-manifold meshes
EvalReport evaluate(const TriangleMesh& mesh, std::span<const Point3> points);
nlohmann::ordered_json to_json(const EvalReport& report);
nlohmann::ordered_json to_json(const ErrorAudit& audit);
void write_histogram_csv(std::ostream& out, const std::vector<std::size_t>& histogram);

}  // namespace lfsr
