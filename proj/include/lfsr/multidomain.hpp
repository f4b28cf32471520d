#pragma once

#include "lfsr/delaunay.hpp"
#include "lfsr/kd_tree.hpp"
#include "lfsr/lfs_field.hpp"

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace lfsr {

enum class DomainLabel : std::uint8_t { envelope, shell, outside };

const char* to_string(DomainLabel l);

struct EnvelopeParams {
  int k = 12;
  double h = 0.0;  // Gaussian bandwidth; <= 0 means default_bandwidth
};

// I_u(x): Gaussian weighted mean of |(x - p) . n_p| over the k nearest p.
// Weights are taken relative to the nearest sample so they never underflow.
double envelope_function(const KdTree& index, std::span<const Vector3> normals, const Point3& x, int k,
                         double h);

// 2 x the mean distance from a sample to its k nearest neighbors
double default_bandwidth(const KdTree& index, int k);

struct RefinementCriteria {
  double radius_edge_bound = 2.0;
  double envelope_cell_size = 0.0;  // default reach
  double shell_cell_size = 0.0;     // default sphere radius / 8
  double sphere_facet_size = 0.0;   // default sphere radius / 8
  // optional tighter bound inside the envelope, evaluated at the barycenter
  std::function<double(const Point3&)> envelope_size_field;
  std::size_t vertex_budget = 2000000;
  // face-connected envelope components holding fewer samples than this are
  // relabeled shell; < 0 means the envelope k, 0 keeps every component
  int min_component_samples = -1;
};

struct RefinementStats {
  std::size_t sphere_vertices = 0;
  std::size_t steiner_vertices = 0;
  std::size_t boundary_vertices = 0;
  std::size_t envelope_cells = 0;
  std::size_t shell_cells = 0;
  std::size_t outside_cells = 0;
  std::size_t envelope_components = 0;
  std::size_t cast_off_cells = 0;
};

struct MultiDomain {
  Delaunay3 tri;
  std::vector<DomainLabel> labels;  // per cell id; infinite cells are outside
  BoundingSphere sphere;
  double reach = 0.0;
  RefinementCriteria criteria;
  RefinementStats stats;

  DomainLabel label(int c) const { return labels[static_cast<std::size_t>(c)]; }
};

// Delaunay refinement of the envelope {I_u <= reach} and the surrounding
// shell inside the bounding sphere. Throws BudgetExceeded when the vertex
// budget is exhausted.
MultiDomain refine_multidomain(const KdTree& index, std::span<const Vector3> normals,
                               const EnvelopeParams& envelope, const BoundingSphere& sphere, Reach reach,
                               RefinementCriteria criteria);

// cell measures used by the refinement and by audits
struct CellQuality {
  Point3 circumcenter;
  double circumradius = 0.0;
  double shortest_edge = 0.0;
  double radius_edge() const { return circumradius / shortest_edge; }
};
CellQuality cell_quality(const Delaunay3& tri, int c);

// text format: "vertices N", N lines "x y z", "cells M", M lines "a b c d label"
void write_tet_mesh(std::ostream& out, const MultiDomain& md);

}  // namespace lfsr
