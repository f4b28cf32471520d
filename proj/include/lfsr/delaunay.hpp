#pragma once

#include "lfsr/types.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace lfsr {

// Incremental 3D Delaunay triangulation (Bowyer-Watson) with an infinite
// vertex closing the convex hull. Finite cells are positively oriented.
// Cospherical ties are broken by a symbolic perturbation that lifts points
// with larger ids higher, so the result is unique for a given insertion set.
class Delaunay3 {
public:
  static constexpr int kInfinite = -1;

  struct Cell {
    std::array<int, 4> v{};  // vertex ids, kInfinite allowed
    std::array<int, 4> n{};  // n[i] is the neighbor opposite v[i]
    std::uint64_t stamp = 0;
    bool alive = false;
  };

  Delaunay3() = default;

  // Returns the vertex id; a point within 1e-12 of an existing vertex is not
  // inserted and that vertex id is returned with *inserted = false.
  int insert(const Point3& p, int hint_cell = -1, bool* inserted = nullptr);

  // Finite cell containing p, or an infinite cell whose hull facet p sees.
  // Returns -1 before the triangulation is three dimensional.
  int locate(const Point3& p, int hint_cell = -1) const;

  int dimension() const { return dim3_ ? 3 : -1; }
  std::size_t number_of_vertices() const { return points_.size(); }
  std::size_t number_of_cells() const { return cells_.size() - free_.size(); }
  std::size_t number_of_finite_cells() const;

  const Point3& point(int v) const { return points_[static_cast<std::size_t>(v)]; }
  std::span<const Point3> points() const { return points_; }

  // raw cell storage; skip entries with alive == false
  const std::vector<Cell>& cells() const { return cells_; }
  const Cell& cell(int c) const { return cells_[static_cast<std::size_t>(c)]; }
  bool is_alive(int c) const { return c >= 0 && static_cast<std::size_t>(c) < cells_.size() && cells_[c].alive; }
  bool is_infinite(int c) const;
  int infinite_index(int c) const;  // index of the infinite vertex or -1
  // cells created by the last insert call
  const std::vector<int>& last_created_cells() const { return created_; }

  // some cell incident to v (or -1 for vertices not yet in a cell)
  int vertex_cell(int v) const { return vertex_cell_[static_cast<std::size_t>(v)]; }
  std::vector<int> incident_cells(int v) const;
  // sorted unique finite edges (a < b)
  std::vector<std::array<int, 2>> finite_edges() const;

  // conflict test of point id q against cell c, including the perturbation
  bool in_conflict(int c, int q) const;

  Point3 circumcenter(int c) const;
  Point3 barycenter(int c) const;
  std::array<Point3, 4> cell_points(int c) const;

  // facet i of cell c listed so its right-hand normal points out of c
  std::array<int, 3> facet_vertices(int c, int i) const;
  int mirror_index(int c, int i) const;

private:
  bool in_conflict_finite(const std::array<int, 4>& v, int q) const;
  int orient_with(const std::array<int, 4>& v, int i, const Point3& p) const;
  int new_cell(const std::array<int, 4>& v);
  void build_initial(int a, int b, int c, int d);
  int insert_in_triangulation(int id, int hint);
  void link_cells(const std::vector<int>& cells);

  std::vector<Point3> points_;
  std::vector<Cell> cells_;
  std::vector<int> free_;
  std::vector<int> vertex_cell_;
  std::vector<int> pending_;
  std::vector<int> created_;
  std::uint64_t next_stamp_ = 1;
  bool dim3_ = false;
  int last_cell_ = -1;

  // scratch buffers for insertion
  std::vector<int> conflict_;
  std::vector<std::uint32_t> mark_;
  std::uint32_t mark_round_ = 0;
};

// circumcenter of four points (not robust to flat tetrahedra)
Point3 circumcenter(const Point3& a, const Point3& b, const Point3& c, const Point3& d);
// radius-edge ratio and related cell measures
double circumradius(const Point3& a, const Point3& b, const Point3& c, const Point3& d);
double shortest_edge(const Point3& a, const Point3& b, const Point3& c, const Point3& d);

}  // namespace lfsr
