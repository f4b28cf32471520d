#include "lfsr/delaunay.hpp"

#include "lfsr/predicates.hpp"

#include <algorithm>
#include <tuple>

namespace lfsr {

namespace {

constexpr int kFacet[4][3] = {{1, 3, 2}, {0, 2, 3}, {0, 3, 1}, {0, 1, 2}};
constexpr double kDuplicateTolerance = 1e-12;

}  // namespace

Point3 circumcenter(const Point3& a, const Point3& b, const Point3& c, const Point3& d) {
  const Vector3 ba = b - a, ca = c - a, da = d - a;
  const double denom = 2.0 * ba.dot(ca.cross(da));
  const Vector3 num = ba.squaredNorm() * ca.cross(da) + ca.squaredNorm() * da.cross(ba) +
                      da.squaredNorm() * ba.cross(ca);
  return a + num / denom;
}

double circumradius(const Point3& a, const Point3& b, const Point3& c, const Point3& d) {
  return (circumcenter(a, b, c, d) - a).norm();
}

double shortest_edge(const Point3& a, const Point3& b, const Point3& c, const Point3& d) {
  const double e = std::min({(a - b).squaredNorm(), (a - c).squaredNorm(), (a - d).squaredNorm(),
                             (b - c).squaredNorm(), (b - d).squaredNorm(), (c - d).squaredNorm()});
  return std::sqrt(e);
}

bool Delaunay3::is_infinite(int c) const { return infinite_index(c) >= 0; }

int Delaunay3::infinite_index(int c) const {
  const auto& v = cells_[static_cast<std::size_t>(c)].v;
  for (int i = 0; i < 4; ++i)
    if (v[i] == kInfinite) return i;
  return -1;
}

std::size_t Delaunay3::number_of_finite_cells() const {
  std::size_t n = 0;
  for (std::size_t c = 0; c < cells_.size(); ++c)
    if (cells_[c].alive && !is_infinite(static_cast<int>(c))) ++n;
  return n;
}

int Delaunay3::orient_with(const std::array<int, 4>& v, int i, const Point3& p) const {
  const Point3* q[4];
  for (int j = 0; j < 4; ++j) q[j] = j == i ? &p : &points_[static_cast<std::size_t>(v[j])];
  return orient3d(*q[0], *q[1], *q[2], *q[3]);
}

bool Delaunay3::in_conflict_finite(const std::array<int, 4>& v, int q) const {
  const Point3& e = points_[static_cast<std::size_t>(q)];
  const int s = insphere(point(v[0]), point(v[1]), point(v[2]), point(v[3]), e);
  if (s != 0) return s > 0;
  // symbolic perturbation: walk the five points by decreasing id
  std::array<int, 5> ids = {v[0], v[1], v[2], v[3], q};
  std::sort(ids.begin(), ids.end(), std::greater<int>());
  for (int id : ids) {
    if (id == q) return false;
    const int i = static_cast<int>(std::find(v.begin(), v.end(), id) - v.begin());
    const int o = orient_with(v, i, e);
    if (o != 0) return o > 0;
  }
  return false;
}

bool Delaunay3::in_conflict(int c, int q) const {
  const Cell& cell = cells_[static_cast<std::size_t>(c)];
  const int k = infinite_index(c);
  if (k < 0) return in_conflict_finite(cell.v, q);
  const int o = orient_with(cell.v, k, points_[static_cast<std::size_t>(q)]);
  if (o != 0) return o > 0;
  // on the hull plane: same answer as the finite cell behind the facet
  return in_conflict_finite(cells_[static_cast<std::size_t>(cell.n[k])].v, q);
}

int Delaunay3::new_cell(const std::array<int, 4>& v) {
  int id;
  if (!free_.empty()) {
    id = free_.back();
    free_.pop_back();
  } else {
    id = static_cast<int>(cells_.size());
    cells_.emplace_back();
  }
  if (mark_.size() < cells_.size()) mark_.resize(cells_.size(), 0);
  Cell& c = cells_[static_cast<std::size_t>(id)];
  c.v = v;
  c.n = {-1, -1, -1, -1};
  c.stamp = next_stamp_++;
  c.alive = true;
  return id;
}

void Delaunay3::link_cells(const std::vector<int>& cells) {
  std::vector<std::tuple<std::array<int, 3>, int, int>> facets;
  for (int c : cells)
    for (int i = 0; i < 4; ++i) {
      std::array<int, 3> key;
      int k = 0;
      for (int j = 0; j < 4; ++j)
        if (j != i) key[k++] = cells_[c].v[j];
      std::sort(key.begin(), key.end());
      facets.emplace_back(key, c, i);
    }
  std::sort(facets.begin(), facets.end());
  for (std::size_t f = 0; f + 1 < facets.size(); f += 2) {
    if (std::get<0>(facets[f]) != std::get<0>(facets[f + 1]))
      throw ContractError("triangulation facets do not pair up");
    cells_[std::get<1>(facets[f])].n[std::get<2>(facets[f])] = std::get<1>(facets[f + 1]);
    cells_[std::get<1>(facets[f + 1])].n[std::get<2>(facets[f + 1])] = std::get<1>(facets[f]);
  }
}

void Delaunay3::build_initial(int a, int b, int c, int d) {
  if (orient3d(point(a), point(b), point(c), point(d)) < 0) std::swap(a, b);
  std::vector<int> cells;
  const std::array<int, 4> fv = {a, b, c, d};
  cells.push_back(new_cell(fv));
  for (int i = 0; i < 4; ++i) {
    std::array<int, 4> v = fv;
    v[i] = kInfinite;
    // odd permutation of the finite vertices flips the orientation
    const int j = (i + 1) % 4, k = (i + 2) % 4;
    std::swap(v[j], v[k]);
    cells.push_back(new_cell(v));
  }
  link_cells(cells);
  for (int cc : cells)
    for (int v : cells_[cc].v)
      if (v != kInfinite) vertex_cell_[static_cast<std::size_t>(v)] = cc;
  last_cell_ = cells.front();
  created_ = cells;
  dim3_ = true;
}

int Delaunay3::locate(const Point3& p, int hint_cell) const {
  if (!dim3_) return -1;
  int c = is_alive(hint_cell) ? hint_cell : (is_alive(last_cell_) ? last_cell_ : -1);
  if (c < 0) {
    for (std::size_t i = 0; i < cells_.size(); ++i)
      if (cells_[i].alive) {
        c = static_cast<int>(i);
        break;
      }
  }
  const std::size_t max_steps = 4 * cells_.size() + 64;
  for (std::size_t step = 0; step < max_steps; ++step) {
    const Cell& cell = cells_[static_cast<std::size_t>(c)];
    const int k = infinite_index(c);
    if (k >= 0) {
      if (orient_with(cell.v, k, p) > 0) return c;
      c = cell.n[k];
      continue;
    }
    bool moved = false;
    const int start = static_cast<int>(step % 4);
    for (int t = 0; t < 4; ++t) {
      const int i = (start + t) % 4;
      if (orient_with(cell.v, i, p) < 0) {
        c = cell.n[i];
        moved = true;
        break;
      }
    }
    if (!moved) return c;
  }
  // the walk cannot cycle on a Delaunay triangulation; scan as a safety net
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    if (!cells_[i].alive) continue;
    const int ci = static_cast<int>(i);
    const int k = infinite_index(ci);
    if (k >= 0) {
      if (orient_with(cells_[i].v, k, p) > 0) return ci;
      continue;
    }
    bool inside = true;
    for (int j = 0; j < 4 && inside; ++j) inside = orient_with(cells_[i].v, j, p) >= 0;
    if (inside) return ci;
  }
  throw ContractError("point location failed");
}

int Delaunay3::insert(const Point3& p, int hint_cell, bool* inserted) {
  if (!p.allFinite()) throw InputError("cannot insert a non-finite point");
  if (inserted) *inserted = true;
  created_.clear();
  if (!dim3_) {
    for (int q : pending_)
      if ((point(q) - p).norm() <= kDuplicateTolerance) {
        if (inserted) *inserted = false;
        return q;
      }
    const int id = static_cast<int>(points_.size());
    points_.push_back(p);
    vertex_cell_.push_back(-1);
    pending_.push_back(id);
    // look for four affinely independent points
    const int a = pending_[0];
    int b = -1, c = -1, d = -1;
    for (int q : pending_)
      if (q != a) {
        b = q;
        break;
      }
    if (b < 0) return id;
    for (int q : pending_) {
      if (q == a || q == b) continue;
      const Point3& pa = point(a);
      const bool collinear = orient3d(pa, point(b), point(q), pa + Vector3::UnitX()) == 0 &&
                             orient3d(pa, point(b), point(q), pa + Vector3::UnitY()) == 0 &&
                             orient3d(pa, point(b), point(q), pa + Vector3::UnitZ()) == 0;
      if (!collinear) {
        c = q;
        break;
      }
    }
    if (c < 0) return id;
    for (int q : pending_) {
      if (q == a || q == b || q == c) continue;
      if (orient3d(point(a), point(b), point(c), point(q)) != 0) {
        d = q;
        break;
      }
    }
    if (d < 0) return id;
    build_initial(a, b, c, d);
    std::vector<int> rest;
    for (int q : pending_)
      if (q != a && q != b && q != c && q != d) rest.push_back(q);
    pending_.clear();
    for (int q : rest) insert_in_triangulation(q, last_cell_);
    created_.clear();
    for (std::size_t i = 0; i < cells_.size(); ++i)
      if (cells_[i].alive) created_.push_back(static_cast<int>(i));
    return id;
  }

  const int loc = locate(p, hint_cell);
  for (int v : cells_[static_cast<std::size_t>(loc)].v)
    if (v != kInfinite && (point(v) - p).norm() <= kDuplicateTolerance) {
      if (inserted) *inserted = false;
      return v;
    }
  const int id = static_cast<int>(points_.size());
  points_.push_back(p);
  vertex_cell_.push_back(-1);
  insert_in_triangulation(id, loc);
  return id;
}

int Delaunay3::insert_in_triangulation(int id, int hint) {
  const Point3& p = points_[static_cast<std::size_t>(id)];
  const int start = locate(p, hint);
  created_.clear();

  mark_round_ += 2;
  if (mark_round_ < 2) {  // wrapped
    std::fill(mark_.begin(), mark_.end(), 0);
    mark_round_ = 2;
  }
  const std::uint32_t in_mark = mark_round_, out_mark = mark_round_ + 1;
  if (mark_.size() < cells_.size()) mark_.resize(cells_.size(), 0);

  conflict_.clear();
  std::vector<std::pair<int, int>> boundary;
  conflict_.push_back(start);
  mark_[static_cast<std::size_t>(start)] = in_mark;
  for (std::size_t head = 0; head < conflict_.size(); ++head) {
    const int c = conflict_[head];
    for (int i = 0; i < 4; ++i) {
      const int nb = cells_[static_cast<std::size_t>(c)].n[i];
      const std::uint32_t m = mark_[static_cast<std::size_t>(nb)];
      if (m == in_mark) continue;
      if (m != out_mark && in_conflict(nb, id)) {
        mark_[static_cast<std::size_t>(nb)] = in_mark;
        conflict_.push_back(nb);
      } else {
        mark_[static_cast<std::size_t>(nb)] = out_mark;
        boundary.emplace_back(c, i);
      }
    }
  }

  std::vector<std::tuple<std::array<int, 2>, int, int>> edges;
  edges.reserve(boundary.size() * 3);
  for (const auto& [c, i] : boundary) {
    std::array<int, 4> nv = cells_[static_cast<std::size_t>(c)].v;
    nv[i] = id;
    const int nc = new_cell(nv);
    const int nb = cells_[static_cast<std::size_t>(c)].n[i];
    cells_[static_cast<std::size_t>(nc)].n[i] = nb;
    auto& nbn = cells_[static_cast<std::size_t>(nb)].n;
    for (int j = 0; j < 4; ++j)
      if (nbn[j] == c) nbn[j] = nc;
    for (int j = 0; j < 4; ++j) {
      if (j == i) continue;
      std::array<int, 2> key;
      int k = 0;
      for (int t = 0; t < 4; ++t)
        if (t != i && t != j) key[k++] = nv[t];
      if (key[0] > key[1]) std::swap(key[0], key[1]);
      edges.emplace_back(key, nc, j);
    }
    created_.push_back(nc);
  }
  std::sort(edges.begin(), edges.end());
  for (std::size_t e = 0; e + 1 < edges.size(); e += 2) {
    if (std::get<0>(edges[e]) != std::get<0>(edges[e + 1]))
      throw ContractError("cavity boundary is not a closed surface");
    cells_[std::get<1>(edges[e])].n[std::get<2>(edges[e])] = std::get<1>(edges[e + 1]);
    cells_[std::get<1>(edges[e + 1])].n[std::get<2>(edges[e + 1])] = std::get<1>(edges[e]);
  }
  for (int c : conflict_) {
    cells_[static_cast<std::size_t>(c)].alive = false;
    free_.push_back(c);
  }
  for (int c : created_)
    for (int v : cells_[static_cast<std::size_t>(c)].v)
      if (v != kInfinite) vertex_cell_[static_cast<std::size_t>(v)] = c;
  last_cell_ = created_.front();
  return id;
}

std::vector<int> Delaunay3::incident_cells(int v) const {
  std::vector<int> out;
  const int start = vertex_cell_[static_cast<std::size_t>(v)];
  if (start < 0) return out;
  out.push_back(start);
  for (std::size_t h = 0; h < out.size(); ++h) {
    const Cell& c = cells_[static_cast<std::size_t>(out[h])];
    for (int i = 0; i < 4; ++i) {
      if (c.v[i] == v) continue;
      const int nb = c.n[i];
      if (std::find(out.begin(), out.end(), nb) == out.end()) out.push_back(nb);
    }
  }
  return out;
}

std::vector<std::array<int, 2>> Delaunay3::finite_edges() const {
  std::vector<std::array<int, 2>> edges;
  for (const auto& c : cells_) {
    if (!c.alive) continue;
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) {
        int a = c.v[i], b = c.v[j];
        if (a == kInfinite || b == kInfinite) continue;
        if (a > b) std::swap(a, b);
        edges.push_back({a, b});
      }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

Point3 Delaunay3::circumcenter(int c) const {
  const auto& v = cells_[static_cast<std::size_t>(c)].v;
  return lfsr::circumcenter(point(v[0]), point(v[1]), point(v[2]), point(v[3]));
}

Point3 Delaunay3::barycenter(int c) const {
  const auto& v = cells_[static_cast<std::size_t>(c)].v;
  return 0.25 * (point(v[0]) + point(v[1]) + point(v[2]) + point(v[3]));
}

std::array<Point3, 4> Delaunay3::cell_points(int c) const {
  const auto& v = cells_[static_cast<std::size_t>(c)].v;
  return {point(v[0]), point(v[1]), point(v[2]), point(v[3])};
}

std::array<int, 3> Delaunay3::facet_vertices(int c, int i) const {
  const auto& v = cells_[static_cast<std::size_t>(c)].v;
  return {v[kFacet[i][0]], v[kFacet[i][1]], v[kFacet[i][2]]};
}

int Delaunay3::mirror_index(int c, int i) const {
  const int nb = cells_[static_cast<std::size_t>(c)].n[i];
  for (int j = 0; j < 4; ++j)
    if (cells_[static_cast<std::size_t>(nb)].n[j] == c) return j;
  throw ContractError("adjacency is not involutive");
}

}  // namespace lfsr
