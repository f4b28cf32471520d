#include "lfsr/sign_solver.hpp"

#include "lfsr/distance.hpp"
#include "lfsr/lipschitz_search.hpp"
#include "lfsr/log.hpp"
#include "lfsr/parallel.hpp"
#include "lfsr/predicates.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

namespace lfsr {

namespace {

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

}  // namespace

int guess_segment_sign(const Point3& a, const Point3& b, const KdTree& index, std::span<const Vector3> normals,
                       double eps, const SignGuessOptions& opt) {
  const Vector3 ab = b - a;
  const double len = ab.norm();
  if (!(len > 0.0)) return 1;
  const Vector3 dir = ab / len;
  const EnvelopeParams& env = opt.envelope;
  auto f = [&](double t) { return envelope_function(index, normals, a + t * dir, env.k, env.h); };

  SearchOptions so;
  so.max_hits = 1;
  CrossingSet hits;
  try {
    hits = dichotomic_search(f, 0.0, len, eps, so);
  } catch (const SearchFailure&) {
    // treat an unresolved search as a contact at the midpoint
    hits.hits.push_back(0.5 * len);
  }
  if (opt.rule == SignGuessRule::sublevel) return hits.empty() ? 1 : -1;

  double contact;
  if (!hits.empty()) {
    contact = hits.hits.front();
  } else {
    const double fa = f(0.0), fb = f(len);
    if (fa > eps && fb > eps) return 1;
    contact = fa <= fb ? 0.0 : len;
  }
  const Point3 x = a + contact * dir;
  thread_local std::vector<Neighbor> nn;
  index.k_nearest(x, std::max(1, opt.side_votes), nn);
  int opposite = 0;
  for (const auto& q : nn) {
    const Point3& p = index.point(q.id);
    const Vector3& n = normals[static_cast<std::size_t>(q.id)];
    const double sa = (a - p).dot(n), sb = (b - p).dot(n);
    if (sa * sb < 0.0) ++opposite;
  }
  return 2 * opposite > static_cast<int>(nn.size()) ? -1 : 1;
}

std::vector<EdgeSignGuess> guess_edge_signs(const MultiDomain& md, const KdTree& index,
                                            std::span<const Vector3> normals, const SignGuessOptions& options) {
  SignGuessOptions opt = options;
  if (opt.envelope.h <= 0.0) opt.envelope.h = default_bandwidth(index, opt.envelope.k);
  const Delaunay3& tri = md.tri;

  // an edge is interior to the envelope when all its incident cells are
  std::vector<std::pair<std::uint64_t, bool>> incid;
  incid.reserve(tri.number_of_cells() * 6);
  for (std::size_t c = 0; c < tri.cells().size(); ++c) {
    const auto& cell = tri.cells()[c];
    if (!cell.alive) continue;
    const bool env = !tri.is_infinite(static_cast<int>(c)) && md.labels[c] == DomainLabel::envelope;
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) {
        if (cell.v[i] == Delaunay3::kInfinite || cell.v[j] == Delaunay3::kInfinite) continue;
        incid.emplace_back(edge_key(cell.v[i], cell.v[j]), env);
      }
  }
  std::sort(incid.begin(), incid.end());
  std::vector<EdgeSignGuess> guesses;
  std::vector<char> interior;
  for (std::size_t i = 0; i < incid.size();) {
    std::size_t j = i;
    bool all = true;
    while (j < incid.size() && incid[j].first == incid[i].first) {
      all = all && incid[j].second;
      ++j;
    }
    EdgeSignGuess g;
    g.v0 = static_cast<int>(incid[i].first >> 32);
    g.v1 = static_cast<int>(incid[i].first & 0xffffffffu);
    g.sign = 1;
    guesses.push_back(g);
    interior.push_back(all ? 1 : 0);
    i = j;
  }

  const double eps = 0.5 * md.reach;
  parallel_for(guesses.size(), [&](std::size_t e) {
    if (!interior[e]) return;
    guesses[e].sign = guess_segment_sign(tri.point(guesses[e].v0), tri.point(guesses[e].v1), index, normals, eps, opt);
  });
  return guesses;
}

Eigen::Vector4d barycentric(const Delaunay3& tri, int c, const Point3& p) {
  const auto q = tri.cell_points(c);
  Eigen::Matrix3d T;
  T.col(0) = q[0] - q[3];
  T.col(1) = q[1] - q[3];
  T.col(2) = q[2] - q[3];
  const Eigen::Vector3d l = T.partialPivLu().solve(p - q[3]);
  return Eigen::Vector4d(l[0], l[1], l[2], 1.0 - l[0] - l[1] - l[2]);
}

Eigen::SparseMatrix<double> KktSystem::full_matrix() const {
  const int n = num_vertices;
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(hessian.nonZeros()) + 2 * static_cast<std::size_t>(n));
  for (int k = 0; k < hessian.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(hessian, k); it; ++it)
      t.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  for (int i = 0; i < n; ++i) {
    t.emplace_back(i, n, 1.0);
    t.emplace_back(n, i, 1.0);
  }
  Eigen::SparseMatrix<double> K(n + 1, n + 1);
  K.setFromTriplets(t.begin(), t.end());
  return K;
}

Eigen::VectorXd KktSystem::rhs() const {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(num_vertices + 1);
  b[num_vertices] = num_vertices;
  return b;
}

double KktSystem::energy(const Eigen::VectorXd& x) const {
  const double es = (S * x).squaredNorm();
  const double eb = B.rows() > 0 ? (B * x).squaredNorm() : 0.0;
  return es + lambda * eb;
}

KktSystem assemble_kkt(int num_vertices, std::span<const EdgeSignGuess> guesses,
                       const std::vector<Eigen::Triplet<double>>& data_rows, int num_data_rows, double lambda) {
  if (lambda < 0.0) throw ContractError("lambda must be non-negative");
  KktSystem sys;
  sys.num_vertices = num_vertices;
  sys.lambda = lambda;
  std::vector<Eigen::Triplet<double>> st;
  st.reserve(guesses.size() * 2);
  for (std::size_t e = 0; e < guesses.size(); ++e) {
    st.emplace_back(static_cast<int>(e), guesses[e].v0, 1.0);
    st.emplace_back(static_cast<int>(e), guesses[e].v1, -static_cast<double>(guesses[e].sign));
  }
  sys.S.resize(static_cast<int>(guesses.size()), num_vertices);
  sys.S.setFromTriplets(st.begin(), st.end());
  sys.B.resize(num_data_rows, num_vertices);
  sys.B.setFromTriplets(data_rows.begin(), data_rows.end());
  Eigen::SparseMatrix<double> H = Eigen::SparseMatrix<double>(sys.S.transpose()) * sys.S;
  if (num_data_rows > 0 && lambda > 0.0)
    H += lambda * (Eigen::SparseMatrix<double>(sys.B.transpose()) * sys.B);
  sys.hessian = 2.0 * H;
  sys.hessian.makeCompressed();
  return sys;
}

KktSystem assemble_kkt(const Delaunay3& tri, std::span<const EdgeSignGuess> guesses, std::span<const Point3> data,
                       double lambda) {
  const int nv = static_cast<int>(tri.number_of_vertices());
  // walk from the cell of the nearest triangulation vertex
  const KdTree vertex_index(tri.points());
  std::vector<std::array<double, 4>> coords(data.size());
  std::vector<std::array<int, 4>> verts(data.size());
  parallel_for(data.size(), [&](std::size_t i) {
    const Neighbor nv_near = vertex_index.nearest(data[i]);
    const int c = tri.locate(data[i], tri.vertex_cell(nv_near.id));
    if (c < 0 || tri.is_infinite(c)) throw ContractError("data point lies outside the triangulation");
    const Eigen::Vector4d l = barycentric(tri, c, data[i]);
    for (int j = 0; j < 4; ++j) {
      coords[i][j] = l[j];
      verts[i][j] = tri.cell(c).v[j];
    }
  });
  std::vector<Eigen::Triplet<double>> rows;
  rows.reserve(data.size() * 4);
  for (std::size_t i = 0; i < data.size(); ++i)
    for (int j = 0; j < 4; ++j) rows.emplace_back(static_cast<int>(i), verts[i][j], coords[i][j]);
  return assemble_kkt(nv, guesses, rows, static_cast<int>(data.size()), lambda);
}

double kkt_residual(const KktSystem& system, const Eigen::VectorXd& x, double z) {
  const int n = system.num_vertices;
  const Eigen::VectorXd r1 = system.hessian * x + Eigen::VectorXd::Constant(n, z);
  const double r2 = x.sum() - n;
  return std::sqrt(r1.squaredNorm() + r2 * r2) / std::max(1, n);
}

SignedField solve_signed_field(const KktSystem& system, double tol, int max_iter) {
  const int n = system.num_vertices;
  if (n <= 0) throw ContractError("empty system");
  const Eigen::SparseMatrix<double>& H = system.hessian;

  Eigen::VectorXd dinv(n);
  for (int i = 0; i < n; ++i) {
    const double d = H.coeff(i, i);
    dinv[i] = d > 0.0 ? 1.0 / d : 1.0;
  }
  const double dsum = dinv.sum();
  // projected preconditioner: D^-1 r minus its component that leaves 1^T x fixed
  auto precondition = [&](const Eigen::VectorXd& r) {
    Eigen::VectorXd g = dinv.cwiseProduct(r);
    const double mu = g.sum() / dsum;
    g -= mu * dinv;
    return g;
  };
  auto projected_norm = [&](const Eigen::VectorXd& r) {
    return (r.array() - r.mean()).matrix().norm();
  };

  SignedField out;
  Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd r = H * x;
  Eigen::VectorXd g = precondition(r);
  Eigen::VectorXd d = -g;
  double rg = r.dot(g);
  const double target = tol * n;
  int it = 0;
  double res = projected_norm(r);
  while (res > target) {
    if (it >= max_iter) {
      out.residual = res / n;
      throw SolverError("signed field solve did not converge (relative residual " + std::to_string(res / n) + ")",
                        res / n);
    }
    const Eigen::VectorXd Hd = H * d;
    const double dHd = d.dot(Hd);
    if (!(dHd > 0.0)) break;
    const double alpha = rg / dHd;
    x += alpha * d;
    r += alpha * Hd;
    g = precondition(r);
    const double rg_new = r.dot(g);
    d = -g + (rg_new / rg) * d;
    rg = rg_new;
    res = projected_norm(r);
    ++it;
  }
  // re-impose the constraint exactly against drift
  x.array() += (n - x.sum()) / n;
  out.values = x;
  const Eigen::VectorXd hx = H * x;
  out.lagrange = -hx.mean();
  out.iterations = it;
  out.residual = kkt_residual(system, x, out.lagrange);
  log_info("sign solve: ", it, " iterations, relative residual ", out.residual);
  return out;
}

void write_triplets(std::ostream& out, const Eigen::SparseMatrix<double>& m) {
  out << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n' << std::setprecision(17);
  for (int k = 0; k < m.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it)
      out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

SignedRobustDistance::SignedRobustDistance(const Delaunay3& tri, const Eigen::VectorXd& values, const KdTree& index,
                                           int k)
    : tri_(tri), values_(values), index_(index), k_(k) {
  if (static_cast<std::size_t>(values.size()) != tri.number_of_vertices())
    throw ContractError("one signed value per triangulation vertex is required");
  // hull vertices decide the sign beyond the triangulation
  double hull_sum = 0.0;
  for (std::size_t c = 0; c < tri.cells().size(); ++c) {
    const auto& cell = tri.cells()[c];
    if (!cell.alive || !tri.is_infinite(static_cast<int>(c))) continue;
    for (int v : cell.v)
      if (v != Delaunay3::kInfinite) hull_sum += values[v];
  }
  exterior_sign_ = hull_sum >= 0.0 ? 1 : -1;
}

double SignedRobustDistance::interpolate(const Point3& x, bool* inside) const {
  thread_local int hint = -1;
  const int c = tri_.locate(x, tri_.is_alive(hint) ? hint : -1);
  if (c < 0 || tri_.is_infinite(c)) {
    if (inside) *inside = false;
    if (c >= 0) hint = c;
    return sign_flip_ * exterior_sign_ * std::numeric_limits<double>::infinity();
  }
  hint = c;
  if (inside) *inside = true;
  const Eigen::Vector4d l = barycentric(tri_, c, x);
  const auto& v = tri_.cell(c).v;
  double s = 0.0;
  for (int j = 0; j < 4; ++j) s += l[j] * values_[v[j]];
  return sign_flip_ * s;
}

double SignedRobustDistance::distance(const Point3& x) const { return robust_distance(index_, x, k_); }

double SignedRobustDistance::operator()(const Point3& x) const {
  bool inside = false;
  const double s = interpolate(x, &inside);
  if (!inside) throw DomainError("query point lies outside the triangulation");
  return (s >= 0.0 ? 1.0 : -1.0) * distance(x);
}

}  // namespace lfsr
