#include "lfsr/jet_fitting.hpp"

#include "lfsr/log.hpp"
#include "lfsr/parallel.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace lfsr {

namespace {

struct PcaFrame {
  Eigen::Matrix3d axes;  // columns: largest, middle, smallest spread
  Eigen::Vector3d spread;
};

PcaFrame pca(std::span<const Point3> pts) {
  Point3 c = Point3::Zero();
  for (const auto& p : pts) c += p;
  c /= static_cast<double>(pts.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : pts) cov += (p - c) * (p - c).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  PcaFrame f;
  // eigenvalues ascending
  f.axes.col(0) = es.eigenvectors().col(2);
  f.axes.col(1) = es.eigenvectors().col(1);
  f.axes.col(2) = es.eigenvectors().col(0);
  f.spread = Eigen::Vector3d(es.eigenvalues()[2], es.eigenvalues()[1], es.eigenvalues()[0]);
  return f;
}

}  // namespace

Vector3 plane_normal(std::span<const Point3> neighborhood) {
  if (neighborhood.size() < 3) throw DegenerateFitError("too few samples for a plane");
  const PcaFrame f = pca(neighborhood);
  if (!(f.spread[1] > 1e-12 * f.spread[0]) || !(f.spread[0] > 0.0))
    throw DegenerateFitError("samples are collinear or coincident");
  return f.axes.col(2).normalized();
}

MongeForm fit_monge(std::span<const Point3> neighborhood, const Point3& x, int degree) {
  if (degree < 2) throw ContractError("jet degree must be at least 2");
  const int nc = (degree + 1) * (degree + 2) / 2;
  if (static_cast<int>(neighborhood.size()) < nc)
    throw DegenerateFitError("not enough samples for the jet degree");

  const PcaFrame f = pca(neighborhood);
  if (!(f.spread[0] > 0.0) || !(f.spread[1] > 1e-12 * f.spread[0]))
    throw DegenerateFitError("samples are collinear or coincident");

  Eigen::Matrix3d R = f.axes;
  if (R.determinant() < 0) R.col(2) = -R.col(2);

  const int n = static_cast<int>(neighborhood.size());
  Eigen::MatrixX3d local(n, 3);
  double scale = 0.0;
  for (int i = 0; i < n; ++i) {
    local.row(i) = (R.transpose() * (neighborhood[i] - x)).transpose();
    scale = std::max(scale, local.row(i).head<2>().norm());
  }
  if (!(scale > 0.0)) throw DegenerateFitError("samples project to a single point");

  // monomials u^i v^j, i + j <= degree, ordered by total degree
  Eigen::MatrixXd A(n, nc);
  Eigen::VectorXd rhs(n);
  for (int r = 0; r < n; ++r) {
    const double u = local(r, 0) / scale, v = local(r, 1) / scale;
    int c = 0;
    for (int d = 0; d <= degree; ++d)
      for (int j = 0; j <= d; ++j) A(r, c++) = std::pow(u, d - j) * std::pow(v, j);
    rhs[r] = local(r, 2) / scale;
  }
  const Eigen::MatrixXd N = A.transpose() * A;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ns(N, Eigen::EigenvaluesOnly);
  if (!(ns.eigenvalues()[0] > 1e-12 * ns.eigenvalues()[nc - 1]))
    throw DegenerateFitError("jet system is rank deficient");
  const Eigen::VectorXd a = N.ldlt().solve(A.transpose() * rhs);

  // coefficient order: 1, u, v, u^2, uv, v^2, ...
  const double h0 = a[0] * scale;
  const double fu = a[1], fv = a[2];
  const double fuu = 2.0 * a[3] / scale, fuv = a[4] / scale, fvv = 2.0 * a[5] / scale;

  const double w = std::sqrt(1.0 + fu * fu + fv * fv);
  Eigen::Matrix2d I, II;
  I << 1.0 + fu * fu, fu * fv, fu * fv, 1.0 + fv * fv;
  II << fuu, fuv, fuv, fvv;
  II /= w;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix2d> ges(II, I);
  const Eigen::Vector2d kappa = ges.eigenvalues();
  const int i1 = std::abs(kappa[0]) >= std::abs(kappa[1]) ? 0 : 1;

  const Eigen::Vector3d xu(1.0, 0.0, fu), xv(0.0, 1.0, fv);
  const Eigen::Vector3d n_local = Eigen::Vector3d(-fu, -fv, 1.0) / w;
  Eigen::Vector3d t1 = ges.eigenvectors()(0, i1) * xu + ges.eigenvectors()(1, i1) * xv;

  MongeForm m;
  m.origin = x + R * Eigen::Vector3d(0.0, 0.0, h0);
  m.n = (R * n_local).normalized();
  Vector3 d1 = R * t1;
  d1 -= d1.dot(m.n) * m.n;
  m.d1 = d1.normalized();
  m.d2 = m.n.cross(m.d1);
  m.k1 = kappa[i1];
  m.k2 = kappa[1 - i1];
  return m;
}

MongeForm fit_monge(const KdTree& index, const Point3& x, const JetParams& params) {
  if (params.k_neighbors < params.required_samples())
    throw ContractError("k_neighbors is below the sample count needed by the jet degree");
  thread_local std::vector<Neighbor> nn;
  thread_local std::vector<Point3> pts;
  index.k_nearest(x, params.k_neighbors, nn);
  pts.clear();
  for (const auto& q : nn) pts.push_back(index.point(q.id));
  return fit_monge(pts, x, params.degree);
}

double curvature_radius(const MongeForm& m, double clamp_max) {
  if (!(clamp_max > 0.0)) throw ContractError("curvature clamp must be positive");
  const double k = std::abs(m.k1);
  if (k == 0.0) return clamp_max;
  return std::min(1.0 / k, clamp_max);
}

std::vector<Vector3> estimate_normals(const KdTree& index, const JetParams& params) {
  std::vector<Vector3> normals(index.size());
  parallel_for(index.size(), [&](std::size_t i) {
    const Point3& p = index.point(static_cast<int>(i));
    try {
      normals[i] = fit_monge(index, p, params).n;
    } catch (const DegenerateFitError&) {
      std::vector<Point3> pts;
      for (const auto& q : index.k_nearest(p, params.k_neighbors)) pts.push_back(index.point(q.id));
      try {
        normals[i] = plane_normal(pts);
      } catch (const DegenerateFitError&) {
        normals[i] = Vector3::UnitZ();
      }
    }
  });
  return normals;
}

}  // namespace lfsr
