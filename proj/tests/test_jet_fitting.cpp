#include <doctest.h>

#include <lfsr/jet_fitting.hpp>
#include <lfsr/kd_tree.hpp>

#include <Eigen/Geometry>

#include <random>

using namespace lfsr;

namespace {

// local patch of an analytic surface around the north pole
std::vector<Point3> sphere_patch(double R, double extent, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-extent, extent);
  std::vector<Point3> pts;
  while (int(pts.size()) < n) {
    double x = u(rng), y = u(rng);
    if (x * x + y * y > extent * extent) continue;
    pts.emplace_back(x, y, std::sqrt(R * R - x * x - y * y));
  }
  return pts;
}

std::vector<Point3> cylinder_patch(double r, double extent, int n, std::uint64_t seed) {
  // axis along y; top of the cylinder at z = r
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-extent, extent);
  std::vector<Point3> pts;
  for (int i = 0; i < n; ++i) {
    double a = u(rng) / r, y = u(rng);
    pts.emplace_back(r * std::sin(a), y, r * std::cos(a));
  }
  return pts;
}

void check_frame(const MongeForm& m) {
  Eigen::Matrix3d F;
  F << m.d1, m.d2, m.n;
  CHECK((F.transpose() * F - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(std::abs(m.k1) >= std::abs(m.k2));
}

}  // namespace

TEST_CASE("jet fit of a plane") {
  std::vector<Point3> pts;
  for (int i = -3; i <= 3; ++i)
    for (int j = -3; j <= 3; ++j) pts.emplace_back(0.1 * i + 0.013 * j * j, 0.1 * j, 0.0);
  auto m = fit_monge(pts, Point3::Zero(), 2);
  check_frame(m);
  CHECK(std::abs(m.k1) < 1e-9);
  CHECK(std::abs(m.k2) < 1e-9);
  CHECK(std::abs(std::abs(m.n.z()) - 1.0) < 1e-12);
  CHECK(curvature_radius(m, 7.0) == 7.0);
}

TEST_CASE("jet fit of a sphere patch") {
  for (double R : {0.5, 1.0, 3.0}) {
    auto pts = sphere_patch(R, 0.05 * R, 60, 5);
    auto m = fit_monge(pts, Point3(0, 0, R), 2);
    check_frame(m);
    CHECK(std::abs(std::abs(m.k1) - 1.0 / R) <= 0.01 / R);
    CHECK(std::abs(std::abs(m.k2) - 1.0 / R) <= 0.01 / R);
    CHECK(curvature_radius(m, 100.0) == doctest::Approx(R).epsilon(0.02));
  }
}

TEST_CASE("jet fit of a cylinder patch") {
  double r = 0.5;
  auto pts = cylinder_patch(r, 0.05, 80, 9);
  auto m = fit_monge(pts, Point3(0, 0, r), 2);
  check_frame(m);
  CHECK(std::abs(std::abs(m.k1) - 1.0 / r) <= 0.01 / r);
  CHECK(std::abs(m.k2) <= 0.01 / r);
  // the principal direction of k1 runs around the axis
  CHECK(std::abs(m.d1.x()) > 0.99);
}

TEST_CASE("curvature radius") {
  MongeForm m;
  m.k1 = 0.5;
  CHECK(curvature_radius(m, 10.0) == 2.0);
  m.k1 = -0.5;
  CHECK(curvature_radius(m, 10.0) == 2.0);
  m.k1 = 0.0;
  CHECK(curvature_radius(m, 3.5) == 3.5);
  m.k1 = 1e-6;
  CHECK(curvature_radius(m, 3.5) == 3.5);
}

TEST_CASE("curvature radius ignores the normal sign") {
  auto pts = sphere_patch(1.0, 0.05, 60, 13);
  auto m = fit_monge(pts, Point3(0, 0, 1), 2);
  MongeForm flipped = m;
  flipped.n = -m.n;
  flipped.k1 = -m.k1;
  flipped.k2 = -m.k2;
  CHECK(curvature_radius(m, 10.0) == curvature_radius(flipped, 10.0));
}

TEST_CASE("jet fit is rotation equivariant") {
  auto pts = sphere_patch(1.3, 0.08, 60, 17);
  for (auto& p : pts) p += Point3(0, 0, 0.02 * p.x() * p.x() * p.x() / 0.08);
  Point3 x(0, 0, 1.3);
  auto m = fit_monge(pts, x, 2);
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::Quaterniond q(Eigen::Vector4d::NullaryExpr([&](Eigen::Index) {
      return std::normal_distribution<double>()(rng);
    }).normalized());
    Eigen::Matrix3d Rm = q.toRotationMatrix();
    std::vector<Point3> rot;
    for (const auto& p : pts) rot.push_back(Rm * p + Point3(1, -2, 3));
    auto mr = fit_monge(rot, Point3(Rm * x + Point3(1, -2, 3)), 2);
    check_frame(mr);
    // fitted curvatures are defined up to the orientation of n
    double s = (Rm * m.n).dot(mr.n) > 0 ? 1.0 : -1.0;
    CHECK(std::abs(s * mr.k1 - m.k1) < 1e-6);
    CHECK(std::abs(s * mr.k2 - m.k2) < 1e-6);
    CHECK(std::abs(std::abs((Rm * m.n).dot(mr.n)) - 1.0) < 1e-9);
  }
}

TEST_CASE("degenerate neighborhoods throw") {
  std::vector<Point3> line;
  for (int i = 0; i < 10; ++i) line.emplace_back(i, 2 * i, 0);
  CHECK_THROWS_AS(fit_monge(line, Point3::Zero(), 2), DegenerateFitError);
  CHECK_THROWS_AS(plane_normal(line), DegenerateFitError);
  std::vector<Point3> few{Point3(0, 0, 0), Point3(1, 0, 0), Point3(0, 1, 0)};
  CHECK_THROWS_AS(fit_monge(few, Point3::Zero(), 2), DegenerateFitError);
  CHECK(JetParams{}.required_samples() == 6);
}

TEST_CASE("normal estimation on a plane and a sphere") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<Point3> plane;
  for (int i = 0; i < 400; ++i) plane.emplace_back(u(rng), u(rng), 0.0);
  auto n = estimate_normals(KdTree(plane), JetParams{});
  for (const auto& v : n) CHECK(std::abs(std::abs(v.z()) - 1.0) < 1e-12);

  std::normal_distribution<double> g;
  std::vector<Point3> sphere;
  for (int i = 0; i < 3000; ++i) sphere.push_back(Point3(g(rng), g(rng), g(rng)).normalized());
  auto ns = estimate_normals(KdTree(sphere), JetParams{});
  const double cos2 = std::cos(2.0 * M_PI / 180.0);
  int bad = 0;
  for (std::size_t i = 0; i < sphere.size(); ++i) {
    CHECK(std::abs(ns[i].norm() - 1.0) < 1e-12);
    bad += std::abs(ns[i].dot(sphere[i])) < cos2;
  }
  CHECK(bad == 0);
}
