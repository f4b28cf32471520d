#include <doctest.h>

#include <lfsr/distance.hpp>
#include <lfsr/kd_tree.hpp>
#include <lfsr/shape_diameter.hpp>

#include <random>

using namespace lfsr;

namespace {

std::vector<Point3> slab(double thickness, double half, int per_side) {
  std::vector<Point3> pts;
  for (int i = 0; i <= per_side; ++i)
    for (int j = 0; j <= per_side; ++j) {
      double x = -half + 2 * half * i / per_side, y = -half + 2 * half * j / per_side;
      pts.emplace_back(x, y, 0.0);
      pts.emplace_back(x, y, thickness);
    }
  return pts;
}

std::vector<Point3> unit_sphere(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<Point3> pts;
  for (int i = 0; i < n; ++i) pts.push_back(Point3(g(rng), g(rng), g(rng)).normalized());
  return pts;
}

}  // namespace

TEST_CASE("cone directions") {
  std::mt19937_64 rng(1);
  Vector3 axis = Vector3(1, 2, -1).normalized();
  for (const auto& d : sample_cone_directions(axis, 0.0, 20, rng)) CHECK((d - axis).norm() < 1e-12);

  auto dirs = sample_cone_directions(axis, 90.0, 100000, rng);
  Vector3 mean = Vector3::Zero();
  double min_cos = 1.0;
  for (const auto& d : dirs) {
    CHECK(std::abs(d.norm() - 1.0) < 1e-12);
    mean += d;
    min_cos = std::min(min_cos, d.dot(axis));
  }
  mean /= double(dirs.size());
  // uniform hemisphere: E[cos] = 1/2 and the transverse mean vanishes
  CHECK(std::abs(mean.dot(axis) - 0.5) < 0.01);
  CHECK((mean - mean.dot(axis) * axis).norm() < 0.01);
  CHECK(min_cos >= -1e-12);

  auto cap = sample_cone_directions(axis, 10.0, 1000, rng);
  for (const auto& d : cap) CHECK(d.dot(axis) >= std::cos(10.0 * M_PI / 180.0) - 1e-12);

  std::mt19937_64 r1(77), r2(77);
  CHECK(sample_cone_directions(axis, 10.0, 50, r1) == sample_cone_directions(axis, 10.0, 50, r2));
}

TEST_CASE("shape diameter of a slab") {
  auto pts = slab(1.0, 2.0, 60);
  KdTree tree(pts);
  double eps = epsilon_threshold(tree, 12);
  ConeSearchParams p;
  for (const Point3& x : {Point3(0, 0, 0), Point3(0.3, -0.4, 0), Point3(0.1, 0.2, 1.0)}) {
    auto s = shape_diameter(tree, x, Vector3(0, 0, 1), p, eps, 10.0);
    CHECK(s.kind != DiameterKind::fallback);
    CHECK(s.value == doctest::Approx(1.0).epsilon(0.05));
    CHECK(s.antipodal_hits > 0);
  }
}

TEST_CASE("shape diameter of a sphere") {
  auto pts = unit_sphere(6000, 3);
  KdTree tree(pts);
  double eps = epsilon_threshold(tree, 12);
  ConeSearchParams p;
  for (int i = 0; i < 20; ++i) {
    auto s = shape_diameter(tree, pts[i], pts[i], p, eps, 4.0);
    CHECK(s.value == doctest::Approx(2.0).epsilon(0.05));
    CHECK(s.kind == DiameterKind::thickness);
  }
}

TEST_CASE("isolated patch falls back to the bounding diameter") {
  std::vector<Point3> patch;
  for (int i = -5; i <= 5; ++i)
    for (int j = -5; j <= 5; ++j) patch.emplace_back(0.02 * i, 0.02 * j, 0.0);
  KdTree tree(patch);
  double eps = epsilon_threshold(tree, 12);
  auto s = shape_diameter(tree, Point3::Zero(), Vector3(0, 0, 1), ConeSearchParams{}, eps, 3.0);
  CHECK(s.kind == DiameterKind::fallback);
  CHECK(s.value == 3.0);
  CHECK(s.antipodal_hits == 0);
}

TEST_CASE("shape diameter ignores the normal orientation") {
  auto pts = unit_sphere(3000, 5);
  KdTree tree(pts);
  double eps = epsilon_threshold(tree, 12);
  ConeSearchParams p;
  p.rng_seed = 1234;
  for (int i = 0; i < 30; ++i) {
    Vector3 n = pts[i];
    auto a = shape_diameter(tree, pts[i], n, p, eps, 4.0);
    auto b = shape_diameter(tree, pts[i], Vector3(-n), p, eps, 4.0);
    CHECK(a.value == b.value);
    CHECK(a.value <= 4.0);
  }
}

TEST_CASE("shape diameter never exceeds the fallback") {
  auto pts = slab(3.0, 2.0, 30);
  KdTree tree(pts);
  double eps = epsilon_threshold(tree, 12);
  auto s = shape_diameter(tree, Point3(0, 0, 0), Vector3(0, 0, 1), ConeSearchParams{}, eps, 2.0);
  CHECK(s.value <= 2.0);
}
