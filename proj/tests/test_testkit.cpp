#include <doctest.h>

#include <lfsr/testkit.hpp>

#include <cmath>
#include <random>

using namespace lfsr;

namespace {

// dense parametric scan of the meridian ellipse (a cos t, b sin t)
double ellipse_distance_brute(double a, double b, double x, double y) {
  double best = std::numeric_limits<double>::infinity();
  const int n = 400000;
  for (int i = 0; i <= n; ++i) {
    const double t = 0.5 * M_PI * i / n;
    best = std::min(best, std::hypot(a * std::cos(t) - x, b * std::sin(t) - y));
  }
  return best;
}

}  // namespace

TEST_CASE("sampling is deterministic per seed") {
  auto spec = parse_primitive("kind=capsule radius=0.5 half_length=1 count=500 noise=0.01 outlier_clusters=2");
  auto a = sample_primitive(spec, 7), b = sample_primitive(spec, 7), c = sample_primitive(spec, 8);
  CHECK(a.cloud.points == b.cloud.points);
  CHECK(a.outlier == b.outlier);
  CHECK(a.cloud.points != c.cloud.points);
}

TEST_CASE("clean samples lie on the surface") {
  for (const char* text : {"kind=sphere radius=1.5 count=648", "kind=cone radius=0.5 height=1 count=500",
                           "kind=ellipsoid a=2 b=1 c=1 count=500", "kind=capsule radius=0.5 count=500",
                           "kind=two_capsules radius=0.5 gap=0.2 count=500", "kind=slab thickness=0.3 count=500",
                           "kind=plane count=300", "kind=torus major_radius=1 radius=0.3 count=500"}) {
    CAPTURE(text);
    auto spec = parse_primitive(std::string(text) + " normals=1");
    auto s = sample_primitive(spec, 1);
    REQUIRE(s.cloud.size() == spec.count);
    const Aabb box = primitive_bounds(spec);
    for (std::size_t i = 0; i < s.cloud.size(); ++i) {
      const Point3& p = s.cloud.points[i];
      CHECK(surface_distance(spec, p) <= 1e-9);
      CHECK((box.min.array() <= p.array() + 1e-12).all());
      CHECK((p.array() <= box.max.array() + 1e-12).all());
      CHECK(std::abs(s.cloud.normals[i].norm() - 1.0) < 1e-12);
      // the normal is the surface normal: stepping along it leaves the surface at unit speed
      CHECK(surface_distance(spec, p + 1e-4 * s.cloud.normals[i]) == doctest::Approx(1e-4).epsilon(1e-3));
    }
  }
}

TEST_CASE("noise, outliers and holes") {
  auto noisy = parse_primitive("kind=sphere radius=1 count=4000 noise=0.005");
  auto s = sample_primitive(noisy, 2);
  double ss = 0;
  for (const auto& p : s.cloud.points) ss += std::pow(p.norm() - 1.0, 2);
  // radial component of an isotropic Gaussian with sigma = 0.005 * edge 2
  CHECK(std::sqrt(ss / 4000) == doctest::Approx(0.01).epsilon(0.1));

  auto out = parse_primitive("kind=sphere radius=1 count=1000 outlier_clusters=3 cluster_size=5 background_outliers=50");
  auto o = sample_primitive(out, 3);
  CHECK(o.cloud.size() == 1000 + 15 + 50);
  CHECK(std::count(o.outlier.begin(), o.outlier.end(), true) == 65);
  for (std::size_t i = 0; i < 1000; ++i) CHECK_FALSE(o.outlier[i]);
  for (std::size_t i = 1000; i < 1015; ++i) CHECK(surface_distance(out, o.cloud.points[i]) >= 0.2 - 0.04 - 1e-12);

  auto holed = parse_primitive("kind=sphere radius=1 count=2000 hole=0,0,1,0.3 hole=1,0,0,0.2");
  for (const auto& p : sample(holed, 4).points) {
    CHECK((p - Point3(0, 0, 1)).norm() >= 0.3);
    CHECK((p - Point3(1, 0, 0)).norm() >= 0.2);
  }
}

TEST_CASE("non-uniform density") {
  auto spec = parse_primitive("kind=capsule radius=0.5 half_length=1 count=6000 non_uniform=1");
  std::size_t mid = 0, ends = 0;
  for (const auto& p : sample(spec, 5).points) {
    mid += std::abs(p.z()) < 0.1;
    ends += std::abs(p.z()) > 0.9 && std::abs(p.z()) < 1.0;
  }
  // equal cylinder areas; weight 1 + 0.75 cos(pi z / 1.5) is 1.75 against about 0.69
  CHECK(double(mid) > 2.0 * double(ends));
  CHECK(double(mid) < 3.0 * double(ends));
}

TEST_CASE("ground truth LFS examples") {
  CHECK(*ground_truth_lfs(parse_primitive("kind=sphere radius=2"), Point3(2, 0, 0)) == 2.0);
  auto caps = parse_primitive("kind=capsule radius=0.5");
  CHECK(*ground_truth_lfs(caps, Point3(0.5, 0, 0.3)) == 0.5);
  auto two = parse_primitive("kind=two_capsules radius=0.5 gap=0.2");
  CHECK(*ground_truth_lfs(two, Point3(0.1, 0, 0)) == doctest::Approx(0.1));
  CHECK(*ground_truth_lfs(two, Point3(1.1, 0, 0)) == 0.5);
  auto torus = parse_primitive("kind=torus major_radius=1 radius=0.3");
  CHECK(*ground_truth_lfs(torus, Point3(1.3, 0, 0)) == doctest::Approx(0.3));
  auto prolate = parse_primitive("kind=ellipsoid a=2 b=1 c=1");
  // tip: curvature radius b^2 / a
  CHECK(*ground_truth_lfs(prolate, Point3(2, 0, 0)) == doctest::Approx(0.5));
  CHECK(*ground_truth_lfs(prolate, Point3(0, 1, 0)) == doctest::Approx(1.0));
  CHECK_FALSE(ground_truth_lfs(parse_primitive("kind=ellipsoid a=2 b=1 c=0.5"), Point3(2, 0, 0)).has_value());
}

TEST_CASE("ellipse distance against a dense scan") {
  auto spec = parse_primitive("kind=ellipsoid a=2 b=1 c=1");
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-2.5, 2.5);
  for (int i = 0; i < 40; ++i) {
    const Point3 x(u(rng), u(rng), u(rng));
    const double want = ellipse_distance_brute(2, 1, std::abs(x.x()), std::hypot(x.y(), x.z()));
    CHECK(surface_distance(spec, x) == doctest::Approx(want).epsilon(1e-6).scale(1.0));
  }
}

TEST_CASE("spheroid curvature radius") {
  auto spec = parse_primitive("kind=ellipsoid a=2 b=1 c=1");
  CHECK(surface_curvature_radius(spec, Point3(2, 0, 0)) == doctest::Approx(0.5));
  // equator: the parallel circle (b) beats the meridian (a^2 / b)
  CHECK(surface_curvature_radius(spec, Point3(0, 1, 0)) == doctest::Approx(1.0));
  // general point: meridian radius (a^2 s^2 + b^2 c^2)^(3/2) / (a b) and
  // parallel radius b sqrt(a^2 s^2 + b^2 c^2) / a
  const double t = 0.4, a = 2, b = 1;
  const Point3 p(a * std::cos(t), b * std::sin(t), 0);
  const double q = a * a * std::sin(t) * std::sin(t) + b * b * std::cos(t) * std::cos(t);
  const double want = std::min(std::pow(q, 1.5) / (a * b), b * std::sqrt(q) / a);
  CHECK(surface_curvature_radius(spec, p) == doctest::Approx(want).epsilon(1e-6));
}

TEST_CASE("cone LFS against the medial-ball oracle") {
  auto spec = parse_primitive("kind=cone radius=0.5 height=1 count=20000 normals=1");
  auto dense = sample(spec, 9);
  auto centers = medial_axis_samples(dense.points, dense.normals);
  REQUIRE(!centers.empty());
  std::mt19937_64 rng(10);
  std::uniform_int_distribution<std::size_t> pick(0, dense.size() - 1);
  double worst = 0;
  for (int i = 0; i < 60; ++i) {
    const Point3& p = dense.points[pick(rng)];
    double d = std::numeric_limits<double>::infinity();
    for (const auto& c : centers) d = std::min(d, (c - p).norm());
    worst = std::max(worst, std::abs(d - *ground_truth_lfs(spec, p)));
  }
  MESSAGE("worst cone LFS deviation " << worst);
  CHECK(worst <= 0.02);
}

TEST_CASE("medial ball radius") {
  // unit circle of samples in the plane: the inner ball has radius 1
  std::vector<Point3> ring;
  for (int i = 0; i < 360; ++i) ring.emplace_back(std::cos(i * M_PI / 180), std::sin(i * M_PI / 180), 0);
  CHECK(medial_ball_radius(ring, ring[0], Vector3(-1, 0, 0), 1) == doctest::Approx(1.0));
  CHECK(std::isinf(medial_ball_radius(ring, ring[0], Vector3(-1, 0, 0), -1)));
}

TEST_CASE("primitive descriptions") {
  auto spec = parse_primitive("kind=torus major_radius=2 radius=0.4 count=123 noise=0.01 hole=1,2,3,0.5");
  auto back = parse_primitive(describe(spec));
  CHECK(back.kind == PrimitiveKind::torus);
  CHECK(back.major_radius == 2.0);
  CHECK(back.radius == 0.4);
  CHECK(back.count == 123);
  CHECK(back.noise == 0.01);
  REQUIRE(back.holes.size() == 1);
  CHECK(back.holes[0].radius == 0.5);
  CHECK(std::string(to_string(primitive_from_string("two_capsules"))) == "two_capsules");
  CHECK_THROWS_AS(parse_primitive("kind=sphere radius=abc"), InputError);
  CHECK_THROWS_AS(parse_primitive("radius"), InputError);
  CHECK_THROWS_AS(parse_primitive("kind=blob"), InputError);
  CHECK_THROWS_AS(parse_primitive("kind=sphere colour=red"), InputError);
}
