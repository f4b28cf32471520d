#include <doctest.h>

#include <lfsr/metrics.hpp>
#include <lfsr/surface_mesher.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

using namespace lfsr;

namespace {

std::vector<Chord> radial_chords(double lo, double hi) {
  std::vector<Chord> c;
  for (const Vector3& d : {Vector3(1, 0, 0), Vector3(0, 1, 0), Vector3(0, 0, 1), Vector3(-1, -1, -1).normalized()})
    c.push_back({Point3(lo * d), Point3(hi * d)});
  return c;
}

double signed_volume(const SurfaceMesh& m) {
  double v = 0;
  for (const auto& t : m.triangles)
    v += m.vertices[t[0]].dot(m.vertices[t[1]].cross(m.vertices[t[2]])) / 6.0;
  return v;
}

std::set<std::array<int, 3>> unoriented(const SurfaceMesh& m) {
  std::set<std::array<int, 3>> s;
  for (auto t : m.triangles) {
    std::sort(t.begin(), t.end());
    s.insert(t);
  }
  return s;
}

const BoundingSphere kDomain{Point3::Zero(), 2.0};

}  // namespace

TEST_CASE("triangle helpers") {
  CHECK(triangle_min_angle_deg(Point3(0, 0, 0), Point3(1, 0, 0), Point3(0.5, std::sqrt(3.0) / 2, 0)) ==
        doctest::Approx(60.0));
  CHECK(triangle_min_angle_deg(Point3(0, 0, 0), Point3(1, 0, 0), Point3(0, 1, 0)) == doctest::Approx(45.0));
  const Point3 c = triangle_circumcenter(Point3(0, 0, 0), Point3(2, 0, 0), Point3(0, 2, 0));
  CHECK((c - Point3(1, 1, 0)).norm() < 1e-14);
}

TEST_CASE("analytic unit sphere") {
  auto f = [](const Point3& x) { return x.norm() - 1.0; };
  const double size = 0.2;
  auto sizing = [size](const Point3&) { return size; };
  MeshingCriteria crit;
  auto chords = radial_chords(0.2, 1.8);
  auto mesh = extract_surface(f, kDomain, sizing, size, chords, crit);
  const auto tm = mesh.as_triangle_mesh();
  REQUIRE(mesh.triangles.size() > 50);
  CHECK(mesh.stats.manifold);
  CHECK(is_watertight(tm));
  CHECK(is_manifold(tm));
  auto topo = topology(tm);
  CHECK(topo.components == 1);
  CHECK(topo.genus == std::vector<int>{0});
  CHECK(count_self_intersections(tm) == 0);
  // vertices sit on the zero set up to the bisection bracket
  for (const auto& v : mesh.vertices) CHECK(std::abs(v.norm() - 1.0) <= 2 * crit.bisection_ratio * size);
  CHECK(signed_volume(mesh) > 0.0);
  CHECK(signed_volume(mesh) == doctest::Approx(4.0 / 3.0 * M_PI).epsilon(0.05));
  REQUIRE(mesh.facets.size() == mesh.triangles.size());
  std::size_t small = 0;
  for (const auto& d : mesh.facets) {
    CHECK(d.ball.radius <= d.sizing_at_center * (1 + 1e-9));
    small += d.min_angle_deg < crit.min_facet_angle_deg;
  }
  CHECK(small == mesh.stats.bad_facets_left);
  CHECK(min_angle_deg(tm) >= crit.min_facet_angle_deg - 1e-9);
}

TEST_CASE("sign gauge leaves the facets unchanged") {
  // off-center so no probe lands exactly on the zero set, where sign(0) = +1
  // breaks the symmetry
  auto f = [](const Point3& x) { return (x - Point3(0.013, -0.021, 0.007)).norm() - 0.97; };
  auto g = [&](const Point3& x) { return -f(x); };
  auto sizing = [](const Point3&) { return 0.25; };
  auto chords = radial_chords(0.2, 1.8);
  auto a = extract_surface(f, kDomain, sizing, 0.25, chords, MeshingCriteria{});
  auto b = extract_surface(g, kDomain, sizing, 0.25, chords, MeshingCriteria{});
  REQUIRE(a.vertices.size() == b.vertices.size());
  CHECK(a.vertices == b.vertices);
  CHECK(unoriented(a) == unoriented(b));
  CHECK(signed_volume(a) == doctest::Approx(-signed_volume(b)));
}

TEST_CASE("uniform sizing gives uniform facets") {
  auto f = [](const Point3& x) { return x.norm() - 1.0; };
  auto sizing = [](const Point3&) { return 0.15; };
  auto mesh = extract_surface(f, kDomain, sizing, 0.15, radial_chords(0.2, 1.8), MeshingCriteria{});
  auto areas = facet_areas(mesh.as_triangle_mesh());
  double mean = 0, var = 0;
  for (double a : areas) mean += a;
  mean /= double(areas.size());
  for (double a : areas) var += (a - mean) * (a - mean);
  const double cv = std::sqrt(var / double(areas.size())) / mean;
  MESSAGE("facet area CV " << cv);
  CHECK(cv <= 0.3);
}

TEST_CASE("graded sizing refines where it is small") {
  auto f = [](const Point3& x) { return x.norm() - 1.0; };
  auto sizing = [](const Point3& x) { return x.z() > 0 ? 0.1 : 0.3; };
  auto mesh = extract_surface(f, kDomain, sizing, 0.1, radial_chords(0.2, 1.8), MeshingCriteria{});
  std::size_t top = 0, bottom = 0;
  for (const auto& t : mesh.triangles) {
    const Point3 c = (mesh.vertices[t[0]] + mesh.vertices[t[1]] + mesh.vertices[t[2]]) / 3.0;
    (c.z() > 0 ? top : bottom) += 1;
  }
  CHECK(top > 3 * bottom);
  CHECK(is_watertight(mesh.as_triangle_mesh()));
}

TEST_CASE("torus") {
  auto f = [](const Point3& x) {
    const double q = std::hypot(x.x(), x.y()) - 1.0;
    return std::hypot(q, x.z()) - 0.35;
  };
  auto sizing = [](const Point3&) { return 0.12; };
  std::vector<Chord> chords{{Point3(1.0, 0, 0), Point3(1.8, 0, 0)}, {Point3(0, -1.0, 0), Point3(0, -1.8, 0)}};
  auto mesh = extract_surface(f, kDomain, sizing, 0.12, chords, MeshingCriteria{});
  const auto tm = mesh.as_triangle_mesh();
  REQUIRE(is_manifold(tm));
  auto topo = topology(tm);
  CHECK(topo.components == 1);
  CHECK(topo.genus == std::vector<int>{1});
  CHECK(count_self_intersections(tm) == 0);
}

TEST_CASE("no zero crossing") {
  auto f = [](const Point3&) { return 1.0; };
  auto sizing = [](const Point3&) { return 0.2; };
  MeshingCriteria crit;
  crit.max_probe_chords = 200;
  CHECK_THROWS_AS(extract_surface(f, kDomain, sizing, 0.2, radial_chords(0.2, 1.8), crit), NoSurfaceError);
}

TEST_CASE("closed surface found without seed chords") {
  auto f = [](const Point3& x) { return (x - Point3(0.3, 0, 0)).norm() - 0.5; };
  auto sizing = [](const Point3&) { return 0.15; };
  auto mesh = extract_surface(f, kDomain, sizing, 0.15, {}, MeshingCriteria{});
  CHECK(is_watertight(mesh.as_triangle_mesh()));
  CHECK(topology(mesh.as_triangle_mesh()).components == 1);
}

TEST_CASE("facet csv") {
  auto f = [](const Point3& x) { return x.norm() - 1.0; };
  auto sizing = [](const Point3&) { return 0.4; };
  auto mesh = extract_surface(f, kDomain, sizing, 0.4, radial_chords(0.2, 1.8), MeshingCriteria{});
  std::ostringstream out;
  write_facet_csv(out, mesh);
  const std::string s = out.str();
  CHECK(s.rfind("facet,min_angle,R,sizing,offset\n", 0) == 0);
  CHECK(std::size_t(std::count(s.begin(), s.end(), '\n')) == mesh.triangles.size() + 1);
}
