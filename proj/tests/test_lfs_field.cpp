#include <doctest.h>

#include <lfsr/kd_tree.hpp>
#include <lfsr/lfs_field.hpp>
#include <lfsr/pipeline.hpp>
#include <lfsr/testkit.hpp>

#include <random>
#include <sstream>

using namespace lfsr;

namespace {

ScalarField constant_field(std::size_t n, double v) {
  ScalarField f;
  f.values.assign(n, v);
  f.provenance.assign(n, LfsSource::curvature);
  return f;
}

double variance(const std::vector<double>& v) {
  double m = 0, s = 0;
  for (double x : v) m += x;
  m /= double(v.size());
  for (double x : v) s += (x - m) * (x - m);
  return s / double(v.size());
}

RunConfig raw_config() {
  RunConfig c;
  c.smooth = false;
  return c;
}

}  // namespace

TEST_CASE("unit sphere LFS is one") {
  auto spec = parse_primitive("kind=sphere radius=1 count=4000");
  Pipeline p(sample(spec, 2), raw_config());
  p.run_lfs();
  auto e = lfs_error(p.lfs(), p.cloud().points, spec);
  CHECK(e.mean <= 0.03);
  CHECK(p.lfs().mean() == doctest::Approx(1.0).epsilon(0.03));
  // mixture of both origins
  std::size_t curv = 0, diam = 0;
  for (auto s : p.lfs().provenance) {
    curv += s == LfsSource::curvature;
    diam += s == LfsSource::diameter;
  }
  CHECK(curv > 0);
  CHECK(diam > 0);
}

TEST_CASE("raw LFS never exceeds its two ingredients") {
  auto spec = parse_primitive("kind=capsule radius=0.5 half_length=1 count=2000");
  Pipeline p(sample(spec, 3), raw_config());
  p.run_lfs();
  const auto& raw = p.raw_lfs();
  for (std::size_t i = 0; i < raw.field.size(); ++i) {
    CHECK(raw.field.values[i] <= raw.curvature_radius[i]);
    CHECK(raw.field.values[i] <= 0.5 * raw.diameter[i].value);
    CHECK(raw.field.values[i] > 0.0);
  }
}

TEST_CASE("capsule LFS matches its radius") {
  auto spec = parse_primitive("kind=capsule radius=0.5 half_length=1 count=2610");
  Pipeline p(sample(spec, 4), raw_config());
  p.run_lfs();
  auto e = lfs_error(p.lfs(), p.cloud().points, spec);
  MESSAGE("capsule mean abs LFS error " << e.mean);
  CHECK(e.mean <= 3 * 1.023e-2);
  CHECK(reach(p.lfs()).value == doctest::Approx(0.5).epsilon(0.25));
}

TEST_CASE("ellipsoid tips are curvature based") {
  auto spec = parse_primitive("kind=ellipsoid a=2 b=1 c=1 count=6000");
  Pipeline p(sample(spec, 5), raw_config());
  p.run_lfs();
  std::size_t tips = 0, curv = 0;
  for (std::size_t i = 0; i < p.cloud().size(); ++i) {
    if (std::abs(p.cloud().points[i].x()) < 1.9) continue;
    ++tips;
    curv += p.lfs().provenance[i] == LfsSource::curvature;
  }
  REQUIRE(tips > 10);
  CHECK(double(curv) >= 0.9 * double(tips));
}

TEST_CASE("two close capsules are separation dominated") {
  auto spec = parse_primitive("kind=two_capsules radius=0.5 half_length=1 gap=0.2 count=6000");
  Pipeline p(sample(spec, 6), RunConfig{});
  p.run_lfs();
  CHECK(p.reach().value == doctest::Approx(0.1).epsilon(0.3));
}

TEST_CASE("median filter") {
  std::vector<Point3> line;
  for (int i = 0; i < 5; ++i) line.emplace_back(i, 0, 0);
  KdTree tree(line);
  ScalarField f = constant_field(5, 1.0);
  f.values[2] = 100.0;
  f.provenance[2] = LfsSource::diameter;
  auto m = median_filter(f, tree, 5);
  for (double v : m.values) CHECK(v == 1.0);
  CHECK(m.provenance == f.provenance);

  auto c = median_filter(constant_field(5, 0.3), tree, 3);
  for (double v : c.values) CHECK(v == 0.3);
  CHECK_THROWS_AS(median_filter(f, tree, 2), ContractError);
}

TEST_CASE("median filter removes sparse spikes") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<Point3> pts;
  for (int i = 0; i < 2000; ++i) pts.emplace_back(u(rng), u(rng), 0.0);
  KdTree tree(pts);
  ScalarField clean;
  for (const auto& p : pts) clean.values.push_back(1.0 + 0.5 * p.x());
  clean.provenance.assign(pts.size(), LfsSource::curvature);
  ScalarField spiked = clean;
  for (std::size_t i = 0; i < pts.size(); i += 20) spiked.values[i] *= 100.0;
  auto m = median_filter(spiked, tree, 9);
  CHECK(m.max() <= 2.0 * clean.max());
}

TEST_CASE("laplacian smoothing") {
  std::vector<Point3> line;
  for (int i = 0; i < 20; ++i) line.emplace_back(i, 0, 0);
  KdTree tree(line);
  auto c = laplacian_smooth(constant_field(20, 2.5), tree, 4, 5, 0.5);
  for (double v : c.values) CHECK(v == doctest::Approx(2.5));

  ScalarField step = constant_field(20, 0.0);
  for (int i = 10; i < 20; ++i) step.values[i] = 1.0;
  auto s = laplacian_smooth(step, tree, 2, 1, 0.5);
  CHECK(s.min() > 0.0 - 1e-15);
  CHECK(s.max() < 1.0 + 1e-15);
  CHECK(s.max() - s.min() <= 1.0);
  CHECK(s.values[9] > 0.0);
  CHECK(s.values[10] < 1.0);
  CHECK_THROWS_AS(laplacian_smooth(step, tree, 2, 1, 0.0), ContractError);
}

TEST_CASE("laplacian smoothing stays in range and does not raise variance") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<Point3> pts;
  for (int i = 0; i < 1500; ++i) pts.emplace_back(u(rng), u(rng), u(rng));
  KdTree tree(pts);
  ScalarField f;
  for (std::size_t i = 0; i < pts.size(); ++i) f.values.push_back(u(rng));
  f.provenance.assign(pts.size(), LfsSource::diameter);
  double lo = f.min(), hi = f.max();
  double prev = variance(f.values);
  ScalarField cur = f;
  for (int it = 0; it < 10; ++it) {
    cur = laplacian_smooth(cur, tree, 9, 1, 0.5);
    double v = variance(cur.values);
    CHECK(v <= prev + 1e-15);
    CHECK(cur.min() >= lo);
    CHECK(cur.max() <= hi);
    prev = v;
  }
}

TEST_CASE("reach is the field minimum") {
  CHECK(reach(constant_field(10, 1.0)).value == 1.0);
  ScalarField f = constant_field(4, 2.0);
  f.values[3] = 0.25;
  CHECK(reach(f).value == 0.25);
  CHECK_THROWS_AS(reach(ScalarField{}), ContractError);
}

TEST_CASE("field export") {
  ScalarField f = constant_field(2, 0.5);
  f.provenance[1] = LfsSource::fallback;
  std::ostringstream csv;
  write_field_csv(csv, f);
  CHECK(csv.str() == "id,lfs,provenance\n0,0.5,curvature\n1,0.5,fallback\n");
  std::ostringstream ply;
  std::vector<Point3> pts{Point3(0, 0, 0), Point3(1, 2, 3)};
  write_field_ply(ply, pts, f);
  CHECK(ply.str().find("property double lfs") != std::string::npos);
  CHECK(ply.str().find("1 2 3 0.5") != std::string::npos);
}
