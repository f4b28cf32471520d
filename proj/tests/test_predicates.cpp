#include <doctest.h>

#include <lfsr/predicates.hpp>

#include <cmath>
#include <random>

using namespace lfsr;

namespace {

using i128 = __int128;

int sign(i128 v) { return (v > 0) - (v < 0); }

i128 det3(i128 a, i128 b, i128 c, i128 d, i128 e, i128 f, i128 g, i128 h, i128 i) {
  return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g);
}

// exact signs for integer coordinates
int orient3d_int(const std::array<long long, 3>& a, const std::array<long long, 3>& b,
                 const std::array<long long, 3>& c, const std::array<long long, 3>& d) {
  return sign(det3(a[0] - d[0], a[1] - d[1], a[2] - d[2], b[0] - d[0], b[1] - d[1], b[2] - d[2], c[0] - d[0],
                   c[1] - d[1], c[2] - d[2]));
}

int insphere_int(const std::array<std::array<long long, 3>, 5>& p) {
  i128 m[4][4];
  for (int r = 0; r < 4; ++r) {
    i128 s = 0;
    for (int k = 0; k < 3; ++k) {
      m[r][k] = p[r][k] - p[4][k];
      s += m[r][k] * m[r][k];
    }
    m[r][3] = s;
  }
  i128 det = 0;
  for (int col = 0; col < 4; ++col) {
    i128 minor[9];
    int idx = 0;
    for (int r = 1; r < 4; ++r)
      for (int c = 0; c < 4; ++c)
        if (c != col) minor[idx++] = m[r][c];
    i128 cof = det3(minor[0], minor[1], minor[2], minor[3], minor[4], minor[5], minor[6], minor[7], minor[8]);
    det += (col % 2 ? -1 : 1) * m[0][col] * cof;
  }
  // already carries the orientation sign
  return sign(det);
}

Point3 to_point(const std::array<long long, 3>& a, double scale) {
  return Point3(double(a[0]) * scale, double(a[1]) * scale, double(a[2]) * scale);
}

}  // namespace

TEST_CASE("orientation conventions") {
  const Point3 a(0, 0, 0), b(1, 0, 0), c(0, 1, 0);
  CHECK(orient3d(a, b, c, Point3(0, 0, -1)) == 1);
  CHECK(orient3d(a, b, c, Point3(0, 0, 1)) == -1);
  CHECK(orient3d(a, b, c, Point3(0.3, 0.3, 0)) == 0);
  CHECK(orient2d(0, 0, 1, 0, 0, 1) == 1);
  CHECK(orient2d(0, 0, 0, 1, 1, 0) == -1);
  CHECK(orient2d(0, 0, 1, 1, 2, 2) == 0);
}

TEST_CASE("insphere conventions") {
  const Point3 a(1, 0, 0), b(0, 1, 0), c(0, 0, 1), d(-1, 0, 0);
  const int o = orient3d(a, b, c, d);
  REQUIRE(o != 0);
  CHECK(insphere(a, b, c, d, Point3(0, 0, 0)) == o);
  CHECK(insphere(a, b, c, d, Point3(3, 0, 0)) == -o);
  CHECK(insphere(a, b, c, d, Point3(0, -1, 0)) == 0);
  CHECK(insphere(b, a, c, d, Point3(0, 0, 0)) == -o);
}

TEST_CASE("predicates agree with integer arithmetic on near-degenerate input") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<long long> coord(-(1 << 19), 1 << 19);
  std::uniform_int_distribution<long long> tiny(-2, 2);
  const double scale = std::ldexp(1.0, -17);
  int degenerate = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    std::array<std::array<long long, 3>, 5> p;
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k) p[i][k] = coord(rng);
    // d near the plane of a, b, c: an integer combination plus a tiny offset
    std::uniform_int_distribution<long long> w(-3, 3);
    long long u = w(rng), v = w(rng);
    for (int k = 0; k < 3; ++k) p[3][k] = p[0][k] + u * (p[1][k] - p[0][k]) + v * (p[2][k] - p[0][k]) + tiny(rng);
    bool fits = true;
    for (int k = 0; k < 3; ++k) fits &= std::llabs(p[3][k]) < (1 << 21);
    if (!fits) continue;
    const int want = orient3d_int(p[0], p[1], p[2], p[3]);
    degenerate += want == 0;
    CHECK(orient3d(to_point(p[0], scale), to_point(p[1], scale), to_point(p[2], scale), to_point(p[3], scale)) ==
          want);
  }
  CHECK(degenerate > 0);

  // cospherical: permutations of (x, y, z) share a sphere about the origin
  int cospherical = 0;
  std::uniform_int_distribution<long long> small(-(1 << 14), 1 << 14);
  for (int trial = 0; trial < 3000; ++trial) {
    long long x = small(rng), y = small(rng), z = small(rng);
    std::array<std::array<long long, 3>, 5> p = {{{x, y, z}, {y, z, x}, {z, x, y}, {-x, y, z}, {x, -y, z}}};
    p[4][0] += tiny(rng);
    p[4][1] += tiny(rng);
    if (orient3d_int(p[0], p[1], p[2], p[3]) == 0) continue;
    const int want = insphere_int(p);
    cospherical += want == 0;
    CHECK(insphere(to_point(p[0], scale), to_point(p[1], scale), to_point(p[2], scale), to_point(p[3], scale),
                   to_point(p[4], scale)) == want);
  }
  CHECK(cospherical > 0);
}

TEST_CASE("orient2d on an ulp grid") {
  // the classic failure of naive evaluation: points within a few ulps of
  // the line y = x through (12, 12) and (24, 24)
  const double ulp = std::ldexp(1.0, -53);
  const i128 s = i128(1) << 53;
  int mismatches_naive = 0;
  for (int i = 0; i < 64; ++i)
    for (int j = 0; j < 64; ++j) {
      const double px = 0.5 + i * ulp, py = 0.5 + j * ulp;
      const i128 ax = i128(px / ulp), ay = i128(py / ulp);
      const i128 bx = 12 * s, cx = 24 * s;
      const int want = sign((bx - ax) * (cx - ay) - (bx - ay) * (cx - ax));
      CHECK(orient2d(px, py, 12, 12, 24, 24) == want);
      const double naive = (12 - px) * (24 - py) - (12 - py) * (24 - px);
      mismatches_naive += ((naive > 0) - (naive < 0)) != want;
    }
  MESSAGE("naive mismatches " << mismatches_naive);
}

TEST_CASE("exact fallback is used only when needed") {
  const long long before = exact_predicate_calls();
  orient3d(Point3(0, 0, 0), Point3(1, 0, 0), Point3(0, 1, 0), Point3(0.2, 0.3, 5));
  CHECK(exact_predicate_calls() == before);
  orient3d(Point3(0, 0, 0), Point3(1, 0, 0), Point3(0, 1, 0), Point3(0.1, 0.7, 0));
  CHECK(exact_predicate_calls() > before);
}
