#include "lfsr/testkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace lfsr {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct SurfacePoint {
  Point3 p;
  Vector3 n;
};

using Rng = std::mt19937_64;

double u01(Rng& rng) { return uniform01(rng); }

Vector3 random_unit(Rng& rng) {
  const double z = 2.0 * u01(rng) - 1.0;
  const double phi = 2.0 * kPi * u01(rng);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {r * std::cos(phi), r * std::sin(phi), z};
}

// distance from q to segment [a, b] in 2D
double seg_dist_2d(double qx, double qy, double ax, double ay, double bx, double by) {
  const double ex = bx - ax, ey = by - ay;
  const double l2 = ex * ex + ey * ey;
  double t = l2 > 0.0 ? ((qx - ax) * ex + (qy - ay) * ey) / l2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(qx - ax - t * ex, qy - ay - t * ey);
}

double seg_dist_3d(const Point3& q, const Point3& a, const Point3& b) {
  const Vector3 e = b - a;
  const double l2 = e.squaredNorm();
  const double t = l2 > 0.0 ? std::clamp((q - a).dot(e) / l2, 0.0, 1.0) : 0.0;
  return (q - a - t * e).norm();
}

// distance from (x0, y0), x0, y0 >= 0, to the ellipse (x/a)^2 + (y/b)^2 = 1 with a >= b
double ellipse_distance(double a, double b, double x0, double y0) {
  // closest point parameterized by t solving (a^2 x0^2)/(t + a^2)^2 + (b^2 y0^2)/(t + b^2)^2 = 1
  if (y0 > 0.0) {
    if (x0 > 0.0) {
      const double z0 = x0 / a, z1 = y0 / b;
      const double g = z0 * z0 + z1 * z1 - 1.0;
      if (g == 0.0) return 0.0;
      const double r0 = (a / b) * (a / b);
      // bisection on s for F(s) = (r0 z0 / (s + r0))^2 + (z1 / (s + 1))^2 - 1
      const double n0 = r0 * z0;
      double s0 = z1 - 1.0, s1 = g < 0.0 ? 0.0 : std::hypot(n0, z1) - 1.0;
      double s = 0.0;
      for (int i = 0; i < 200; ++i) {
        s = 0.5 * (s0 + s1);
        if (s == s0 || s == s1) break;
        const double ra = n0 / (s + r0), rb = z1 / (s + 1.0);
        const double f = ra * ra + rb * rb - 1.0;
        if (f > 0.0) s0 = s;
        else if (f < 0.0) s1 = s;
        else break;
      }
      const double x1 = r0 * x0 / (s + r0), y1 = y0 / (s + 1.0);
      return std::hypot(x1 - x0, y1 - y0);
    }
    return std::abs(y0 - b);
  }
  const double numer = a * x0, denom = a * a - b * b;
  if (numer < denom) {
    const double xd = numer / denom;
    const double x1 = a * xd, y1 = b * std::sqrt(std::max(0.0, 1.0 - xd * xd));
    return std::hypot(x1 - x0, y1);
  }
  return std::abs(x0 - a);
}

// spheroid with semi-axes a (along x) and b = c
struct Spheroid {
  double a, b;
  // meridian coordinates of the nearest point parameter t
  double param(const Point3& x) const {
    const double rho = std::hypot(x.y(), x.z());
    // Newton refinement from the radial guess
    double t = std::atan2(rho / b, std::abs(x.x()) / a);
    const double xx = std::abs(x.x());
    for (int i = 0; i < 50; ++i) {
      const double c = std::cos(t), s = std::sin(t);
      // derivative of squared distance along the ellipse
      const double f = (a * c - xx) * (-a * s) + (b * s - rho) * (b * c);
      const double df = (a * a * s * s - (a * c - xx) * a * c) + (b * b * c * c - (b * s - rho) * b * s);
      if (df == 0.0) break;
      const double step = f / df;
      t = std::clamp(t - step, 0.0, kPi / 2);
      if (std::abs(step) < 1e-15) break;
    }
    return t;
  }
  double curvature_radius(const Point3& x) const {
    const double t = param(x);
    const double c = std::cos(t), s = std::sin(t);
    const double q = a * a * s * s + b * b * c * c;
    const double km = a * b / std::pow(q, 1.5);
    const double kp = a / (b * std::sqrt(q));
    return 1.0 / std::max(km, kp);
  }
};

// Uniform-by-area sample of the bare surface, with a scalar coordinate in
// [-1, 1] that drives the non-uniform density.
struct Sampler {
  const PrimitiveSpec& s;
  Aabb box;

  SurfacePoint draw(Rng& rng) const {
    switch (s.kind) {
      case PrimitiveKind::sphere: {
        const Vector3 n = random_unit(rng);
        return {s.radius * n, n};
      }
      case PrimitiveKind::cone: {
        const double R = s.radius, H = s.height;
        const double slant = std::hypot(R, H);
        const double lateral = kPi * R * slant, base = kPi * R * R;
        const double phi = 2.0 * kPi * u01(rng);
        const double rho = R * std::sqrt(u01(rng));
        const Vector3 radial(std::cos(phi), std::sin(phi), 0.0);
        if (u01(rng) * (lateral + base) < base) return {rho * radial, Vector3(0, 0, -1)};
        const Vector3 n = (H * radial + Vector3(0, 0, R)).normalized();
        return {rho * radial + Vector3(0, 0, H * (1.0 - rho / R)), n};
      }
      case PrimitiveKind::ellipsoid: {
        const double a = s.semi_axes[0], b = s.semi_axes[1], c = s.semi_axes[2];
        const double gmax = std::max({b * c, a * c, a * b});
        for (;;) {
          const Vector3 u = random_unit(rng);
          const double g = std::sqrt(std::pow(b * c * u.x(), 2) + std::pow(a * c * u.y(), 2) + std::pow(a * b * u.z(), 2));
          if (u01(rng) * gmax > g) continue;
          const Vector3 n = Vector3(u.x() / a, u.y() / b, u.z() / c).normalized();
          return {Point3(a * u.x(), b * u.y(), c * u.z()), n};
        }
      }
      case PrimitiveKind::capsule: return capsule(rng, Point3::Zero());
      case PrimitiveKind::two_capsules: {
        const double off = s.radius + 0.5 * s.gap;
        return capsule(rng, Point3(u01(rng) < 0.5 ? -off : off, 0, 0));
      }
      case PrimitiveKind::slab: {
        const double z = u01(rng) < 0.5 ? -0.5 * s.thickness : 0.5 * s.thickness;
        return {Point3((2 * u01(rng) - 1) * s.extent, (2 * u01(rng) - 1) * s.extent, z),
                Vector3(0, 0, z > 0 ? 1.0 : -1.0)};
      }
      case PrimitiveKind::plane:
        return {Point3((2 * u01(rng) - 1) * s.extent, (2 * u01(rng) - 1) * s.extent, 0.0), Vector3::UnitZ()};
      case PrimitiveKind::torus: {
        const double R = s.major_radius, r = s.radius;
        for (;;) {
          const double th = 2.0 * kPi * u01(rng), ph = 2.0 * kPi * u01(rng);
          if (u01(rng) * (R + r) > R + r * std::cos(th)) continue;
          const Vector3 radial(std::cos(ph), std::sin(ph), 0.0);
          const Vector3 n = std::cos(th) * radial + std::sin(th) * Vector3::UnitZ();
          return {R * radial + r * n, n};
        }
      }
    }
    throw ContractError("unknown primitive");
  }

  SurfacePoint capsule(Rng& rng, const Point3& center) const {
    const double r = s.radius, L = s.half_length;
    const double cyl = 2.0 * kPi * r * 2.0 * L, caps = 4.0 * kPi * r * r;
    if (u01(rng) * (cyl + caps) < caps) {
      const Vector3 n = random_unit(rng);
      const double z = n.z() >= 0.0 ? L : -L;
      return {center + Vector3(0, 0, z) + r * n, n};
    }
    const double phi = 2.0 * kPi * u01(rng);
    const Vector3 n(std::cos(phi), std::sin(phi), 0.0);
    return {center + Vector3(0, 0, (2 * u01(rng) - 1) * L) + r * n, n};
  }

  // density coordinate along z (x for the ellipsoid)
  double coordinate(const Point3& p) const {
    const int axis = s.kind == PrimitiveKind::ellipsoid ? 0 : (s.kind == PrimitiveKind::plane ? 0 : 2);
    const double lo = box.min[axis], hi = box.max[axis];
    return hi > lo ? 2.0 * (p[axis] - lo) / (hi - lo) - 1.0 : 0.0;
  }
};

bool in_hole(const PrimitiveSpec& s, const Point3& p) {
  for (const Hole& h : s.holes)
    if ((p - h.center).norm() < h.radius) return true;
  return false;
}

}  // namespace

const char* to_string(PrimitiveKind k) {
  switch (k) {
    case PrimitiveKind::sphere: return "sphere";
    case PrimitiveKind::cone: return "cone";
    case PrimitiveKind::ellipsoid: return "ellipsoid";
    case PrimitiveKind::capsule: return "capsule";
    case PrimitiveKind::two_capsules: return "two_capsules";
    case PrimitiveKind::slab: return "slab";
    case PrimitiveKind::plane: return "plane";
    case PrimitiveKind::torus: return "torus";
  }
  return "?";
}

PrimitiveKind primitive_from_string(const std::string& s) {
  for (PrimitiveKind k : {PrimitiveKind::sphere, PrimitiveKind::cone, PrimitiveKind::ellipsoid, PrimitiveKind::capsule,
                          PrimitiveKind::two_capsules, PrimitiveKind::slab, PrimitiveKind::plane, PrimitiveKind::torus})
    if (s == to_string(k)) return k;
  throw InputError("unknown primitive kind '" + s + "'");
}

Aabb primitive_bounds(const PrimitiveSpec& s) {
  Aabb b;
  auto box = [&](const Point3& lo, const Point3& hi) {
    b.extend(lo);
    b.extend(hi);
  };
  switch (s.kind) {
    case PrimitiveKind::sphere: box(Point3::Constant(-s.radius), Point3::Constant(s.radius)); break;
    case PrimitiveKind::cone: box(Point3(-s.radius, -s.radius, 0), Point3(s.radius, s.radius, s.height)); break;
    case PrimitiveKind::ellipsoid: {
      const Point3 e(s.semi_axes[0], s.semi_axes[1], s.semi_axes[2]);
      box(-e, e);
      break;
    }
    case PrimitiveKind::capsule: {
      const double r = s.radius, h = s.half_length + s.radius;
      box(Point3(-r, -r, -h), Point3(r, r, h));
      break;
    }
    case PrimitiveKind::two_capsules: {
      const double r = s.radius, h = s.half_length + s.radius, w = 2 * r + 0.5 * s.gap;
      box(Point3(-w, -r, -h), Point3(w, r, h));
      break;
    }
    case PrimitiveKind::slab:
      box(Point3(-s.extent, -s.extent, -0.5 * s.thickness), Point3(s.extent, s.extent, 0.5 * s.thickness));
      break;
    case PrimitiveKind::plane: box(Point3(-s.extent, -s.extent, 0), Point3(s.extent, s.extent, 0)); break;
    case PrimitiveKind::torus: {
      const double w = s.major_radius + s.radius;
      box(Point3(-w, -w, -s.radius), Point3(w, w, s.radius));
      break;
    }
  }
  return b;
}

Sample sample_primitive(const PrimitiveSpec& spec, std::uint64_t seed) {
  if (spec.noise < 0.0) throw InputError("noise must be non-negative");
  Rng rng(mix_seed(seed, 0x7e57));
  Sampler sampler{spec, primitive_bounds(spec)};
  Sample out;
  auto& cloud = out.cloud;
  cloud.points.reserve(spec.count);
  std::size_t attempts = 0;
  while (cloud.points.size() < spec.count) {
    if (++attempts > 1000 * (spec.count + 100)) throw InputError("hole masks leave no surface to sample");
    const SurfacePoint sp = sampler.draw(rng);
    if (spec.non_uniform) {
      const double w = 1.0 + 0.75 * std::cos(kPi * sampler.coordinate(sp.p));
      if (u01(rng) * 1.75 > w) continue;
    }
    if (in_hole(spec, sp.p)) continue;
    cloud.points.push_back(sp.p);
    cloud.normals.push_back(sp.n);
  }
  const double edge = sampler.box.extent().maxCoeff();
  if (spec.noise > 0.0) {
    std::normal_distribution<double> gauss(0.0, spec.noise * edge);
    for (Point3& p : cloud.points) p += Vector3(gauss(rng), gauss(rng), gauss(rng));
  }
  out.outlier.assign(cloud.points.size(), false);

  const Point3 center = 0.5 * (sampler.box.min + sampler.box.max);
  if (spec.outlier_clusters > 0) {
    // cluster centers inside the loose bounding sphere, away from the surface
    const BoundingSphere loose = loose_bounding_sphere(cloud.points);
    for (int c = 0; c < spec.outlier_clusters; ++c) {
      Point3 cc;
      do {
        cc = loose.center + loose.radius * std::cbrt(u01(rng)) * random_unit(rng);
      } while (surface_distance(spec, cc) < 0.1 * edge);
      for (int k = 0; k < spec.cluster_size; ++k) {
        cloud.points.push_back(cc + 0.02 * edge * std::cbrt(u01(rng)) * random_unit(rng));
        cloud.normals.push_back(random_unit(rng));
        out.outlier.push_back(true);
      }
    }
  }
  if (spec.background_outliers > 0) {
    // uniform in the bounding box enlarged by 20%
    const Vector3 half = 0.6 * sampler.box.extent().cwiseMax(Vector3::Constant(0.1 * edge));
    for (std::size_t k = 0; k < spec.background_outliers; ++k) {
      cloud.points.push_back(center + Vector3((2 * u01(rng) - 1) * half.x(), (2 * u01(rng) - 1) * half.y(),
                                              (2 * u01(rng) - 1) * half.z()));
      cloud.normals.push_back(random_unit(rng));
      out.outlier.push_back(true);
    }
  }
  if (!spec.with_normals) cloud.normals.clear();
  return out;
}

PointCloud sample(const PrimitiveSpec& spec, std::uint64_t seed) { return sample_primitive(spec, seed).cloud; }

std::optional<double> ground_truth_lfs(const PrimitiveSpec& s, const Point3& p) {
  switch (s.kind) {
    case PrimitiveKind::sphere: return s.radius;
    case PrimitiveKind::capsule: return s.radius;
    case PrimitiveKind::torus: return std::min(s.radius, s.major_radius - s.radius);
    case PrimitiveKind::two_capsules: return std::min(s.radius, std::abs(p.x()));
    case PrimitiveKind::slab: return 0.5 * s.thickness;
    case PrimitiveKind::plane: return kInf;
    case PrimitiveKind::ellipsoid: {
      const double a = s.semi_axes[0], b = s.semi_axes[1], c = s.semi_axes[2];
      if (b != c || a < b) return std::nullopt;
      // medial axis of a prolate spheroid: segment |x| <= (a^2 - b^2) / a on the major axis
      const double e = (a * a - b * b) / a;
      return seg_dist_3d(p, Point3(-e, 0, 0), Point3(e, 0, 0));
    }
    case PrimitiveKind::cone: {
      // medial axis in the meridian half plane: rim bisector up to the
      // inscribed ball center on the axis, then the axis up to the apex
      const double R = s.radius, H = s.height;
      const double slant = std::hypot(R, H);
      const double zc = R * H / (R + slant);
      const double rho = std::hypot(p.x(), p.y());
      return std::min(seg_dist_2d(rho, p.z(), R, 0.0, 0.0, zc), seg_dist_2d(rho, p.z(), 0.0, zc, 0.0, H));
    }
  }
  return std::nullopt;
}

double surface_distance(const PrimitiveSpec& s, const Point3& x) {
  switch (s.kind) {
    case PrimitiveKind::sphere: return std::abs(x.norm() - s.radius);
    case PrimitiveKind::cone: {
      const double rho = std::hypot(x.x(), x.y());
      return std::min(seg_dist_2d(rho, x.z(), 0.0, 0.0, s.radius, 0.0),
                      seg_dist_2d(rho, x.z(), s.radius, 0.0, 0.0, s.height));
    }
    case PrimitiveKind::ellipsoid: {
      const double a = s.semi_axes[0], b = s.semi_axes[1], c = s.semi_axes[2];
      if (b != c || a < b) throw ContractError("surface distance needs a prolate spheroid");
      return ellipse_distance(a, b, std::abs(x.x()), std::hypot(x.y(), x.z()));
    }
    case PrimitiveKind::capsule:
      return std::abs(seg_dist_3d(x, Point3(0, 0, -s.half_length), Point3(0, 0, s.half_length)) - s.radius);
    case PrimitiveKind::two_capsules: {
      const double off = s.radius + 0.5 * s.gap;
      double d = kInf;
      for (double cx : {-off, off})
        d = std::min(d, std::abs(seg_dist_3d(x, Point3(cx, 0, -s.half_length), Point3(cx, 0, s.half_length)) -
                                 s.radius));
      return d;
    }
    case PrimitiveKind::slab:
    case PrimitiveKind::plane: {
      const double dx = std::max(0.0, std::abs(x.x()) - s.extent), dy = std::max(0.0, std::abs(x.y()) - s.extent);
      auto sheet = [&](double z) { return std::sqrt(dx * dx + dy * dy + (x.z() - z) * (x.z() - z)); };
      if (s.kind == PrimitiveKind::plane) return sheet(0.0);
      return std::min(sheet(-0.5 * s.thickness), sheet(0.5 * s.thickness));
    }
    case PrimitiveKind::torus:
      return std::abs(std::hypot(std::hypot(x.x(), x.y()) - s.major_radius, x.z()) - s.radius);
  }
  return kInf;
}

double surface_curvature_radius(const PrimitiveSpec& s, const Point3& x) {
  switch (s.kind) {
    case PrimitiveKind::sphere: return s.radius;
    case PrimitiveKind::capsule:
    case PrimitiveKind::two_capsules:
    case PrimitiveKind::torus: return s.radius;
    case PrimitiveKind::slab:
    case PrimitiveKind::plane: return kInf;
    case PrimitiveKind::ellipsoid: {
      const double a = s.semi_axes[0], b = s.semi_axes[1], c = s.semi_axes[2];
      if (b != c || a < b) throw ContractError("curvature needs a prolate spheroid");
      return Spheroid{a, b}.curvature_radius(x);
    }
    case PrimitiveKind::cone: {
      const double R = s.radius, H = s.height;
      const double rho = std::hypot(x.x(), x.y());
      const double db = seg_dist_2d(rho, x.z(), 0.0, 0.0, R, 0.0);
      const double dl = seg_dist_2d(rho, x.z(), R, 0.0, 0.0, H);
      if (db < dl) return rho >= R ? 0.0 : kInf;
      // project onto the slant line; parallel curvature radius rho / cos(beta)
      const Vector3 dir(-R, H, 0);
      const double t = std::clamp(((rho - R) * -R + x.z() * H) / dir.squaredNorm(), 0.0, 1.0);
      const double rho_s = R * (1.0 - t);
      if (t <= 0.0 || t >= 1.0) return 0.0;
      return rho_s * std::hypot(R, H) / H;
    }
  }
  return kInf;
}

TruthSurface truth_surface(const PrimitiveSpec& spec) {
  return {[spec](const Point3& x) { return surface_distance(spec, x); },
          [spec](const Point3& x) { return surface_curvature_radius(spec, x); }};
}

double medial_ball_radius(std::span<const Point3> dense, const Point3& p, const Vector3& n, int side) {
  double t = kInf;
  for (const Point3& s : dense) {
    const Vector3 d = s - p;
    const double h = side * d.dot(n);
    if (h <= 0.0) continue;
    t = std::min(t, d.squaredNorm() / (2.0 * h));
  }
  return t;
}

std::vector<Point3> medial_axis_samples(std::span<const Point3> dense, std::span<const Vector3> normals) {
  std::vector<Point3> centers;
  for (std::size_t i = 0; i < dense.size(); ++i)
    for (int side : {-1, 1}) {
      const double t = medial_ball_radius(dense, dense[i], normals[i], side);
      if (std::isfinite(t)) centers.push_back(dense[i] + side * t * normals[i]);
    }
  return centers;
}

PrimitiveSpec parse_primitive(const std::string& text) {
  PrimitiveSpec s;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw InputError("expected key=value, got '" + tok + "'");
    const std::string k = tok.substr(0, eq), v = tok.substr(eq + 1);
    auto num = [&]() {
      try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
      } catch (const std::exception&) {
        throw InputError("bad number for '" + k + "': " + v);
      }
    };
    if (k == "kind") s.kind = primitive_from_string(v);
    else if (k == "radius") s.radius = num();
    else if (k == "height") s.height = num();
    else if (k == "a") s.semi_axes[0] = num();
    else if (k == "b") s.semi_axes[1] = num();
    else if (k == "c") s.semi_axes[2] = num();
    else if (k == "half_length") s.half_length = num();
    else if (k == "gap") s.gap = num();
    else if (k == "thickness") s.thickness = num();
    else if (k == "extent") s.extent = num();
    else if (k == "major_radius") s.major_radius = num();
    else if (k == "count") s.count = static_cast<std::size_t>(num());
    else if (k == "non_uniform") s.non_uniform = v == "1" || v == "true";
    else if (k == "noise") s.noise = num();
    else if (k == "outlier_clusters") s.outlier_clusters = static_cast<int>(num());
    else if (k == "cluster_size") s.cluster_size = static_cast<int>(num());
    else if (k == "background_outliers") s.background_outliers = static_cast<std::size_t>(num());
    else if (k == "normals") s.with_normals = v == "1" || v == "true";
    else if (k == "hole") {
      // hole=x,y,z,r
      Hole h;
      char c1, c2, c3;
      std::istringstream hv(v);
      if (!(hv >> h.center.x() >> c1 >> h.center.y() >> c2 >> h.center.z() >> c3 >> h.radius))
        throw InputError("hole expects x,y,z,r");
      s.holes.push_back(h);
    } else
      throw InputError("unknown primitive parameter '" + k + "'");
  }
  if (s.noise < 0.0) throw InputError("noise must be non-negative");
  return s;
}

std::string describe(const PrimitiveSpec& s) {
  std::ostringstream o;
  o.precision(17);
  o << "kind=" << to_string(s.kind) << " radius=" << s.radius << " height=" << s.height << " a=" << s.semi_axes[0]
    << " b=" << s.semi_axes[1] << " c=" << s.semi_axes[2] << " half_length=" << s.half_length << " gap=" << s.gap
    << " thickness=" << s.thickness << " extent=" << s.extent << " major_radius=" << s.major_radius
    << " count=" << s.count << " non_uniform=" << (s.non_uniform ? 1 : 0) << " noise=" << s.noise
    << " outlier_clusters=" << s.outlier_clusters << " cluster_size=" << s.cluster_size
    << " background_outliers=" << s.background_outliers << " normals=" << (s.with_normals ? 1 : 0);
  for (const Hole& h : s.holes)
    o << " hole=" << h.center.x() << ',' << h.center.y() << ',' << h.center.z() << ',' << h.radius;
  return o.str();
}

}  // namespace lfsr
