#include "lfsr/point_cloud.hpp"

#include <cmath>
#include <string>

namespace lfsr {

void PointCloud::validate() const {
  if (points.empty()) throw InputError("point cloud is empty");
  for (std::size_t i = 0; i < points.size(); ++i)
    if (!points[i].allFinite())
      throw InputError("point " + std::to_string(i) + " has non-finite coordinates");
  if (normals.empty()) return;
  if (normals.size() != points.size())
    throw InputError("normal count does not match point count");
  for (std::size_t i = 0; i < normals.size(); ++i)
    if (!normals[i].allFinite() || std::abs(normals[i].norm() - 1.0) > 1e-6)
      throw InputError("normal " + std::to_string(i) + " is not unit length");
}

BoundingSphere loose_bounding_sphere(std::span<const Point3> points) {
  if (points.empty()) throw InputError("point cloud is empty");
  Point3 c = Point3::Zero();
  for (const auto& p : points) c += p;
  c /= static_cast<double>(points.size());
  double far = 0.0;
  for (const auto& p : points) far = std::max(far, (p - c).norm());
  if (!(far > 0.0)) throw DegenerateInputError("all points coincide");
  return {c, 2.0 * far};
}

Aabb bounding_box(std::span<const Point3> points) {
  Aabb box;
  for (const auto& p : points) box.extend(p);
  return box;
}

}  // namespace lfsr
