#pragma once

#include "lfsr/types.hpp"

namespace lfsr {

// Exact signs via a floating-point filter with an expansion-arithmetic
// fallback. Conventions:
//   orient3d(a,b,c,d) = sign det[a-d; b-d; c-d]; positive when d lies on the
//   side opposite to the right-hand normal of (a,b,c).
//   insphere(a,b,c,d,e) > 0 when e is inside the sphere through a..d and
//   orient3d(a,b,c,d) > 0; the sign flips for negative orientation.
//   orient2d(a,b,c) > 0 when (a,b,c) is counter-clockwise.
int orient3d(const Point3& a, const Point3& b, const Point3& c, const Point3& d);
int insphere(const Point3& a, const Point3& b, const Point3& c, const Point3& d, const Point3& e);
int orient2d(double ax, double ay, double bx, double by, double cx, double cy);

// unfiltered double evaluations, for diagnostics only
double orient3d_value(const Point3& a, const Point3& b, const Point3& c, const Point3& d);

// count of calls that needed the exact fallback
long long exact_predicate_calls();

}  // namespace lfsr
