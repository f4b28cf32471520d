#include "lfsr/predicates.hpp"

#include <atomic>
#include <cmath>
#include <vector>

namespace lfsr {

namespace {

std::atomic<long long> g_exact_calls{0};

// Nonoverlapping expansion, components ordered by increasing magnitude.
// The value is the exact sum of the components.
class Expansion {
public:
  Expansion() = default;
  explicit Expansion(double v) {
    if (v != 0.0) c_.push_back(v);
  }

  static Expansion diff(double a, double b) {
    const double x = a - b;
    const double bv = a - x;
    const double av = x + bv;
    const double br = bv - b;
    const double ar = a - av;
    const double y = ar + br;
    Expansion e;
    if (y != 0.0) e.c_.push_back(y);
    if (x != 0.0) e.c_.push_back(x);
    return e;
  }

  int sign() const {
    if (c_.empty()) return 0;
    return c_.back() > 0.0 ? 1 : -1;
  }

  friend Expansion operator+(const Expansion& e, const Expansion& f) { return sum(e, f); }
  friend Expansion operator-(const Expansion& e, const Expansion& f) { return sum(e, f.negated()); }
  friend Expansion operator*(const Expansion& e, const Expansion& f) {
    Expansion acc;
    for (double b : f.c_) acc = sum(acc, e.scaled(b));
    return acc;
  }

private:
  static void two_sum(double a, double b, double& x, double& y) {
    x = a + b;
    const double bv = x - a;
    const double av = x - bv;
    const double br = b - bv;
    const double ar = a - av;
    y = ar + br;
  }

  static void two_product(double a, double b, double& x, double& y) {
    x = a * b;
    y = std::fma(a, b, -x);
  }

  Expansion negated() const {
    Expansion r = *this;
    for (double& v : r.c_) v = -v;
    return r;
  }

  // merge by magnitude, then one pass of two_sum (linear expansion sum)
  static Expansion sum(const Expansion& e, const Expansion& f) {
    if (e.c_.empty()) return f;
    if (f.c_.empty()) return e;
    std::vector<double> g;
    g.reserve(e.c_.size() + f.c_.size());
    std::size_t i = 0, j = 0;
    while (i < e.c_.size() && j < f.c_.size()) {
      if (std::abs(e.c_[i]) <= std::abs(f.c_[j])) g.push_back(e.c_[i++]);
      else g.push_back(f.c_[j++]);
    }
    while (i < e.c_.size()) g.push_back(e.c_[i++]);
    while (j < f.c_.size()) g.push_back(f.c_[j++]);

    // fast expansion sum over the magnitude-merged sequence
    Expansion h;
    double Q = g[0], hh;
    for (std::size_t k = 1; k < g.size(); ++k) {
      double Qn;
      two_sum(Q, g[k], Qn, hh);
      if (hh != 0.0) h.c_.push_back(hh);
      Q = Qn;
    }
    if (Q != 0.0) h.c_.push_back(Q);
    return h;
  }

  Expansion scaled(double b) const {
    Expansion h;
    if (c_.empty() || b == 0.0) return h;
    double Q, hh;
    two_product(c_[0], b, Q, hh);
    if (hh != 0.0) h.c_.push_back(hh);
    for (std::size_t i = 1; i < c_.size(); ++i) {
      double p1, p0, s;
      two_product(c_[i], b, p1, p0);
      two_sum(Q, p0, s, hh);
      if (hh != 0.0) h.c_.push_back(hh);
      two_sum(p1, s, Q, hh);
      if (hh != 0.0) h.c_.push_back(hh);
    }
    if (Q != 0.0) h.c_.push_back(Q);
    return h;
  }

  std::vector<double> c_;
};

int orient3d_exact(const Point3& a, const Point3& b, const Point3& c, const Point3& d) {
  ++g_exact_calls;
  const Expansion adx = Expansion::diff(a.x(), d.x()), ady = Expansion::diff(a.y(), d.y()),
                  adz = Expansion::diff(a.z(), d.z());
  const Expansion bdx = Expansion::diff(b.x(), d.x()), bdy = Expansion::diff(b.y(), d.y()),
                  bdz = Expansion::diff(b.z(), d.z());
  const Expansion cdx = Expansion::diff(c.x(), d.x()), cdy = Expansion::diff(c.y(), d.y()),
                  cdz = Expansion::diff(c.z(), d.z());
  const Expansion det = adx * (bdy * cdz - bdz * cdy) + bdx * (cdy * adz - cdz * ady) +
                        cdx * (ady * bdz - adz * bdy);
  return det.sign();
}

int insphere_exact(const Point3& a, const Point3& b, const Point3& c, const Point3& d, const Point3& e) {
  ++g_exact_calls;
  const Expansion aex = Expansion::diff(a.x(), e.x()), aey = Expansion::diff(a.y(), e.y()),
                  aez = Expansion::diff(a.z(), e.z());
  const Expansion bex = Expansion::diff(b.x(), e.x()), bey = Expansion::diff(b.y(), e.y()),
                  bez = Expansion::diff(b.z(), e.z());
  const Expansion cex = Expansion::diff(c.x(), e.x()), cey = Expansion::diff(c.y(), e.y()),
                  cez = Expansion::diff(c.z(), e.z());
  const Expansion dex = Expansion::diff(d.x(), e.x()), dey = Expansion::diff(d.y(), e.y()),
                  dez = Expansion::diff(d.z(), e.z());
  const Expansion ab = aex * bey - bex * aey;
  const Expansion bc = bex * cey - cex * bey;
  const Expansion cd = cex * dey - dex * cey;
  const Expansion da = dex * aey - aex * dey;
  const Expansion ac = aex * cey - cex * aey;
  const Expansion bd = bex * dey - dex * bey;
  const Expansion abc = aez * bc - bez * ac + cez * ab;
  const Expansion bcd = bez * cd - cez * bd + dez * bc;
  const Expansion cda = cez * da + dez * ac + aez * cd;
  const Expansion dab = dez * ab + aez * bd + bez * da;
  const Expansion alift = aex * aex + aey * aey + aez * aez;
  const Expansion blift = bex * bex + bey * bey + bez * bez;
  const Expansion clift = cex * cex + cey * cey + cez * cez;
  const Expansion dlift = dex * dex + dey * dey + dez * dez;
  const Expansion det = (dlift * abc - clift * dab) + (blift * cda - alift * bcd);
  return det.sign();
}

constexpr double kEps = 0x1.0p-53;
constexpr double kO3dBound = (7.0 + 56.0 * kEps) * kEps * 1.0001;
constexpr double kIspBound = (16.0 + 224.0 * kEps) * kEps * 1.0001;
constexpr double kO2dBound = (3.0 + 16.0 * kEps) * kEps * 1.0001;

}  // namespace

double orient3d_value(const Point3& a, const Point3& b, const Point3& c, const Point3& d) {
  const Vector3 ad = a - d, bd = b - d, cd = c - d;
  return ad.x() * (bd.y() * cd.z() - bd.z() * cd.y()) + bd.x() * (cd.y() * ad.z() - cd.z() * ad.y()) +
         cd.x() * (ad.y() * bd.z() - ad.z() * bd.y());
}

int orient3d(const Point3& a, const Point3& b, const Point3& c, const Point3& d) {
  const double adx = a.x() - d.x(), bdx = b.x() - d.x(), cdx = c.x() - d.x();
  const double ady = a.y() - d.y(), bdy = b.y() - d.y(), cdy = c.y() - d.y();
  const double adz = a.z() - d.z(), bdz = b.z() - d.z(), cdz = c.z() - d.z();
  const double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
  const double cdxady = cdx * ady, adxcdy = adx * cdy;
  const double adxbdy = adx * bdy, bdxady = bdx * ady;
  const double det = adz * (bdxcdy - cdxbdy) + bdz * (cdxady - adxcdy) + cdz * (adxbdy - bdxady);
  const double perm = (std::abs(bdxcdy) + std::abs(cdxbdy)) * std::abs(adz) +
                      (std::abs(cdxady) + std::abs(adxcdy)) * std::abs(bdz) +
                      (std::abs(adxbdy) + std::abs(bdxady)) * std::abs(cdz);
  const double bound = kO3dBound * perm;
  if (det > bound) return 1;
  if (det < -bound) return -1;
  return orient3d_exact(a, b, c, d);
}

int insphere(const Point3& a, const Point3& b, const Point3& c, const Point3& d, const Point3& e) {
  const double aex = a.x() - e.x(), bex = b.x() - e.x(), cex = c.x() - e.x(), dex = d.x() - e.x();
  const double aey = a.y() - e.y(), bey = b.y() - e.y(), cey = c.y() - e.y(), dey = d.y() - e.y();
  const double aez = a.z() - e.z(), bez = b.z() - e.z(), cez = c.z() - e.z(), dez = d.z() - e.z();

  const double aexbey = aex * bey, bexaey = bex * aey, ab = aexbey - bexaey;
  const double bexcey = bex * cey, cexbey = cex * bey, bc = bexcey - cexbey;
  const double cexdey = cex * dey, dexcey = dex * cey, cd = cexdey - dexcey;
  const double dexaey = dex * aey, aexdey = aex * dey, da = dexaey - aexdey;
  const double aexcey = aex * cey, cexaey = cex * aey, ac = aexcey - cexaey;
  const double bexdey = bex * dey, dexbey = dex * bey, bd = bexdey - dexbey;

  const double abc = aez * bc - bez * ac + cez * ab;
  const double bcd = bez * cd - cez * bd + dez * bc;
  const double cda = cez * da + dez * ac + aez * cd;
  const double dab = dez * ab + aez * bd + bez * da;

  const double alift = aex * aex + aey * aey + aez * aez;
  const double blift = bex * bex + bey * bey + bez * bez;
  const double clift = cex * cex + cey * cey + cez * cez;
  const double dlift = dex * dex + dey * dey + dez * dez;

  const double det = (dlift * abc - clift * dab) + (blift * cda - alift * bcd);

  const double p_ab = std::abs(aexbey) + std::abs(bexaey);
  const double p_bc = std::abs(bexcey) + std::abs(cexbey);
  const double p_cd = std::abs(cexdey) + std::abs(dexcey);
  const double p_da = std::abs(dexaey) + std::abs(aexdey);
  const double p_ac = std::abs(aexcey) + std::abs(cexaey);
  const double p_bd = std::abs(bexdey) + std::abs(dexbey);
  const double perm = ((p_cd * std::abs(bez) + p_bd * std::abs(cez) + p_bc * std::abs(dez)) * alift +
                       (p_da * std::abs(cez) + p_ac * std::abs(dez) + p_cd * std::abs(aez)) * blift) +
                      ((p_ab * std::abs(dez) + p_bd * std::abs(aez) + p_da * std::abs(bez)) * clift +
                       (p_bc * std::abs(aez) + p_ac * std::abs(bez) + p_ab * std::abs(cez)) * dlift);
  const double bound = kIspBound * perm;
  if (det > bound) return 1;
  if (det < -bound) return -1;
  return insphere_exact(a, b, c, d, e);
}

int orient2d(double ax, double ay, double bx, double by, double cx, double cy) {
  const double detleft = (ax - cx) * (by - cy);
  const double detright = (ay - cy) * (bx - cx);
  const double det = detleft - detright;
  const double bound = kO2dBound * (std::abs(detleft) + std::abs(detright));
  if (det > bound) return 1;
  if (det < -bound) return -1;
  ++g_exact_calls;
  const Expansion acx = Expansion::diff(ax, cx), bcy = Expansion::diff(by, cy);
  const Expansion acy = Expansion::diff(ay, cy), bcx = Expansion::diff(bx, cx);
  return (acx * bcy - acy * bcx).sign();
}

long long exact_predicate_calls() { return g_exact_calls.load(); }

}  // namespace lfsr
