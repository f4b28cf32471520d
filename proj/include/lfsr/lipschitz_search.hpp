#pragma once

#include "lfsr/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace lfsr {

// Accepted parameters R_t. A point is stored twice when both ends of its
// interval sit on the same side of eps (grazing contact).
struct CrossingSet {
  std::vector<double> hits;
  std::size_t evaluations = 0;

  std::size_t size() const { return hits.size(); }
  bool empty() const { return hits.empty(); }
};

struct SearchOptions {
  int max_depth = 64;
  std::size_t max_hits = std::numeric_limits<std::size_t>::max();
  double tolerance = 1e-7;
};

namespace detail {

struct SearchItem {
  double a, b, fa, fb;
  bool a_above, b_above;
  int depth;
};

inline bool side_above(double f, double eps, bool inherited) {
  if (f > eps) return true;
  if (f < eps) return false;
  return inherited;
}

}  // namespace detail

// Lipschitz guided dichotomic search for the eps level set of a 1-Lipschitz
// f on [a, b]. Hits come out in increasing order. An end value exactly equal
// to eps counts as below. Shrunk end points inherit the side of the end they
// were shrunk from (the Lipschitz bound puts them there; re-evaluating would
// let rounding flip them and prune a real crossing).
template <class F>
CrossingSet dichotomic_search(F&& f, double a, double b, double eps, const SearchOptions& opt = {}) {
  CrossingSet out;
  if (!(eps > 0.0)) throw ContractError("dichotomic search needs eps > 0");
  if (!(a < b)) return out;
  const double tol = opt.tolerance * std::max(1.0, (b - a) / 1e3);

  auto eval = [&](double t) {
    ++out.evaluations;
    return static_cast<double>(f(t));
  };

  std::vector<detail::SearchItem> stack;
  const double fa0 = eval(a), fb0 = eval(b);
  stack.push_back({a, b, fa0, fb0, fa0 > eps, fb0 > eps, 0});

  while (!stack.empty()) {
    const detail::SearchItem it = stack.back();
    stack.pop_back();
    if (it.depth > opt.max_depth)
      throw SearchFailure("dichotomic search exceeded the recursion depth; eps too small for the sampling");

    const bool same_side = it.a_above == it.b_above;
    if (same_side) {
      const double t_lo = 0.5 * (it.a + it.b - it.fb + it.fa);
      const double y_lo = it.fa - (t_lo - it.a);
      const double t_hi = 0.5 * (it.a + it.b + it.fb - it.fa);
      const double y_hi = it.fa + (t_hi - it.a);
      if (it.a_above && y_lo >= eps) continue;
      if (!it.a_above && y_hi <= eps) continue;
    }

    const double ka = it.a_above ? -1.0 : 1.0;
    const double kb = it.b_above ? 1.0 : -1.0;
    double l = std::clamp(it.a + (eps - it.fa) / ka, it.a, it.b);
    double r = std::clamp(it.b + (eps - it.fb) / kb, it.a, it.b);
    if (l > r) {
      // only reachable when f breaks the Lipschitz bound
      if (same_side) continue;
      l = r = 0.5 * (l + r);
    }
    const double m = 0.5 * (l + r);
    const double fm = eval(m);

    const bool converged = std::abs(fm - eps) <= tol && std::abs(r - l) <= eps;
    const bool collapsed = r - l <= std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(m));
    if (converged || collapsed) {
      if (converged || !same_side) {
        out.hits.push_back(m);
        if (same_side) out.hits.push_back(m);
      }
      if (out.hits.size() >= opt.max_hits) break;
      continue;
    }

    const double fl = l == it.a ? it.fa : eval(l);
    const double fr = r == it.b ? it.fb : eval(r);
    const bool l_above = it.a_above;
    const bool r_above = it.b_above;
    const bool m_above = fm > eps;
    // right half first so the left half is processed first
    stack.push_back({m, r, fm, fr, m_above, r_above, it.depth + 1});
    stack.push_back({l, m, fl, fm, l_above, m_above, it.depth + 1});
  }
  return out;
}

// averages consecutive pairs of R_t
inline std::vector<double> crossing_points(const CrossingSet& hits) {
  if (hits.hits.size() % 2 != 0) throw ContractError("crossing set has odd length");
  std::vector<double> out;
  out.reserve(hits.hits.size() / 2);
  for (std::size_t i = 0; i + 1 < hits.hits.size(); i += 2)
    out.push_back(0.5 * (hits.hits[i] + hits.hits[i + 1]));
  return out;
}

template <class F>
bool segment_crosses_sublevel(F&& f, double a, double b, double eps, SearchOptions opt = {}) {
  opt.max_hits = 1;
  return !dichotomic_search(f, a, b, eps, opt).empty();
}

}  // namespace lfsr
