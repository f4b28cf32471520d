#include "lfsr/distance.hpp"

#include "lfsr/log.hpp"
#include "lfsr/parallel.hpp"

#include <algorithm>
#include <atomic>

namespace lfsr {

double unsigned_distance(const KdTree& index, const Point3& x) {
  return std::sqrt(index.nearest(x).sq_dist);
}

namespace {

int clamp_k(const KdTree& index, int k) {
  if (k < 1) throw ContractError("robust distance needs k >= 1");
  if (static_cast<std::size_t>(k) > index.size()) {
    static std::atomic<bool> warned{false};
    if (!warned.exchange(true))
      log_warn("k = ", k, " exceeds the cloud size ", index.size(), "; clamping");
    return static_cast<int>(index.size());
  }
  return k;
}

double rms(const std::vector<Neighbor>& nn) {
  double s = 0.0;
  for (const auto& n : nn) s += n.sq_dist;
  return std::sqrt(s / static_cast<double>(nn.size()));
}

}  // namespace

double robust_distance(const KdTree& index, const Point3& x, int k) {
  thread_local std::vector<Neighbor> nn;
  index.k_nearest(x, clamp_k(index, k), nn);
  return rms(nn);
}

double epsilon_threshold(const KdTree& index, int k) {
  const int kk = clamp_k(index, k);
  std::vector<double> values(index.size());
  parallel_for(index.size(), [&](std::size_t i) {
    thread_local std::vector<Neighbor> nn;
    index.k_nearest(index.point(static_cast<int>(i)), kk, nn);
    values[i] = rms(nn);
  });
  return *std::min_element(values.begin(), values.end());
}

}  // namespace lfsr
