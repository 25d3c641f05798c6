#include "mhcd/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "mhcd/metrics.hpp"
#include "mhcd/rng.hpp"

namespace mhcd {

PointCloud farthestPointSample(const PointCloud& candidates, int k, std::uint64_t seed) {
  const Eigen::Index n = candidates.rows();
  if (k < 1) throw ConfigError("farthest point sampling needs k >= 1");
  if (static_cast<Eigen::Index>(k) > n)
    throw DataError("farthest point sampling: k exceeds the candidate pool");

  Rng rng(seed);
  Eigen::Index current = static_cast<Eigen::Index>(rng.uniformIndex(static_cast<std::uint64_t>(n)));

  PointCloud out(k, 3);
  Eigen::VectorXd minDistSq = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
  for (int round = 0;;) {
    out.row(round) = candidates.row(current);
    if (++round == k) break;
    Eigen::Index next = 0;
    double bestDist = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = (candidates.row(i) - candidates.row(current)).squaredNorm();
      if (d < minDistSq(i)) minDistSq(i) = d;
      if (minDistSq(i) > bestDist) {  // strict: ties keep the lowest index
        bestDist = minDistSq(i);
        next = i;
      }
    }
    current = next;
  }
  return out;
}

PointCloud farthestPointSample(const TriangleMesh& mesh, int k, std::uint64_t seed) {
  const PointCloud pool =
      uniformSurfaceSample(mesh, 10 * k, childSeed(seed, "fps-pool"));
  return farthestPointSample(pool, k, childSeed(seed, "fps"));
}

OcclusionMask randomMask(int width, int height, std::uint64_t seed, double targetRatio) {
  if (width < 1 || height < 1) throw ConfigError("mask size must be positive");
  if (targetRatio < 0.0 || targetRatio > 0.9)
    throw ConfigError("mask target ratio must lie in [0, 0.9]");

  OcclusionMask mask = OcclusionMask::empty(width, height);
  const double total = static_cast<double>(width) * height;
  std::size_t erasedCount = 0;
  const double tolerance = 0.02;

  Rng rng(seed);
  int attempts = 0;
  while (std::abs(erasedCount / total - targetRatio) > tolerance) {
    if (++attempts > 20000)
      throw DataError("random mask: target ratio unreachable within attempt budget");

    const double area = rng.uniform(0.02, 0.15) * total;
    const double aspect = rng.uniform(0.3, 3.3);
    const int rw = std::clamp(static_cast<int>(std::lround(std::sqrt(area * aspect))), 1, width);
    const int rh = std::clamp(static_cast<int>(std::lround(std::sqrt(area / aspect))), 1, height);
    const int x0 = static_cast<int>(rng.uniformIndex(static_cast<std::uint64_t>(width - rw + 1)));
    const int y0 = static_cast<int>(rng.uniformIndex(static_cast<std::uint64_t>(height - rh + 1)));

    // Count the fresh coverage first; commit only if it keeps us at or
    // below the upper edge of the tolerance band.
    std::size_t fresh = 0;
    for (int y = y0; y < y0 + rh; ++y)
      for (int x = x0; x < x0 + rw; ++x)
        fresh += mask.erased[static_cast<std::size_t>(y) * width + x] == 0;
    if ((erasedCount + fresh) / total > targetRatio + tolerance) continue;

    for (int y = y0; y < y0 + rh; ++y)
      for (int x = x0; x < x0 + rw; ++x)
        mask.erased[static_cast<std::size_t>(y) * width + x] = 1;
    erasedCount += fresh;
  }
  return mask;
}

}  // namespace mhcd
