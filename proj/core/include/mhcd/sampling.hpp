#pragma once

#include <cstdint>

#include "mhcd/feature_map.hpp"
#include "mhcd/mesh.hpp"
#include "mhcd/types.hpp"

namespace mhcd {

// Greedy farthest-point sampling; the first point is drawn by seed, ties
// in the max-min step break to the lowest candidate index.
PointCloud farthestPointSample(const PointCloud& candidates, int k, std::uint64_t seed);

// Mesh variant: uniform area oversampling at 10x k, then FPS.
PointCloud farthestPointSample(const TriangleMesh& mesh, int k, std::uint64_t seed);

// Union of random axis-aligned rectangles (aspect in [0.3, 3.3], area in
// [2%, 15%] per draw) grown until the erased fraction is within +-2% of
// targetRatio. targetRatio must lie in [0, 0.9].
OcclusionMask randomMask(int width, int height, std::uint64_t seed, double targetRatio);

}  // namespace mhcd
