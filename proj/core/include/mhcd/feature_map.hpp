#pragma once

#include <cstdint>
#include <vector>

#include "mhcd/bvh.hpp"
#include "mhcd/camera.hpp"
#include "mhcd/types.hpp"

namespace mhcd {

/// Binary occlusion grid at camera resolution; nonzero = pixel erased.
struct OcclusionMask {
  int width = 0, height = 0;
  std::vector<std::uint8_t> erased;

  static OcclusionMask empty(int w, int h) { return {w, h, std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h, 0)}; }
  bool at(int x, int y) const { return erased[static_cast<std::size_t>(y) * width + x] != 0; }
  double erasedFraction() const;
};

/// h x w x c grid. Channels: [mask | normalized depth | view-space normal
/// (3) | radial position encoding (c-5)].
struct FeatureMap {
  int width = 0, height = 0, channels = 0;
  std::vector<double> data;  // row-major [y][x][c]

  double* at(int x, int y) { return data.data() + (static_cast<std::size_t>(y) * width + x) * channels; }
  const double* at(int x, int y) const { return data.data() + (static_cast<std::size_t>(y) * width + x) * channels; }
};

struct ProjectionSettings {
  int mapSize = 32;        // feature map is mapSize x mapSize
  int channels = 8;        // c >= 5
  int splatRadius = 1;     // z-buffer splat radius in texels
  double depthEps = 0.02;  // visibility tolerance in canonical units
};

// Ray-casts the mesh through the camera at feature-map resolution. Masked
// pixels carry all-zero features; depth is normalized to [0,1] over the
// visible range. Throws DataError if the mesh is entirely off-screen.
FeatureMap renderFeatureMap(const BodySurface& body, const Camera& cam,
                            const OcclusionMask& mask, const ProjectionSettings& settings);

// Bilinear feature lookup at each point's projection, with point-splat
// z-buffer visibility. Out-of-frustum, masked and occluded points receive
// exactly the zero vector.
RowMatrixXd samplePointFeatures(const PointCloud& points, const Camera& cam,
                                const FeatureMap& fmap, const ProjectionSettings& settings);

}  // namespace mhcd
