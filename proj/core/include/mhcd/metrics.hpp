#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mhcd/bvh.hpp"
#include "mhcd/mesh.hpp"
#include "mhcd/types.hpp"

namespace mhcd {

// Canonical unit -> reported "cm": the synthetic bodies nominally stand
// 1.8 canonical units = 180 cm, so one unit is 100 cm.
inline constexpr double kCanonicalToCm = 100.0;

// Halved sum of the two directed mean nearest-neighbour distances
// (convention stated in every report header). Grid-accelerated, equal to
// the O(N^2) scan.
double chamferDistance(const PointCloud& predicted, const PointCloud& reference);

// Mean unsigned distance from each predicted point to the mesh surface.
double pointToSurface(const PointCloud& predicted, const BodySurface& reference);

// Area-weighted triangle pick plus uniform barycentric draw.
PointCloud uniformSurfaceSample(const TriangleMesh& mesh, int count, std::uint64_t seed);

struct SampleScore {
  std::string id;
  std::uint64_t seed = 0;
  double occlusionRatio = 0;
  int hypothesisCount = 0;
  double chamferCm = 0;
  double p2sCm = 0;
};

struct EvalReport {
  std::string label;
  std::vector<SampleScore> samples;

  double meanChamferCm() const;
  double meanP2sCm() const;
  // Mean and standard error over per-seed means (multi-seed protocol).
  void seedStatistics(double& meanOut, double& stderrOut) const;
};

void writeReportCsv(const std::string& path, const EvalReport& report);

}  // namespace mhcd
