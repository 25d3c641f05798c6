#pragma once

#include <string>
#include <vector>

#include "mhcd/body.hpp"
#include "mhcd/camera.hpp"
#include "mhcd/config.hpp"
#include "mhcd/types.hpp"

namespace mhcd {

/// One (body, view) record of a dataset split. Mesh/point/mask payloads
/// live in files next to the manifest; body parameters are embedded so
/// hypothesis sampling can re-pose the skeleton at evaluation time.
struct DatasetItem {
  std::string id;
  int bodyIndex = 0;
  int viewIndex = 0;
  std::uint64_t bodySeed = 0;
  double maskRatio = 0;
  std::string scanPath;
  std::string bodyPath;
  std::string pointsPath;
  std::string maskPath;
  Camera camera;
  CapsuleBody bodyParams;
};

struct DatasetSplit {
  std::string name;
  std::string directory;
  std::vector<DatasetItem> items;
};

// Writes train/val/test splits: per body a scan mesh, a body-prior mesh
// and an FPS target cloud; per view a camera and an occlusion mask; one
// JSON-lines manifest per split. Deterministic per config seed.
void generateDataset(const RunConfig& cfg, const std::string& outDir);

DatasetSplit loadSplit(const std::string& datasetDir, const std::string& splitName);

}  // namespace mhcd
