#include "mhcd/dataset.hpp"

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "mhcd/mesh_io.hpp"
#include "mhcd/rng.hpp"
#include "mhcd/sampling.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace mhcd {

namespace {

json cameraToJson(const Camera& cam) {
  json j;
  j["fx"] = cam.fx;
  j["fy"] = cam.fy;
  j["cx"] = cam.cx;
  j["cy"] = cam.cy;
  j["width"] = cam.width;
  j["height"] = cam.height;
  j["rotation"] = std::vector<double>(cam.rotation.data(), cam.rotation.data() + 9);
  j["translation"] = std::vector<double>{cam.translation.x(), cam.translation.y(),
                                         cam.translation.z()};
  return j;
}

Camera cameraFromJson(const json& j) {
  Camera cam;
  cam.fx = j.at("fx");
  cam.fy = j.at("fy");
  cam.cx = j.at("cx");
  cam.cy = j.at("cy");
  cam.width = j.at("width");
  cam.height = j.at("height");
  const auto rot = j.at("rotation").get<std::vector<double>>();
  if (rot.size() != 9) throw DataError("camera rotation must have 9 entries");
  std::copy(rot.begin(), rot.end(), cam.rotation.data());
  const auto t = j.at("translation").get<std::vector<double>>();
  if (t.size() != 3) throw DataError("camera translation must have 3 entries");
  cam.translation = Vec3(t[0], t[1], t[2]);
  cam.validate();
  return cam;
}

json bodyParamsToJson(const CapsuleBody& body) {
  json j;
  json rotations = json::array();
  for (const auto& r : body.jointRotations)
    rotations.push_back({r.x(), r.y(), r.z()});
  j["jointRotations"] = rotations;
  j["lengthScales"] = body.lengthScales;
  j["clothingCoeffs"] = body.clothingCoeffs;
  j["frameScale"] = body.frameScale;
  j["frameOffset"] = {body.frameOffset.x(), body.frameOffset.y(), body.frameOffset.z()};
  j["gridRes"] = body.gridRes;
  return j;
}

CapsuleBody bodyParamsFromJson(const json& j) {
  CapsuleBody body;
  for (const auto& r : j.at("jointRotations"))
    body.jointRotations.emplace_back(r.at(0), r.at(1), r.at(2));
  body.lengthScales = j.at("lengthScales").get<std::vector<double>>();
  body.clothingCoeffs = j.at("clothingCoeffs").get<std::vector<double>>();
  if (body.jointRotations.size() != body.bones.size() ||
      body.lengthScales.size() != body.bones.size())
    throw DataError("body parameter arrays do not match the skeleton");
  body.frameScale = j.at("frameScale");
  const auto off = j.at("frameOffset").get<std::vector<double>>();
  body.frameOffset = Vec3(off.at(0), off.at(1), off.at(2));
  body.gridRes = j.at("gridRes");
  return body;
}

void generateSplit(const RunConfig& cfg, const std::string& splitName, int bodyCount,
                   const fs::path& splitDir) {
  fs::create_directories(splitDir);
  std::ofstream manifest(splitDir / "manifest.jsonl");
  if (!manifest) throw DataError("cannot write manifest in " + splitDir.string());

  BodyGenSettings gen;
  gen.gridRes = cfg.dataGridRes;

  for (int b = 0; b < bodyCount; ++b) {
    const std::uint64_t bodySeed = childSeed(cfg.seed, "body-" + splitName, b);
    const GeneratedBody body = generateBody(bodySeed, gen);

    char name[32];
    std::snprintf(name, sizeof name, "body%04d", b);
    const std::string scanFile = std::string(name) + "_scan.ply";
    const std::string bodyFile = std::string(name) + "_body.ply";
    const std::string pointsFile = std::string(name) + "_points.ply";
    savePlyMesh((splitDir / scanFile).string(), body.scanMesh);
    savePlyMesh((splitDir / bodyFile).string(), body.bodyMesh);

    const PointCloud points =
        farthestPointSample(body.scanMesh, cfg.pointCount, childSeed(bodySeed, "fps"));
    savePlyPoints((splitDir / pointsFile).string(), points);

    Rng maskRng(childSeed(bodySeed, "masks"));
    for (int v = 0; v < cfg.dataViews; ++v) {
      const Camera cam = makeBodyCamera(v, cfg.dataViews, gen);
      const double ratio =
          cfg.dataMaskRatios[maskRng.uniformIndex(cfg.dataMaskRatios.size())];
      const OcclusionMask mask = randomMask(cam.width, cam.height,
                                            childSeed(bodySeed, "mask", v), ratio);
      char maskName[48];
      std::snprintf(maskName, sizeof maskName, "%s_view%02d_mask.pgm", name, v);
      std::vector<std::uint8_t> pixels(mask.erased.size());
      for (std::size_t i = 0; i < pixels.size(); ++i)
        pixels[i] = mask.erased[i] ? 255 : 0;
      savePgm((splitDir / maskName).string(), mask.width, mask.height, pixels);

      json line;
      line["id"] = std::string(name) + "_view" + std::to_string(v);
      line["body"] = b;
      line["view"] = v;
      line["bodySeed"] = bodySeed;
      line["maskRatio"] = ratio;
      line["scan"] = scanFile;
      line["bodyMesh"] = bodyFile;
      line["points"] = pointsFile;
      line["mask"] = maskName;
      line["camera"] = cameraToJson(cam);
      line["bodyParams"] = bodyParamsToJson(body.params);
      manifest << line.dump() << "\n";
    }
  }
  if (!manifest) throw DataError("short write of manifest in " + splitDir.string());
}

}  // namespace

void generateDataset(const RunConfig& cfg, const std::string& outDir) {
  fs::create_directories(outDir);
  cfg.writeResolved(outDir);
  generateSplit(cfg, "train", cfg.dataTrainBodies, fs::path(outDir) / "train");
  generateSplit(cfg, "val", cfg.dataValBodies, fs::path(outDir) / "val");
  generateSplit(cfg, "test", cfg.dataTestBodies, fs::path(outDir) / "test");
}

DatasetSplit loadSplit(const std::string& datasetDir, const std::string& splitName) {
  DatasetSplit split;
  split.name = splitName;
  split.directory = (fs::path(datasetDir) / splitName).string();
  std::ifstream manifest(fs::path(split.directory) / "manifest.jsonl");
  if (!manifest)
    throw DataError("cannot open manifest for split '" + splitName + "' in " + datasetDir);

  std::string line;
  while (std::getline(manifest, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError(std::string("malformed manifest line: ") + e.what());
    }
    DatasetItem item;
    item.id = j.at("id");
    item.bodyIndex = j.at("body");
    item.viewIndex = j.at("view");
    item.bodySeed = j.at("bodySeed");
    item.maskRatio = j.at("maskRatio");
    const fs::path dir(split.directory);
    item.scanPath = (dir / j.at("scan").get<std::string>()).string();
    item.bodyPath = (dir / j.at("bodyMesh").get<std::string>()).string();
    item.pointsPath = (dir / j.at("points").get<std::string>()).string();
    item.maskPath = (dir / j.at("mask").get<std::string>()).string();
    item.camera = cameraFromJson(j.at("camera"));
    item.bodyParams = bodyParamsFromJson(j.at("bodyParams"));
    split.items.push_back(std::move(item));
  }
  if (split.items.empty())
    throw DataError("split '" + splitName + "' has no items");
  return split;
}

}  // namespace mhcd
