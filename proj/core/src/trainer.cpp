#include "mhcd/trainer.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <unordered_map>

#include "mhcd/checkpoint.hpp"
#include "mhcd/diffusion.hpp"
#include "mhcd/mesh_io.hpp"
#include "mhcd/rng.hpp"

namespace fs = std::filesystem;

namespace mhcd {

namespace {

struct LoadedItem {
  PointCloud points;  // X0 target
  std::shared_ptr<const BodySurface> conditionBody;  // null in mode None
  Camera camera;
  FeatureMap featureMap;
};

std::vector<LoadedItem> loadTrainingItems(const RunConfig& cfg, const DatasetSplit& split) {
  std::vector<LoadedItem> items;
  items.reserve(split.items.size());

  // Scan surfaces and body priors are shared across views of one body.
  std::unordered_map<int, std::shared_ptr<BodySurface>> scans, bodies;
  std::unordered_map<int, PointCloud> pointsByBody;

  for (const auto& rec : split.items) {
    if (!scans.count(rec.bodyIndex)) {
      scans[rec.bodyIndex] = std::make_shared<BodySurface>(loadMesh(rec.scanPath));
      bodies[rec.bodyIndex] = std::make_shared<BodySurface>(loadMesh(rec.bodyPath));
      pointsByBody[rec.bodyIndex] = loadPlyPoints(rec.pointsPath);
    }

    LoadedItem item;
    item.points = pointsByBody[rec.bodyIndex];
    item.camera = rec.camera;

    OcclusionMask mask;
    if (cfg.trainUseMasks) {
      int w = 0, h = 0;
      std::vector<std::uint8_t> pixels;
      loadPgm(rec.maskPath, w, h, pixels);
      mask.width = w;
      mask.height = h;
      mask.erased = std::move(pixels);
    } else {
      mask = OcclusionMask::empty(rec.camera.width, rec.camera.height);
    }
    item.featureMap = renderFeatureMap(*scans[rec.bodyIndex], rec.camera, mask, cfg.features);

    switch (cfg.trainConditioning) {
      case ConditioningMode::GtSingle:
        item.conditionBody = bodies[rec.bodyIndex];
        break;
      case ConditioningMode::EstimatedSingle: {
        const HypothesisSampler sampler{cfg.hypothesisKappa, cfg.hypothesisLengthSigma};
        item.conditionBody = sampleHypothesis(
            rec.bodyParams, sampler,
            childSeed(cfg.seed, "train-est", static_cast<std::uint64_t>(items.size())));
        break;
      }
      case ConditioningMode::None:
        break;
      case ConditioningMode::Multi:
        throw ConfigError("train.conditioning must be gt-single, estimated-single or none");
    }
    items.push_back(std::move(item));
  }
  return items;
}

}  // namespace

TrainOutput trainModel(const RunConfig& cfg, const std::string& datasetDir,
                       const std::string& outDir, const std::string& resumeStatePath,
                       const std::function<void(const TrainProgress&)>& onProgress,
                       std::uint64_t stopAfterStep) {
  if (cfg.trainBatch < 1) throw ConfigError("train.batch must be >= 1");
  const DatasetSplit split = loadSplit(datasetDir, "train");
  const std::vector<LoadedItem> items = loadTrainingItems(cfg, split);

  const NoiseSchedule sched = cfg.makeSchedule();
  const DenoiserConfig dcfg = cfg.makeDenoiserConfig(cfg.trainConditioning);
  ParameterSet params = ParameterSet::init(dcfg);
  AdamW optimizer(params.size(), cfg.optim);

  std::uint64_t startStep = 0;
  if (!resumeStatePath.empty()) {
    TrainState state = loadTrainState(resumeStatePath);
    if (state.scheduleHash != sched.hash())
      throw DataError("training state schedule hash mismatch");
    if (state.params.size() != params.size())
      throw DataError("training state parameter count mismatch");
    params.values = std::move(state.params);
    optimizer.restore(state.step, std::move(state.m), std::move(state.v));
    startStep = state.step;
  }

  fs::create_directories(outDir);
  cfg.writeResolved(outDir);
  const std::string lossLogPath = (fs::path(outDir) / "loss.csv").string();
  std::ofstream lossLog(lossLogPath, startStep == 0 ? std::ios::trunc : std::ios::app);
  if (!lossLog) throw DataError("cannot write loss log: " + lossLogPath);
  if (startStep == 0) lossLog << "step,loss,smoothed\n";

  double smoothed = -1;
  std::vector<double> gradSum(params.size());

  const std::uint64_t lastStep =
      stopAfterStep > 0 ? std::min(stopAfterStep, cfg.trainSteps) : cfg.trainSteps;
  for (std::uint64_t step = startStep + 1; step <= lastStep; ++step) {
    Rng rng(childSeed(cfg.seed, "train-step", step));
    std::fill(gradSum.begin(), gradSum.end(), 0.0);
    double lossSum = 0;

    for (int b = 0; b < cfg.trainBatch; ++b) {
      const LoadedItem& item = items[rng.uniformIndex(items.size())];
      const int t = 1 + static_cast<int>(rng.uniformIndex(
                            static_cast<std::uint64_t>(sched.steps())));
      const PointCloud eps = drawNormal(item.points.rows(), rng);

      TrainingExample example;
      example.x0 = &item.points;
      example.body = item.conditionBody.get();
      example.camera = item.camera;
      example.featureMap = &item.featureMap;

      const TrainStepResult result = trainingStep(example, t, eps, params, dcfg, sched,
                                                  cfg.encoding, cfg.conditioning,
                                                  cfg.features);
      lossSum += result.loss;
      for (std::size_t i = 0; i < gradSum.size(); ++i)
        gradSum[i] += result.paramGrad[i];
    }

    const double loss = lossSum / cfg.trainBatch;
    if (!std::isfinite(loss)) throw NumericError("training loss is not finite");
    for (auto& g : gradSum) g /= cfg.trainBatch;

    // Learning rate decays linearly to zero over the configured steps.
    const double lrScale =
        1.0 - static_cast<double>(step - 1) / static_cast<double>(cfg.trainSteps);
    optimizer.step(params.values, gradSum, lrScale);

    smoothed = smoothed < 0 ? loss : 0.98 * smoothed + 0.02 * loss;
    if (step % cfg.trainLogEvery == 0 || step == lastStep || step == 1) {
      lossLog << step << "," << loss << "," << smoothed << "\n";
      lossLog.flush();
    }
    if (onProgress) onProgress({step, loss, smoothed});
  }

  TrainOutput out;
  out.checkpointPath = (fs::path(outDir) / "model.mhcd").string();
  out.trainStatePath = (fs::path(outDir) / "model.mhcdt").string();
  out.lossLogPath = lossLogPath;
  out.finalSmoothedLoss = smoothed;
  saveCheckpoint(out.checkpointPath, params.values, sched.hash());

  TrainState state;
  state.step = lastStep;
  state.scheduleHash = sched.hash();
  state.params = params.values;
  state.m = optimizer.firstMoment();
  state.v = optimizer.secondMoment();
  saveTrainState(out.trainStatePath, state);
  return out;
}

}  // namespace mhcd
