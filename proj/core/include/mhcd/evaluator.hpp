#pragma once

#include <string>

#include "mhcd/config.hpp"
#include "mhcd/dataset.hpp"
#include "mhcd/denoiser.hpp"
#include "mhcd/metrics.hpp"
#include "mhcd/schedule.hpp"

namespace mhcd {

struct LoadedModel {
  DenoiserConfig config;
  ParameterSet params;
  NoiseSchedule schedule;
  ConditioningMode mode = ConditioningMode::Multi;
};

// Loads the checkpoint against the run config's schedule (refuses on
// schedule-hash mismatch) and wires the conditioning mode's input width.
LoadedModel loadModel(const std::string& checkpointPath, const RunConfig& cfg,
                      ConditioningMode mode);

struct EvalRun {
  double occlusionRatio = 0.4;
  int hypothesisCount = 10;
  std::uint64_t seed = 0;
  ConditioningMode mode = ConditioningMode::Multi;
};

struct EvalResult {
  SampleScore score;
  PointCloud cloud;
};

// One full denoising run for a dataset item: fresh deterministic mask at
// the requested ratio, hypotheses re-sampled from the stored body
// parameters, DDPM sampling, Chamfer/P2S against the ground-truth scan.
EvalResult evaluateItem(const DatasetItem& item, const LoadedModel& model,
                        const RunConfig& cfg, const EvalRun& run);

// Baseline analog of scoring the body-prior mesh directly: the first
// sampled hypothesis' vertices act as the predicted cloud.
SampleScore scoreHypothesisBaseline(const DatasetItem& item, const RunConfig& cfg,
                                    const EvalRun& run);

struct EvalTask {
  const DatasetItem* item = nullptr;
  EvalRun run;
};

// Runs tasks on a small thread pool; results are positionally aligned
// with tasks and independent of scheduling order.
std::vector<SampleScore> runEvalTasks(const std::vector<EvalTask>& tasks,
                                      const LoadedModel& model, const RunConfig& cfg,
                                      int threads);

// The full evaluation protocol: occlusion-ratio sweep, hypothesis-count
// sweep at the fixed ratio, and the body-prior baseline; writes CSV
// reports plus a JSON summary with per-group mean and standard error.
void runEvaluation(const RunConfig& cfg, const std::string& datasetDir,
                   const std::string& checkpointPath, const std::string& outDir);

// Single-item sampling entry for the CLI: writes <outDir>/<id>.ply plus a
// sidecar JSON with seed, hypothesis count, mode and timings.
std::string runSingleSample(const RunConfig& cfg, const std::string& datasetDir,
                            const std::string& checkpointPath, const std::string& itemId,
                            std::uint64_t seed, const std::string& outDir);

}  // namespace mhcd
