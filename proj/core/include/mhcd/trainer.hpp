#pragma once

#include <functional>
#include <string>

#include "mhcd/config.hpp"
#include "mhcd/dataset.hpp"

namespace mhcd {

struct TrainProgress {
  std::uint64_t step = 0;
  double loss = 0;
  double smoothedLoss = 0;
};

struct TrainOutput {
  std::string checkpointPath;
  std::string trainStatePath;
  std::string lossLogPath;
  double finalSmoothedLoss = 0;
};

// Runs the noise-prediction training loop over the train split and writes
// checkpoint + training state + CSV loss curve into outDir. Resuming from
// a training-state file continues bit-identically (per-step child seeds).
// stopAfterStep halts an otherwise unchanged schedule early (0 = run to
// cfg.trainSteps); the learning-rate decay always spans cfg.trainSteps.
TrainOutput trainModel(const RunConfig& cfg, const std::string& datasetDir,
                       const std::string& outDir, const std::string& resumeStatePath = "",
                       const std::function<void(const TrainProgress&)>& onProgress = {},
                       std::uint64_t stopAfterStep = 0);

}  // namespace mhcd
