#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mhcd/conditioning.hpp"
#include "mhcd/denoiser.hpp"
#include "mhcd/feature_map.hpp"
#include "mhcd/optimizer.hpp"
#include "mhcd/schedule.hpp"

namespace mhcd {

enum class ConditioningMode { Multi, EstimatedSingle, GtSingle, None };

ConditioningMode conditioningModeFromString(const std::string& s);
std::string conditioningModeName(ConditioningMode mode);

/// Plain-text key=value run configuration. Unknown keys are rejected;
/// every run writes its resolved config beside its outputs. Two presets:
/// "desk" (CI-sized) and "paper" (paper-shaped sizes).
struct RunConfig {
  std::string preset = "desk";
  std::uint64_t seed = 1;

  ScheduleParams schedule{100, 1e-4, 8e-2, 50};
  EncodingConfig encoding;
  ProjectionSettings features;

  std::vector<int> denoiserHidden{128, 128, 256};
  int denoiserGlobalWidth = 256;
  int denoiserTimeBands = 8;

  int pointCount = 2048;

  AdamWConfig optim;

  std::uint64_t trainSteps = 20000;
  int trainBatch = 8;
  bool trainUseMasks = true;
  ConditioningMode trainConditioning = ConditioningMode::GtSingle;
  std::uint64_t trainLogEvery = 50;

  int dataTrainBodies = 50;
  int dataValBodies = 8;
  int dataTestBodies = 20;
  int dataViews = 6;
  int dataGridRes = 48;
  std::vector<double> dataMaskRatios{0.0, 0.1, 0.2, 0.3, 0.4};

  int hypothesisCount = 10;
  double hypothesisKappa = 40.0;
  double hypothesisLengthSigma = 0.02;

  ConditioningMode conditioningMode = ConditioningMode::Multi;
  ConditioningOptions conditioning;

  std::vector<double> evalOcclusionRatios{0.0, 0.1, 0.2, 0.3, 0.4};
  std::vector<int> evalHypothesisCounts{1, 5, 10, 15, 20};
  int evalSeeds = 10;
  double evalFixedRatio = 0.4;
  int evalThreads = 0;  // 0 = hardware concurrency

  void applyPreset(const std::string& name);

  static RunConfig fromFile(const std::string& path);
  static RunConfig fromString(const std::string& text);

  void setKey(const std::string& key, const std::string& value);
  std::string serialize() const;
  void writeResolved(const std::string& dir) const;

  // Derived builders.
  NoiseSchedule makeSchedule() const { return NoiseSchedule(schedule); }
  DenoiserConfig makeDenoiserConfig(ConditioningMode mode) const;
};

}  // namespace mhcd
