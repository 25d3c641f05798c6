#pragma once

#include <cstdint>
#include <functional>

#include "mhcd/camera.hpp"
#include "mhcd/conditioning.hpp"
#include "mhcd/denoiser.hpp"
#include "mhcd/feature_map.hpp"
#include "mhcd/rng.hpp"
#include "mhcd/schedule.hpp"
#include "mhcd/types.hpp"

namespace mhcd {

// N x 3 standard normal draw from the given stream.
PointCloud drawNormal(Eigen::Index n, Rng& rng);

// sqrt(alphaBar_t) X0 + sqrt(1 - alphaBar_t) eps.
PointCloud forwardNoise(const PointCloud& x0, int t, const PointCloud& eps,
                        const NoiseSchedule& sched);

// Mean over points of the squared noise-prediction error (3 per point for
// a zero predictor against standard normal noise).
double noisePredictionLoss(const PointCloud& eps, const RowMatrixXd& predicted);
RowMatrixXd noisePredictionLossGrad(const PointCloud& eps, const RowMatrixXd& predicted);

// Per-point concatenation [x | projected features | body features].
RowMatrixXd assembleConditionInput(const PointCloud& xt, const RowMatrixXd& projFeatures,
                                   const RowMatrixXd* bodyFeatures);

struct TrainingExample {
  const PointCloud* x0 = nullptr;
  const BodySurface* body = nullptr;  // null only when bodyChannels == 0
  Camera camera;
  const FeatureMap* featureMap = nullptr;
};

struct TrainStepResult {
  double loss = 0;
  std::vector<double> paramGrad;
};

// One noise-prediction training step: noise X0 to X_t, recondition on X_t
// (projected features plus single-mesh body features), evaluate the
// denoiser and return the loss with its parameter gradient.
TrainStepResult trainingStep(const TrainingExample& example, int t, const PointCloud& eps,
                             const ParameterSet& params, const DenoiserConfig& cfg,
                             const NoiseSchedule& sched, const EncodingConfig& enc,
                             const ConditioningOptions& opts,
                             const ProjectionSettings& proj);

using NoisePredictor = std::function<RowMatrixXd(const RowMatrixXd& input, int t)>;

struct SampleSettings {
  int numPoints = 2048;
  std::uint64_t seed = 0;
  bool useBodyConditioning = true;
  EncodingConfig encoding;
  ConditioningOptions conditioning;
  ProjectionSettings projection;
};

// Test instrumentation: observes the per-step state and condition input.
struct SampleHooks {
  std::function<void(int t, const PointCloud& xt, const RowMatrixXd& input)> onStep;
};

// Ancestral DDPM sampling (z = 0 at t = 1). Conditioning is recomputed
// from X_t at every step. Pure function of (inputs, seed).
PointCloud sampleDdpm(const Camera& cam, const FeatureMap& fmap, const HypothesisSet& hyps,
                      const NoisePredictor& predict, const NoiseSchedule& sched,
                      const SampleSettings& settings, const SampleHooks* hooks = nullptr);

}  // namespace mhcd
