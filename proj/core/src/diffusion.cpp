#include "mhcd/diffusion.hpp"

#include <cmath>

namespace mhcd {

PointCloud drawNormal(Eigen::Index n, Rng& rng) {
  PointCloud out(n, 3);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int k = 0; k < 3; ++k) out(i, k) = rng.normal();
  return out;
}

PointCloud forwardNoise(const PointCloud& x0, int t, const PointCloud& eps,
                        const NoiseSchedule& sched) {
  if (eps.rows() != x0.rows()) throw ConfigError("noise draw shape mismatch");
  const double abar = sched.alphaBar(t);  // throws when t is out of [1, T]
  return std::sqrt(abar) * x0 + std::sqrt(1.0 - abar) * eps;
}

double noisePredictionLoss(const PointCloud& eps, const RowMatrixXd& predicted) {
  if (predicted.rows() != eps.rows() || predicted.cols() != 3)
    throw ConfigError("noise prediction shape mismatch");
  return (eps - predicted).squaredNorm() / static_cast<double>(eps.rows());
}

RowMatrixXd noisePredictionLossGrad(const PointCloud& eps, const RowMatrixXd& predicted) {
  return 2.0 * (predicted - eps) / static_cast<double>(eps.rows());
}

RowMatrixXd assembleConditionInput(const PointCloud& xt, const RowMatrixXd& projFeatures,
                                   const RowMatrixXd* bodyFeatures) {
  const Eigen::Index bodyCols = bodyFeatures ? bodyFeatures->cols() : 0;
  RowMatrixXd input(xt.rows(), 3 + projFeatures.cols() + bodyCols);
  input.leftCols(3) = xt;
  input.middleCols(3, projFeatures.cols()) = projFeatures;
  if (bodyFeatures) input.rightCols(bodyCols) = *bodyFeatures;
  return input;
}

TrainStepResult trainingStep(const TrainingExample& example, int t, const PointCloud& eps,
                             const ParameterSet& params, const DenoiserConfig& cfg,
                             const NoiseSchedule& sched, const EncodingConfig& enc,
                             const ConditioningOptions& opts,
                             const ProjectionSettings& proj) {
  if (!example.x0 || !example.featureMap) throw DataError("incomplete training example");
  if (cfg.bodyChannels > 0 && !example.body)
    throw DataError("training example lacks the ground-truth body mesh");

  const PointCloud xt = forwardNoise(*example.x0, t, eps, sched);
  const RowMatrixXd projFeat =
      samplePointFeatures(xt, example.camera, *example.featureMap, proj);

  RowMatrixXd bodyFeat;
  const RowMatrixXd* bodyPtr = nullptr;
  if (cfg.bodyChannels > 0) {
    bodyFeat = singleMeshFeature(xt, *example.body, enc, opts);
    bodyPtr = &bodyFeat;
  }

  const RowMatrixXd input = assembleConditionInput(xt, projFeat, bodyPtr);
  const RowMatrixXd predicted = denoiserForward(params, cfg, input, t);

  TrainStepResult result;
  result.loss = noisePredictionLoss(eps, predicted);
  const RowMatrixXd outGrad = noisePredictionLossGrad(eps, predicted);
  result.paramGrad = denoiserBackward(params, cfg, input, t, outGrad).paramGrad;
  return result;
}

PointCloud sampleDdpm(const Camera& cam, const FeatureMap& fmap, const HypothesisSet& hyps,
                      const NoisePredictor& predict, const NoiseSchedule& sched,
                      const SampleSettings& settings, const SampleHooks* hooks) {
  if (settings.numPoints < 1) throw ConfigError("sample needs at least one point");
  if (settings.useBodyConditioning && hyps.empty())
    throw DataError("empty hypothesis set");

  Rng rng(childSeed(settings.seed, "ddpm"));
  PointCloud x = drawNormal(settings.numPoints, rng);

  for (int t = sched.steps(); t >= 1; --t) {
    const RowMatrixXd projFeat = samplePointFeatures(x, cam, fmap, settings.projection);

    RowMatrixXd bodyFeat;
    const RowMatrixXd* bodyPtr = nullptr;
    if (settings.useBodyConditioning) {
      bodyFeat = multiHypothesisFeature(x, hyps, settings.encoding, settings.conditioning);
      bodyPtr = &bodyFeat;
    }
    const RowMatrixXd input = assembleConditionInput(x, projFeat, bodyPtr);
    if (hooks && hooks->onStep) hooks->onStep(t, x, input);

    const RowMatrixXd epsHat = predict(input, t);
    if (epsHat.rows() != x.rows() || epsHat.cols() != 3)
      throw ConfigError("noise predictor returned a wrong shape");
    if (!epsHat.allFinite()) throw NumericError("noise prediction is not finite");

    const double alpha = sched.alpha(t);
    const double abar = sched.alphaBar(t);
    const PointCloud mean =
        (x - ((1.0 - alpha) / std::sqrt(1.0 - abar)) * epsHat) / std::sqrt(alpha);

    if (t > 1) {
      const PointCloud z = drawNormal(x.rows(), rng);
      x = mean + std::sqrt(sched.beta(t)) * z;
    } else {
      x = mean;
    }
    if (!x.allFinite()) throw NumericError("diffusion state diverged to non-finite values");
  }
  return x;
}

}  // namespace mhcd
