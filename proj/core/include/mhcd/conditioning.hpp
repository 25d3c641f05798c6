#pragma once

#include <memory>
#include <vector>

#include <Eigen/Core>

#include "mhcd/bvh.hpp"
#include "mhcd/types.hpp"

namespace mhcd {

struct EncodingConfig {
  int bands = 6;       // L; encoded scalar width is 2L
  double base = 2.0;   // frequency ladder base
  bool clampDistance = true;  // clamp d to [-1,1] before encoding
};

// Ablation toggles. Each switch removes (not zeroes) its feature slice.
struct ConditioningOptions {
  bool useOccupancy = true;
  bool useSignedDistance = true;
  bool useNormal = true;
  bool useEncoding = true;  // off: raw scalars instead of sinusoids
  bool selectByAbsDistance = true;  // off: raw argmin of signed distance
  SignConvention sign = SignConvention::InsideNegative;
};

// 4L+3 with everything enabled and encoding on.
int bodyFeatureWidth(const EncodingConfig& cfg, const ConditioningOptions& opts);

// (sin(base^0 pi x), cos(base^0 pi x), ..., sin(base^(L-1) pi x), cos(...)).
void positionalEncode(double x, const EncodingConfig& cfg, double* out);
std::vector<double> positionalEncode(double x, const EncodingConfig& cfg);

using HypothesisSet = std::vector<std::shared_ptr<const BodySurface>>;

// Per-point [gamma(o) | gamma(d) | n] against a single watertight body.
RowMatrixXd singleMeshFeature(const PointCloud& points, const BodySurface& body,
                                  const EncodingConfig& cfg,
                                  const ConditioningOptions& opts = {});

// Per-point [mean_i gamma(o_i) | gamma(d_sel) | n_sel] where the selected
// hypothesis minimizes |d| (ties: raw d, then content hash — permutation
// invariant by construction). s=1 reduces bit-exactly to singleMeshFeature.
RowMatrixXd multiHypothesisFeature(const PointCloud& points, const HypothesisSet& hyps,
                                       const EncodingConfig& cfg,
                                       const ConditioningOptions& opts = {});

}  // namespace mhcd
