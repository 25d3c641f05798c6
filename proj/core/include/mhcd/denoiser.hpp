#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mhcd/types.hpp"

namespace mhcd {

/// Shared-MLP point network with symmetric max pooling: per-point features
/// run through a shared stack, a pooled global feature is projected and
/// concatenated back per point, and a zero-initialized linear head emits
/// the 3-channel noise prediction. Permutation-equivariant by construction.
struct DenoiserConfig {
  int pointChannels = 3;
  int projChannels = 8;    // c
  int bodyChannels = 27;   // 4L+3 with defaults; 0 disables body conditioning
  std::vector<int> hiddenWidths{128, 128, 256};
  int globalWidth = 256;
  int timeBands = 8;  // sinusoidal time embedding width is 2*timeBands
  std::uint64_t initSeed = 0;

  int inputWidth() const { return pointChannels + projChannels + bodyChannels; }
  void validate() const;
};

struct TensorSpec {
  std::string name;
  int rows = 0, cols = 0;  // cols == 1 for biases
  std::size_t offset = 0;
};

/// Flat parameter array plus a layout manifest.
struct ParameterSet {
  std::vector<double> values;
  std::vector<TensorSpec> manifest;

  static ParameterSet init(const DenoiserConfig& cfg);

  Eigen::Map<RowMatrixXd> tensor(const TensorSpec& spec) {
    return {values.data() + spec.offset, spec.rows, spec.cols};
  }
  Eigen::Map<const RowMatrixXd> tensor(const TensorSpec& spec) const {
    return {values.data() + spec.offset, spec.rows, spec.cols};
  }
  std::size_t size() const { return values.size(); }
};

struct DenoiserGradients {
  std::vector<double> paramGrad;  // same layout as ParameterSet.values
  RowMatrixXd inputGrad;          // N x inputWidth
};

// perPointInput is N x inputWidth; returns the N x 3 noise prediction.
RowMatrixXd denoiserForward(const ParameterSet& params, const DenoiserConfig& cfg,
                            const RowMatrixXd& perPointInput, double t);

// Exact reverse-mode gradients; max-pool routes to the argmax point with
// ties to the lowest index.
DenoiserGradients denoiserBackward(const ParameterSet& params, const DenoiserConfig& cfg,
                                   const RowMatrixXd& perPointInput, double t,
                                   const RowMatrixXd& outputGradient);

// 2*timeBands sinusoidal features of the raw step index.
std::vector<double> timeEmbedding(double t, int bands);

}  // namespace mhcd
