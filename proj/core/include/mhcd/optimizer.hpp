#pragma once

#include <cstdint>
#include <vector>

#include "mhcd/types.hpp"

namespace mhcd {

/// Decoupled-weight-decay adaptive optimizer (AdamW). The learning-rate
/// scale is supplied per step so the trainer can decay it linearly to zero.
struct AdamWConfig {
  double learningRate = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weightDecay = 0.01;
};

class AdamW {
public:
  AdamW(std::size_t paramCount, const AdamWConfig& cfg = {});

  void step(std::vector<double>& params, const std::vector<double>& grad,
            double lrScale = 1.0);

  std::uint64_t stepCount() const { return stepCount_; }
  const std::vector<double>& firstMoment() const { return m_; }
  const std::vector<double>& secondMoment() const { return v_; }
  const AdamWConfig& config() const { return cfg_; }

  // Exact state restore for bit-identical training resume.
  void restore(std::uint64_t stepCount, std::vector<double> m, std::vector<double> v);

private:
  AdamWConfig cfg_;
  std::uint64_t stepCount_ = 0;
  std::vector<double> m_, v_;
};

}  // namespace mhcd
