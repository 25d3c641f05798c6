#include "mhcd/optimizer.hpp"

#include <cmath>

namespace mhcd {

AdamW::AdamW(std::size_t paramCount, const AdamWConfig& cfg)
    : cfg_(cfg), m_(paramCount, 0.0), v_(paramCount, 0.0) {}

void AdamW::step(std::vector<double>& params, const std::vector<double>& grad,
                 double lrScale) {
  if (params.size() != m_.size() || grad.size() != m_.size())
    throw ConfigError("optimizer parameter count mismatch");

  ++stepCount_;
  const double lr = cfg_.learningRate * lrScale;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(stepCount_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(stepCount_));

  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * grad[i];
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * grad[i] * grad[i];
    const double mHat = m_[i] / c1;
    const double vHat = v_[i] / c2;
    params[i] -= lr * (mHat / (std::sqrt(vHat) + cfg_.epsilon) + cfg_.weightDecay * params[i]);
  }
}

void AdamW::restore(std::uint64_t stepCount, std::vector<double> m, std::vector<double> v) {
  if (m.size() != m_.size() || v.size() != v_.size())
    throw ConfigError("optimizer state size mismatch");
  stepCount_ = stepCount;
  m_ = std::move(m);
  v_ = std::move(v);
}

}  // namespace mhcd
