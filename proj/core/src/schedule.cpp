#include "mhcd/schedule.hpp"

#include <cmath>
#include <cstring>

namespace mhcd {

NoiseSchedule::NoiseSchedule(const ScheduleParams& params) : params_(params) {
  const int T = params.steps;
  if (T < 1) throw ConfigError("schedule needs at least one step");
  if (!(params.betaStart > 0) || !(params.betaEnd < 1) ||
      params.betaStart > params.betaEnd)
    throw ConfigError("schedule betas must satisfy 0 < betaStart <= betaEnd < 1");

  auto linearBeta = [&](int t) {
    if (T == 1) return params.betaStart;
    return params.betaStart +
           (params.betaEnd - params.betaStart) * (t - 1) / static_cast<double>(T - 1);
  };

  beta_.resize(static_cast<std::size_t>(T));
  for (int t = 1; t <= T; ++t) beta_[t - 1] = linearBeta(t);

  // Quadratic ramp from betaStart/10 up to the linear curve at t = warmup.
  const int warmup = std::min(params.warmupSteps, T);
  if (warmup >= 2) {
    const double b0 = params.betaStart / 10.0;
    const double b1 = linearBeta(warmup);
    for (int t = 1; t <= warmup; ++t) {
      const double s = (t - 1) / static_cast<double>(warmup - 1);
      beta_[t - 1] = b0 + (b1 - b0) * s * s;
    }
  }

  alpha_.resize(beta_.size());
  alphaBar_.resize(beta_.size());
  double bar = 1.0;
  for (std::size_t i = 0; i < beta_.size(); ++i) {
    alpha_[i] = 1.0 - beta_[i];
    bar *= alpha_[i];
    alphaBar_[i] = bar;
  }
}

std::uint64_t NoiseSchedule::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  };
  const std::uint64_t steps = beta_.size();
  mix(&steps, sizeof steps);
  mix(beta_.data(), beta_.size() * sizeof(double));
  return h;
}

}  // namespace mhcd
