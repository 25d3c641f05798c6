#pragma once

#include <cstdint>
#include <vector>

#include "mhcd/types.hpp"

namespace mhcd {

struct ScheduleParams {
  int steps = 1000;        // T
  double betaStart = 1e-5;
  double betaEnd = 8e-3;
  int warmupSteps = 50;    // quadratic ramp onto the linear curve
};

/// Per-step beta/alpha tables for the forward process. Steps are 1-based:
/// t in [1, T]. alphaBarAt(0) == 1.
class NoiseSchedule {
public:
  explicit NoiseSchedule(const ScheduleParams& params = {});

  int steps() const { return static_cast<int>(beta_.size()); }
  double beta(int t) const { return beta_[checked(t)]; }
  double alpha(int t) const { return alpha_[checked(t)]; }
  double alphaBar(int t) const { return alphaBar_[checked(t)]; }
  double alphaBarAt(int t) const { return t == 0 ? 1.0 : alphaBar(t); }

  const ScheduleParams& params() const { return params_; }

  // Used by the checkpoint container to refuse mismatched schedules.
  std::uint64_t hash() const;

private:
  ScheduleParams params_;
  std::vector<double> beta_, alpha_, alphaBar_;

  std::size_t checked(int t) const {
    if (t < 1 || t > steps()) throw ConfigError("diffusion step out of [1, T]");
    return static_cast<std::size_t>(t - 1);
  }
};

}  // namespace mhcd
