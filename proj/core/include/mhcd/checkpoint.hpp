#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mhcd/types.hpp"

namespace mhcd {

// Model checkpoint container: magic "MHCD", u32 format version, u64
// schedule hash, u64 parameter count, then the flat parameter array as
// little-endian 32-bit floats. Loading refuses a schedule-hash mismatch.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void saveCheckpoint(const std::string& path, const std::vector<double>& params,
                    std::uint64_t scheduleHash);

std::vector<double> loadCheckpoint(const std::string& path, std::uint64_t expectedScheduleHash);

// Reads only the stored schedule hash (for diagnostics).
std::uint64_t checkpointScheduleHash(const std::string& path);

// Training-state sidecar ("MHCT"): full-precision parameters plus AdamW
// moments and the step counter, enabling bit-identical training resume.
// The "MHCD" container above stays the interchange format for inference.
struct TrainState {
  std::uint64_t step = 0;
  std::uint64_t scheduleHash = 0;
  std::vector<double> params;
  std::vector<double> m;
  std::vector<double> v;
};

void saveTrainState(const std::string& path, const TrainState& state);
TrainState loadTrainState(const std::string& path);

}  // namespace mhcd
