#include "mhcd/checkpoint.hpp"

#include <bit>
#include <fstream>

static_assert(std::endian::native == std::endian::little,
              "checkpoint container assumes a little-endian host");

namespace mhcd {

namespace {

constexpr char kMagic[4] = {'M', 'H', 'C', 'D'};
constexpr char kTrainMagic[4] = {'M', 'H', 'C', 'T'};

template <typename T>
void writeRaw(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T readRaw(std::istream& in, const std::string& path) {
  T value;
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw DataError("truncated checkpoint file: " + path);
  return value;
}

}  // namespace

void saveCheckpoint(const std::string& path, const std::vector<double>& params,
                    std::uint64_t scheduleHash) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint: " + path);
  out.write(kMagic, 4);
  writeRaw(out, kCheckpointVersion);
  writeRaw(out, scheduleHash);
  writeRaw(out, static_cast<std::uint64_t>(params.size()));
  for (double p : params) writeRaw(out, static_cast<float>(p));
  if (!out) throw DataError("short write: " + path);
}

std::vector<double> loadCheckpoint(const std::string& path,
                                   std::uint64_t expectedScheduleHash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != std::string(kMagic, 4))
    throw DataError("not a checkpoint file: " + path);
  const auto version = readRaw<std::uint32_t>(in, path);
  if (version != kCheckpointVersion) throw DataError("unsupported checkpoint version");
  const auto hash = readRaw<std::uint64_t>(in, path);
  if (hash != expectedScheduleHash)
    throw DataError("checkpoint schedule hash mismatch: " + path);
  const auto count = readRaw<std::uint64_t>(in, path);
  std::vector<double> params(count);
  for (auto& p : params) p = readRaw<float>(in, path);
  return params;
}

std::uint64_t checkpointScheduleHash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != std::string(kMagic, 4))
    throw DataError("not a checkpoint file: " + path);
  readRaw<std::uint32_t>(in, path);
  return readRaw<std::uint64_t>(in, path);
}

void saveTrainState(const std::string& path, const TrainState& state) {
  if (state.m.size() != state.params.size() || state.v.size() != state.params.size())
    throw ConfigError("train state vectors must have equal length");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write train state: " + path);
  out.write(kTrainMagic, 4);
  writeRaw(out, kCheckpointVersion);
  writeRaw(out, state.scheduleHash);
  writeRaw(out, state.step);
  writeRaw(out, static_cast<std::uint64_t>(state.params.size()));
  auto writeVec = [&out](const std::vector<double>& v) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
  };
  writeVec(state.params);
  writeVec(state.m);
  writeVec(state.v);
  if (!out) throw DataError("short write: " + path);
}

TrainState loadTrainState(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open train state: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != std::string(kTrainMagic, 4))
    throw DataError("not a train state file: " + path);
  const auto version = readRaw<std::uint32_t>(in, path);
  if (version != kCheckpointVersion) throw DataError("unsupported train state version");
  TrainState state;
  state.scheduleHash = readRaw<std::uint64_t>(in, path);
  state.step = readRaw<std::uint64_t>(in, path);
  const auto count = readRaw<std::uint64_t>(in, path);
  auto readVec = [&in, &path, count]() {
    std::vector<double> v(count);
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (!in) throw DataError("truncated train state file: " + path);
    return v;
  };
  state.params = readVec();
  state.m = readVec();
  state.v = readVec();
  return state;
}

}  // namespace mhcd
