#include "mhcd/config.hpp"

#include <filesystem>
#include "mhcd/rng.hpp"
#include <fstream>
#include <sstream>

namespace mhcd {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

bool parseBool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("not a boolean: " + v);
}

double parseDouble(const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw ConfigError("trailing characters in number: " + v);
    return d;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError("not a number: " + v);
  }
}

long long parseInt(const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long i = std::stoll(v, &pos);
    if (pos != v.size()) throw ConfigError("trailing characters in integer: " + v);
    return i;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError("not an integer: " + v);
  }
}

template <typename T, typename Parse>
std::vector<T> parseList(const std::string& v, Parse parse) {
  std::vector<T> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(static_cast<T>(parse(item)));
  }
  if (out.empty()) throw ConfigError("empty list value: " + v);
  return out;
}

template <typename T>
std::string joinList(const std::vector<T>& v) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out << ",";
    out << v[i];
  }
  return out.str();
}

}  // namespace

ConditioningMode conditioningModeFromString(const std::string& s) {
  if (s == "multi") return ConditioningMode::Multi;
  if (s == "estimated-single") return ConditioningMode::EstimatedSingle;
  if (s == "gt-single") return ConditioningMode::GtSingle;
  if (s == "none") return ConditioningMode::None;
  throw ConfigError("unknown conditioning mode: " + s);
}

std::string conditioningModeName(ConditioningMode mode) {
  switch (mode) {
    case ConditioningMode::Multi: return "multi";
    case ConditioningMode::EstimatedSingle: return "estimated-single";
    case ConditioningMode::GtSingle: return "gt-single";
    case ConditioningMode::None: return "none";
  }
  return "multi";
}

void RunConfig::applyPreset(const std::string& name) {
  if (name == "desk") {
    // T=100 with beta endpoints rescaled x10 so alphaBar[T] matches the
    // paper-shape schedule's terminal signal level.
    schedule = {100, 1e-4, 8e-2, 50};
    pointCount = 2048;
    trainSteps = 20000;
    dataTrainBodies = 50;
    dataValBodies = 8;
    dataTestBodies = 20;
    dataViews = 6;
  } else if (name == "paper") {
    schedule = {1000, 1e-5, 8e-3, 50};
    pointCount = 16384;
    trainSteps = 100000;
    dataTrainBodies = 500;
    dataValBodies = 26;
    dataTestBodies = 26;
    dataViews = 36;
  } else {
    throw ConfigError("unknown preset: " + name + " (expected desk or paper)");
  }
  preset = name;
}

RunConfig RunConfig::fromFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return fromString(buffer.str());
}

RunConfig RunConfig::fromString(const std::string& text) {
  // Two passes so the preset applies before any explicit override,
  // regardless of key order in the file.
  RunConfig cfg;
  std::vector<std::pair<std::string, std::string>> pairs;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key=value, got: " + line);
    pairs.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  for (const auto& [k, v] : pairs)
    if (k == "preset") cfg.applyPreset(v);
  for (const auto& [k, v] : pairs)
    if (k != "preset") cfg.setKey(k, v);
  return cfg;
}

void RunConfig::setKey(const std::string& key, const std::string& value) {
  if (key == "seed") seed = static_cast<std::uint64_t>(parseInt(value));
  else if (key == "schedule.steps") schedule.steps = static_cast<int>(parseInt(value));
  else if (key == "schedule.betaStart") schedule.betaStart = parseDouble(value);
  else if (key == "schedule.betaEnd") schedule.betaEnd = parseDouble(value);
  else if (key == "schedule.warmup") schedule.warmupSteps = static_cast<int>(parseInt(value));
  else if (key == "encoding.bands") encoding.bands = static_cast<int>(parseInt(value));
  else if (key == "encoding.base") encoding.base = parseDouble(value);
  else if (key == "encoding.clamp") encoding.clampDistance = parseBool(value);
  else if (key == "features.channels") features.channels = static_cast<int>(parseInt(value));
  else if (key == "features.mapSize") features.mapSize = static_cast<int>(parseInt(value));
  else if (key == "features.splatRadius") features.splatRadius = static_cast<int>(parseInt(value));
  else if (key == "features.depthEps") features.depthEps = parseDouble(value);
  else if (key == "denoiser.hidden")
    denoiserHidden = parseList<int>(value, [](const std::string& s) { return parseInt(s); });
  else if (key == "denoiser.globalWidth") denoiserGlobalWidth = static_cast<int>(parseInt(value));
  else if (key == "denoiser.timeBands") denoiserTimeBands = static_cast<int>(parseInt(value));
  else if (key == "points.count") pointCount = static_cast<int>(parseInt(value));
  else if (key == "optim.learningRate") optim.learningRate = parseDouble(value);
  else if (key == "optim.beta1") optim.beta1 = parseDouble(value);
  else if (key == "optim.beta2") optim.beta2 = parseDouble(value);
  else if (key == "optim.weightDecay") optim.weightDecay = parseDouble(value);
  else if (key == "train.steps") trainSteps = static_cast<std::uint64_t>(parseInt(value));
  else if (key == "train.batch") trainBatch = static_cast<int>(parseInt(value));
  else if (key == "train.useMasks") trainUseMasks = parseBool(value);
  else if (key == "train.conditioning") trainConditioning = conditioningModeFromString(value);
  else if (key == "train.logEvery") trainLogEvery = static_cast<std::uint64_t>(parseInt(value));
  else if (key == "data.trainBodies") dataTrainBodies = static_cast<int>(parseInt(value));
  else if (key == "data.valBodies") dataValBodies = static_cast<int>(parseInt(value));
  else if (key == "data.testBodies") dataTestBodies = static_cast<int>(parseInt(value));
  else if (key == "data.views") dataViews = static_cast<int>(parseInt(value));
  else if (key == "data.gridRes") dataGridRes = static_cast<int>(parseInt(value));
  else if (key == "data.maskRatios")
    dataMaskRatios = parseList<double>(value, [](const std::string& s) { return parseDouble(s); });
  else if (key == "hypotheses.count") hypothesisCount = static_cast<int>(parseInt(value));
  else if (key == "hypotheses.kappa") hypothesisKappa = parseDouble(value);
  else if (key == "hypotheses.lengthSigma") hypothesisLengthSigma = parseDouble(value);
  else if (key == "conditioning.mode") conditioningMode = conditioningModeFromString(value);
  else if (key == "conditioning.useOccupancy") conditioning.useOccupancy = parseBool(value);
  else if (key == "conditioning.useSignedDistance")
    conditioning.useSignedDistance = parseBool(value);
  else if (key == "conditioning.useNormal") conditioning.useNormal = parseBool(value);
  else if (key == "conditioning.useEncoding") conditioning.useEncoding = parseBool(value);
  else if (key == "conditioning.selectByAbs") conditioning.selectByAbsDistance = parseBool(value);
  else if (key == "eval.occlusionRatios")
    evalOcclusionRatios =
        parseList<double>(value, [](const std::string& s) { return parseDouble(s); });
  else if (key == "eval.hypothesisCounts")
    evalHypothesisCounts = parseList<int>(value, [](const std::string& s) { return parseInt(s); });
  else if (key == "eval.seeds") evalSeeds = static_cast<int>(parseInt(value));
  else if (key == "eval.fixedRatio") evalFixedRatio = parseDouble(value);
  else if (key == "eval.threads") evalThreads = static_cast<int>(parseInt(value));
  else throw ConfigError("unknown config key: " + key);
}

std::string RunConfig::serialize() const {
  std::ostringstream out;
  out.precision(17);
  out << "preset = " << preset << "\n";
  out << "seed = " << seed << "\n";
  out << "schedule.steps = " << schedule.steps << "\n";
  out << "schedule.betaStart = " << schedule.betaStart << "\n";
  out << "schedule.betaEnd = " << schedule.betaEnd << "\n";
  out << "schedule.warmup = " << schedule.warmupSteps << "\n";
  out << "encoding.bands = " << encoding.bands << "\n";
  out << "encoding.base = " << encoding.base << "\n";
  out << "encoding.clamp = " << (encoding.clampDistance ? "true" : "false") << "\n";
  out << "features.channels = " << features.channels << "\n";
  out << "features.mapSize = " << features.mapSize << "\n";
  out << "features.splatRadius = " << features.splatRadius << "\n";
  out << "features.depthEps = " << features.depthEps << "\n";
  out << "denoiser.hidden = " << joinList(denoiserHidden) << "\n";
  out << "denoiser.globalWidth = " << denoiserGlobalWidth << "\n";
  out << "denoiser.timeBands = " << denoiserTimeBands << "\n";
  out << "points.count = " << pointCount << "\n";
  out << "optim.learningRate = " << optim.learningRate << "\n";
  out << "optim.beta1 = " << optim.beta1 << "\n";
  out << "optim.beta2 = " << optim.beta2 << "\n";
  out << "optim.weightDecay = " << optim.weightDecay << "\n";
  out << "train.steps = " << trainSteps << "\n";
  out << "train.batch = " << trainBatch << "\n";
  out << "train.useMasks = " << (trainUseMasks ? "true" : "false") << "\n";
  out << "train.conditioning = " << conditioningModeName(trainConditioning) << "\n";
  out << "train.logEvery = " << trainLogEvery << "\n";
  out << "data.trainBodies = " << dataTrainBodies << "\n";
  out << "data.valBodies = " << dataValBodies << "\n";
  out << "data.testBodies = " << dataTestBodies << "\n";
  out << "data.views = " << dataViews << "\n";
  out << "data.gridRes = " << dataGridRes << "\n";
  out << "data.maskRatios = " << joinList(dataMaskRatios) << "\n";
  out << "hypotheses.count = " << hypothesisCount << "\n";
  out << "hypotheses.kappa = " << hypothesisKappa << "\n";
  out << "hypotheses.lengthSigma = " << hypothesisLengthSigma << "\n";
  out << "conditioning.mode = " << conditioningModeName(conditioningMode) << "\n";
  out << "conditioning.useOccupancy = " << (conditioning.useOccupancy ? "true" : "false") << "\n";
  out << "conditioning.useSignedDistance = "
      << (conditioning.useSignedDistance ? "true" : "false") << "\n";
  out << "conditioning.useNormal = " << (conditioning.useNormal ? "true" : "false") << "\n";
  out << "conditioning.useEncoding = " << (conditioning.useEncoding ? "true" : "false") << "\n";
  out << "conditioning.selectByAbs = "
      << (conditioning.selectByAbsDistance ? "true" : "false") << "\n";
  out << "eval.occlusionRatios = " << joinList(evalOcclusionRatios) << "\n";
  out << "eval.hypothesisCounts = " << joinList(evalHypothesisCounts) << "\n";
  out << "eval.seeds = " << evalSeeds << "\n";
  out << "eval.fixedRatio = " << evalFixedRatio << "\n";
  out << "eval.threads = " << evalThreads << "\n";
  return out.str();
}

void RunConfig::writeResolved(const std::string& dir) const {
  std::filesystem::create_directories(dir);
  std::ofstream out(std::filesystem::path(dir) / "resolved_config.txt");
  if (!out) throw DataError("cannot write resolved config into " + dir);
  out << serialize();
}

DenoiserConfig RunConfig::makeDenoiserConfig(ConditioningMode mode) const {
  DenoiserConfig cfg;
  cfg.projChannels = features.channels;
  cfg.bodyChannels =
      mode == ConditioningMode::None ? 0 : bodyFeatureWidth(encoding, conditioning);
  cfg.hiddenWidths = denoiserHidden;
  cfg.globalWidth = denoiserGlobalWidth;
  cfg.timeBands = denoiserTimeBands;
  cfg.initSeed = childSeed(seed, "denoiser-init");
  return cfg;
}

}  // namespace mhcd
