// Command-line front end: dataset generation, training, sampling,
// evaluation sweeps and ablations over the synthetic body corpus.

#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "mhcd/config.hpp"
#include "mhcd/rng.hpp"
#include "mhcd/dataset.hpp"
#include "mhcd/evaluator.hpp"
#include "mhcd/trainer.hpp"

namespace fs = std::filesystem;
using namespace mhcd;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

RunConfig loadConfig(const std::string& path, const std::string& preset) {
  RunConfig cfg;
  if (!preset.empty()) cfg.applyPreset(preset);
  if (!path.empty()) {
    cfg = RunConfig::fromFile(path);
    if (!preset.empty() && preset != cfg.preset) {
      // Explicit --preset wins over the file's preset line, then file
      // overrides re-apply on top.
      RunConfig base;
      base.applyPreset(preset);
      std::ifstream in(path);
      std::stringstream buffer;
      buffer << in.rdbuf();
      cfg = RunConfig::fromString("preset = " + preset + "\n" + buffer.str());
    }
  }
  return cfg;
}

void reportProgress(const TrainProgress& p, std::uint64_t total, std::uint64_t logEvery) {
  if (p.step % std::max<std::uint64_t>(1, logEvery) == 0 || p.step == total || p.step == 1)
    std::cout << "step " << p.step << "/" << total << "  loss " << p.loss << "  smoothed "
              << p.smoothedLoss << "\n";
}

struct AblationVariant {
  std::string name;
  std::function<void(RunConfig&)> apply;
};

const std::vector<AblationVariant>& ablationVariants() {
  static const std::vector<AblationVariant> variants = {
      {"full", [](RunConfig&) {}},
      {"no-occupancy", [](RunConfig& c) { c.conditioning.useOccupancy = false; }},
      {"no-signed-distance", [](RunConfig& c) { c.conditioning.useSignedDistance = false; }},
      {"no-normal", [](RunConfig& c) { c.conditioning.useNormal = false; }},
      {"no-encoding", [](RunConfig& c) { c.conditioning.useEncoding = false; }},
      {"image-only",
       [](RunConfig& c) {
         c.trainConditioning = ConditioningMode::None;
         c.conditioningMode = ConditioningMode::None;
       }},
      {"no-masking", [](RunConfig& c) { c.trainUseMasks = false; }},
      {"trained-on-estimates",
       [](RunConfig& c) { c.trainConditioning = ConditioningMode::EstimatedSingle; }},
  };
  return variants;
}

int run(int argc, char** argv) {
  CLI::App app{"point-cloud diffusion for occluded body reconstruction"};
  app.require_subcommand(1);

  std::string configPath, preset, dataDir, outDir, checkpoint, resume, itemId, variantsCsv;
  std::uint64_t seedOverride = 0;
  bool hasSeed = false;

  auto addCommon = [&](CLI::App* cmd) {
    cmd->add_option("--config", configPath, "key=value run configuration file");
    cmd->add_option("--preset", preset, "configuration preset: desk or paper");
  };

  CLI::App* genData = app.add_subcommand("gen-data", "generate a synthetic dataset");
  addCommon(genData);
  genData->add_option("--out", outDir, "output dataset directory")->required();

  CLI::App* train = app.add_subcommand("train", "train a denoiser checkpoint");
  addCommon(train);
  train->add_option("--data", dataDir, "dataset directory")->required();
  train->add_option("--out", outDir, "output directory")->required();
  train->add_option("--resume", resume, "training-state file to resume from");

  CLI::App* sample = app.add_subcommand("sample", "denoise one test item to a PLY cloud");
  addCommon(sample);
  sample->add_option("--data", dataDir, "dataset directory")->required();
  sample->add_option("--checkpoint", checkpoint, "model checkpoint")->required();
  sample->add_option("--id", itemId, "test item id, e.g. body0000_view0")->required();
  sample->add_option("--out", outDir, "output directory")->required();
  sample->add_option("--seed", seedOverride, "sampling seed")->each([&](const std::string&) {
    hasSeed = true;
  });

  CLI::App* evalCmd = app.add_subcommand("eval", "occlusion/hypothesis sweeps + baseline");
  addCommon(evalCmd);
  evalCmd->add_option("--data", dataDir, "dataset directory")->required();
  evalCmd->add_option("--checkpoint", checkpoint, "model checkpoint")->required();
  evalCmd->add_option("--out", outDir, "output directory")->required();

  CLI::App* ablate = app.add_subcommand("ablate", "train+eval the ablation matrix");
  addCommon(ablate);
  ablate->add_option("--data", dataDir, "dataset directory")->required();
  ablate->add_option("--out", outDir, "output directory")->required();
  ablate->add_option("--variants", variantsCsv,
                     "comma-separated variant subset (default: all)");

  CLI11_PARSE(app, argc, argv);

  RunConfig cfg = loadConfig(configPath, preset);

  if (genData->parsed()) {
    generateDataset(cfg, outDir);
    std::cout << "dataset written to " << outDir << "\n";
    return kExitOk;
  }

  if (train->parsed()) {
    const TrainOutput out = trainModel(cfg, dataDir, outDir, resume,
                                       [&](const TrainProgress& p) {
                                         reportProgress(p, cfg.trainSteps, cfg.trainLogEvery);
                                       });
    std::cout << "checkpoint: " << out.checkpointPath << "\n"
              << "train state: " << out.trainStatePath << "\n"
              << "final smoothed loss: " << out.finalSmoothedLoss << "\n";
    return kExitOk;
  }

  if (sample->parsed()) {
    const std::uint64_t seed = hasSeed ? seedOverride : cfg.seed;
    const std::string ply =
        runSingleSample(cfg, dataDir, checkpoint, itemId, seed, outDir);
    std::cout << "wrote " << ply << "\n";
    return kExitOk;
  }

  if (evalCmd->parsed()) {
    runEvaluation(cfg, dataDir, checkpoint, outDir);
    std::cout << "reports written to " << outDir << "\n";
    return kExitOk;
  }

  if (ablate->parsed()) {
    std::vector<std::string> wanted;
    if (!variantsCsv.empty()) {
      std::stringstream ss(variantsCsv);
      std::string item;
      while (std::getline(ss, item, ',')) wanted.push_back(item);
    }
    std::ofstream table(fs::path(outDir).string() + "/ablation.csv");
    fs::create_directories(outDir);
    table.open(fs::path(outDir) / "ablation.csv");
    table << "variant,mean_chamfer_cm,mean_p2s_cm\n";

    for (const auto& variant : ablationVariants()) {
      if (!wanted.empty() &&
          std::find(wanted.begin(), wanted.end(), variant.name) == wanted.end())
        continue;
      RunConfig vcfg = cfg;
      variant.apply(vcfg);
      const std::string vdir = (fs::path(outDir) / variant.name).string();
      std::cout << "[ablate] training variant '" << variant.name << "'\n";
      const TrainOutput trained = trainModel(vcfg, dataDir, vdir);

      // Score the trained variant on the occluded test split.
      const DatasetSplit test = loadSplit(dataDir, "test");
      const LoadedModel model =
          loadModel(trained.checkpointPath, vcfg, vcfg.conditioningMode);
      std::vector<EvalTask> tasks;
      for (const auto& item : test.items)
        for (int s = 0; s < vcfg.evalSeeds; ++s)
          tasks.push_back({&item,
                           {vcfg.evalFixedRatio, vcfg.hypothesisCount,
                            childSeed(vcfg.seed, "ablate", tasks.size()),
                            vcfg.conditioningMode}});
      EvalReport report;
      report.label = variant.name;
      report.samples = runEvalTasks(tasks, model, vcfg, vcfg.evalThreads);
      writeReportCsv((fs::path(vdir) / "eval.csv").string(), report);
      table << variant.name << "," << report.meanChamferCm() << "," << report.meanP2sCm()
            << "\n";
      table.flush();
      std::cout << "[ablate] " << variant.name << ": chamfer " << report.meanChamferCm()
                << " cm\n";
    }
    return kExitOk;
  }

  return kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
