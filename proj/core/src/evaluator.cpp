#include "mhcd/evaluator.hpp"

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "mhcd/checkpoint.hpp"
#include "mhcd/diffusion.hpp"
#include "mhcd/mesh_io.hpp"
#include "mhcd/rng.hpp"
#include "mhcd/sampling.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace mhcd {

LoadedModel loadModel(const std::string& checkpointPath, const RunConfig& cfg,
                      ConditioningMode mode) {
  LoadedModel model{cfg.makeDenoiserConfig(mode), {}, cfg.makeSchedule(), mode};
  model.params = ParameterSet::init(model.config);
  std::vector<double> values = loadCheckpoint(checkpointPath, model.schedule.hash());
  if (values.size() != model.params.size())
    throw DataError("checkpoint parameter count does not match the configured model");
  model.params.values = std::move(values);
  return model;
}

namespace {

PointCloud meshVertices(const TriangleMesh& mesh) {
  PointCloud out(static_cast<Eigen::Index>(mesh.vertexCount()), 3);
  for (std::size_t i = 0; i < mesh.vertexCount(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = mesh.vertices()[i].transpose();
  return out;
}

HypothesisSet makeHypotheses(const DatasetItem& item, const RunConfig& cfg,
                             const EvalRun& run) {
  const HypothesisSampler sampler{cfg.hypothesisKappa, cfg.hypothesisLengthSigma};
  switch (run.mode) {
    case ConditioningMode::Multi:
      return sampleHypotheses(item.bodyParams, sampler, run.hypothesisCount,
                              childSeed(run.seed, "hyps"));
    case ConditioningMode::EstimatedSingle:
      // First element of the multi set, so single and multi runs with the
      // same seed share their first hypothesis.
      return {sampleHypothesis(item.bodyParams, sampler, childSeed(childSeed(run.seed, "hyps"), "hyp", 0))};
    case ConditioningMode::GtSingle: {
      HypothesisSet set;
      set.push_back(std::make_shared<BodySurface>(loadMesh(item.bodyPath)));
      return set;
    }
    case ConditioningMode::None:
      return {};
  }
  return {};
}

}  // namespace

EvalResult evaluateItem(const DatasetItem& item, const LoadedModel& model,
                        const RunConfig& cfg, const EvalRun& run) {
  const BodySurface scan(loadMesh(item.scanPath));

  const OcclusionMask mask = randomMask(item.camera.width, item.camera.height,
                                        childSeed(run.seed, "mask"), run.occlusionRatio);
  const FeatureMap fmap = renderFeatureMap(scan, item.camera, mask, cfg.features);
  const HypothesisSet hyps = makeHypotheses(item, cfg, run);

  SampleSettings settings;
  settings.numPoints = cfg.pointCount;
  settings.seed = run.seed;
  settings.useBodyConditioning = run.mode != ConditioningMode::None;
  settings.encoding = cfg.encoding;
  settings.conditioning = cfg.conditioning;
  settings.projection = cfg.features;

  const NoisePredictor predictor = [&model](const RowMatrixXd& input, int t) {
    return denoiserForward(model.params, model.config, input, t);
  };
  EvalResult result;
  result.cloud =
      sampleDdpm(item.camera, fmap, hyps, predictor, model.schedule, settings);

  const PointCloud scanVerts = meshVertices(scan.mesh);
  result.score.id = item.id;
  result.score.seed = run.seed;
  result.score.occlusionRatio = run.occlusionRatio;
  result.score.hypothesisCount =
      run.mode == ConditioningMode::Multi ? run.hypothesisCount : 1;
  result.score.chamferCm = chamferDistance(result.cloud, scanVerts) * kCanonicalToCm;
  result.score.p2sCm = pointToSurface(result.cloud, scan) * kCanonicalToCm;
  return result;
}

SampleScore scoreHypothesisBaseline(const DatasetItem& item, const RunConfig& cfg,
                                    const EvalRun& run) {
  EvalRun single = run;
  single.mode = ConditioningMode::EstimatedSingle;
  const HypothesisSet hyps = makeHypotheses(item, cfg, single);
  const TriangleMesh scan = loadMesh(item.scanPath);

  SampleScore score;
  score.id = item.id;
  score.seed = run.seed;
  score.occlusionRatio = run.occlusionRatio;
  score.hypothesisCount = 1;
  const PointCloud pred = meshVertices(hyps.front()->mesh);
  score.chamferCm = chamferDistance(pred, meshVertices(scan)) * kCanonicalToCm;
  score.p2sCm = pointToSurface(pred, BodySurface(scan)) * kCanonicalToCm;
  return score;
}

std::vector<SampleScore> runEvalTasks(const std::vector<EvalTask>& tasks,
                                      const LoadedModel& model, const RunConfig& cfg,
                                      int threads) {
  std::vector<SampleScore> scores(tasks.size());
  if (tasks.empty()) return scores;
  const int workerCount =
      threads > 0 ? threads
                  : std::max(1u, std::thread::hardware_concurrency());

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::string firstError;
  std::mutex errorMutex;

  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size() || failed.load()) return;
      try {
        scores[i] = evaluateItem(*tasks[i].item, model, cfg, tasks[i].run).score;
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(errorMutex);
        if (!failed.exchange(true)) firstError = e.what();
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  for (int w = 0; w < workerCount; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failed.load()) throw DataError("evaluation task failed: " + firstError);
  return scores;
}

namespace {

json groupSummary(const EvalReport& report) {
  double mean = 0, se = 0;
  report.seedStatistics(mean, se);
  json j;
  j["label"] = report.label;
  j["samples"] = report.samples.size();
  j["mean_chamfer_cm"] = report.meanChamferCm();
  j["mean_p2s_cm"] = report.meanP2sCm();
  j["seed_mean_chamfer_cm"] = mean;
  j["seed_stderr_chamfer_cm"] = se;
  return j;
}

}  // namespace

void runEvaluation(const RunConfig& cfg, const std::string& datasetDir,
                   const std::string& checkpointPath, const std::string& outDir) {
  const DatasetSplit test = loadSplit(datasetDir, "test");
  const LoadedModel model = loadModel(checkpointPath, cfg, cfg.conditioningMode);
  fs::create_directories(outDir);
  cfg.writeResolved(outDir);

  json summary;
  summary["chamfer_convention"] =
      "0.5*(mean_pred_to_ref + mean_ref_to_pred), reported in cm";

  // Occlusion-ratio sweep (shape of the cumulative occlusion test).
  {
    EvalReport report;
    report.label = "occlusion_sweep";
    std::vector<EvalTask> tasks;
    for (double ratio : cfg.evalOcclusionRatios)
      for (const auto& item : test.items)
        for (int s = 0; s < cfg.evalSeeds; ++s)
          tasks.push_back({&item,
                           {ratio, cfg.hypothesisCount,
                            childSeed(cfg.seed, "eval-occ", static_cast<std::uint64_t>(
                                                                tasks.size())),
                            cfg.conditioningMode}});
    report.samples = runEvalTasks(tasks, model, cfg, cfg.evalThreads);
    writeReportCsv((fs::path(outDir) / "occlusion_sweep.csv").string(), report);
    json groups = json::array();
    for (double ratio : cfg.evalOcclusionRatios) {
      EvalReport sub;
      sub.label = "occlusion=" + std::to_string(ratio);
      for (const auto& s : report.samples)
        if (s.occlusionRatio == ratio) sub.samples.push_back(s);
      groups.push_back(groupSummary(sub));
    }
    summary["occlusion_sweep"] = groups;
  }

  // Hypothesis-count sweep at the fixed ratio.
  {
    EvalReport report;
    report.label = "hypothesis_sweep";
    std::vector<EvalTask> tasks;
    for (int count : cfg.evalHypothesisCounts)
      for (const auto& item : test.items)
        for (int s = 0; s < cfg.evalSeeds; ++s)
          tasks.push_back({&item,
                           {cfg.evalFixedRatio, count,
                            childSeed(cfg.seed, "eval-hyp", static_cast<std::uint64_t>(
                                                                tasks.size())),
                            count == 1 ? ConditioningMode::EstimatedSingle
                                       : ConditioningMode::Multi}});
    report.samples = runEvalTasks(tasks, model, cfg, cfg.evalThreads);
    writeReportCsv((fs::path(outDir) / "hypothesis_sweep.csv").string(), report);
    json groups = json::array();
    for (int count : cfg.evalHypothesisCounts) {
      EvalReport sub;
      sub.label = "hypotheses=" + std::to_string(count);
      for (const auto& s : report.samples)
        if (s.hypothesisCount == (count == 1 ? 1 : count)) sub.samples.push_back(s);
      groups.push_back(groupSummary(sub));
    }
    summary["hypothesis_sweep"] = groups;
  }

  // Body-prior baseline: the hypothesis mesh scored directly.
  {
    EvalReport report;
    report.label = "hypothesis_baseline";
    std::size_t idx = 0;
    for (const auto& item : test.items)
      for (int s = 0; s < cfg.evalSeeds; ++s)
        report.samples.push_back(scoreHypothesisBaseline(
            item, cfg,
            {cfg.evalFixedRatio, 1, childSeed(cfg.seed, "eval-base", idx++),
             ConditioningMode::EstimatedSingle}));
    writeReportCsv((fs::path(outDir) / "baseline.csv").string(), report);
    summary["hypothesis_baseline"] = groupSummary(report);
  }

  std::ofstream out(fs::path(outDir) / "summary.json");
  if (!out) throw DataError("cannot write evaluation summary");
  out << summary.dump(2) << "\n";
}

std::string runSingleSample(const RunConfig& cfg, const std::string& datasetDir,
                            const std::string& checkpointPath, const std::string& itemId,
                            std::uint64_t seed, const std::string& outDir) {
  const DatasetSplit test = loadSplit(datasetDir, "test");
  const DatasetItem* item = nullptr;
  for (const auto& candidate : test.items)
    if (candidate.id == itemId) item = &candidate;
  if (!item) throw DataError("no test item with id '" + itemId + "'");

  const LoadedModel model = loadModel(checkpointPath, cfg, cfg.conditioningMode);

  const auto start = std::chrono::steady_clock::now();
  const EvalResult result = evaluateItem(
      *item, model, cfg,
      {cfg.evalFixedRatio, cfg.hypothesisCount, seed, cfg.conditioningMode});
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  fs::create_directories(outDir);
  const std::string plyPath = (fs::path(outDir) / (itemId + ".ply")).string();
  savePlyPoints(plyPath, result.cloud);

  json sidecar;
  sidecar["id"] = itemId;
  sidecar["seed"] = seed;
  sidecar["hypotheses"] = cfg.hypothesisCount;
  sidecar["mode"] = conditioningModeName(cfg.conditioningMode);
  sidecar["occlusionRatio"] = cfg.evalFixedRatio;
  sidecar["chamfer_cm"] = result.score.chamferCm;
  sidecar["p2s_cm"] = result.score.p2sCm;
  sidecar["seconds"] = seconds;
  std::ofstream out(fs::path(outDir) / (itemId + ".json"));
  if (!out) throw DataError("cannot write sample sidecar");
  out << sidecar.dump(2) << "\n";
  return plyPath;
}

}  // namespace mhcd
