#include "mhcd/denoiser.hpp"

#include <cmath>
#include <random>

namespace mhcd {

namespace {

double softplus(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

RowMatrixXd softplusMat(const RowMatrixXd& z) {
  return z.unaryExpr([](double x) { return softplus(x); });
}

RowMatrixXd sigmoidMat(const RowMatrixXd& z) {
  return z.unaryExpr([](double x) { return sigmoid(x); });
}

struct LayerRefs {
  Eigen::Map<const RowMatrixXd> weight;
  Eigen::Map<const RowMatrixXd> bias;
};

struct ForwardCache {
  RowMatrixXd augmented;                // input with time embedding appended
  std::vector<RowMatrixXd> preActs;     // per MLP layer
  std::vector<RowMatrixXd> activations; // per MLP layer
  std::vector<Eigen::Index> argmax;     // per pooled channel
  Eigen::VectorXd pooled;
  Eigen::VectorXd globalPre;
  Eigen::VectorXd global;
  RowMatrixXd concat;                   // [last activation | global]
  RowMatrixXd output;
};

const TensorSpec& findSpec(const ParameterSet& params, const std::string& name) {
  for (const auto& s : params.manifest)
    if (s.name == name) return s;
  throw ConfigError("parameter tensor not found: " + name);
}

ForwardCache runForward(const ParameterSet& params, const DenoiserConfig& cfg,
                        const RowMatrixXd& input, double t) {
  cfg.validate();
  if (input.cols() != cfg.inputWidth())
    throw ConfigError("denoiser input width mismatch");
  if (!input.allFinite()) throw NumericError("denoiser input contains non-finite values");

  const Eigen::Index n = input.rows();
  ForwardCache cache;

  const auto emb = timeEmbedding(t, cfg.timeBands);
  cache.augmented.resize(n, input.cols() + static_cast<Eigen::Index>(emb.size()));
  cache.augmented.leftCols(input.cols()) = input;
  for (Eigen::Index i = 0; i < n; ++i)
    for (std::size_t k = 0; k < emb.size(); ++k)
      cache.augmented(i, input.cols() + static_cast<Eigen::Index>(k)) = emb[k];

  const RowMatrixXd* prev = &cache.augmented;
  for (std::size_t layer = 0; layer < cfg.hiddenWidths.size(); ++layer) {
    const auto w = params.tensor(findSpec(params, "mlp" + std::to_string(layer) + ".weight"));
    const auto b = params.tensor(findSpec(params, "mlp" + std::to_string(layer) + ".bias"));
    RowMatrixXd z = *prev * w.transpose();
    z.rowwise() += b.col(0).transpose();
    cache.preActs.push_back(z);
    cache.activations.push_back(softplusMat(z));
    prev = &cache.activations.back();
  }

  const RowMatrixXd& last = cache.activations.back();
  const Eigen::Index hLast = last.cols();
  cache.pooled.resize(hLast);
  cache.argmax.resize(static_cast<std::size_t>(hLast));
  for (Eigen::Index k = 0; k < hLast; ++k) {
    Eigen::Index best = 0;
    double bestV = last(0, k);
    for (Eigen::Index i = 1; i < n; ++i) {
      if (last(i, k) > bestV) {  // strict: ties stay at the lowest index
        bestV = last(i, k);
        best = i;
      }
    }
    cache.pooled(k) = bestV;
    cache.argmax[static_cast<std::size_t>(k)] = best;
  }

  const auto wg = params.tensor(findSpec(params, "global.weight"));
  const auto bg = params.tensor(findSpec(params, "global.bias"));
  cache.globalPre = wg * cache.pooled + bg.col(0);
  cache.global = cache.globalPre.unaryExpr([](double x) { return softplus(x); });

  cache.concat.resize(n, hLast + cache.global.size());
  cache.concat.leftCols(hLast) = last;
  cache.concat.rightCols(cache.global.size()).rowwise() = cache.global.transpose();

  const auto wh = params.tensor(findSpec(params, "head.weight"));
  const auto bh = params.tensor(findSpec(params, "head.bias"));
  cache.output = cache.concat * wh.transpose();
  cache.output.rowwise() += bh.col(0).transpose();
  return cache;
}

}  // namespace

void DenoiserConfig::validate() const {
  if (pointChannels != 3) throw ConfigError("denoiser expects 3 point channels");
  if (projChannels < 0 || bodyChannels < 0) throw ConfigError("negative channel count");
  if (hiddenWidths.empty()) throw ConfigError("denoiser needs at least one hidden layer");
  for (int w : hiddenWidths)
    if (w < 1) throw ConfigError("hidden widths must be >= 1");
  if (globalWidth < 1) throw ConfigError("global feature width must be >= 1");
  if (timeBands < 1) throw ConfigError("time embedding needs at least one band");
}

std::vector<double> timeEmbedding(double t, int bands) {
  std::vector<double> emb(2 * static_cast<std::size_t>(bands));
  const double denom = bands > 1 ? bands - 1 : 1;
  for (int k = 0; k < bands; ++k) {
    const double omega = std::exp(-std::log(10000.0) * k / denom);
    emb[2 * k + 0] = std::sin(t * omega);
    emb[2 * k + 1] = std::cos(t * omega);
  }
  return emb;
}

ParameterSet ParameterSet::init(const DenoiserConfig& cfg) {
  cfg.validate();
  ParameterSet params;

  auto addTensor = [&params](const std::string& name, int rows, int cols) {
    params.manifest.push_back({name, rows, cols, params.values.size()});
    params.values.resize(params.values.size() + static_cast<std::size_t>(rows) * cols, 0.0);
  };

  int inW = cfg.inputWidth() + 2 * cfg.timeBands;
  for (std::size_t layer = 0; layer < cfg.hiddenWidths.size(); ++layer) {
    addTensor("mlp" + std::to_string(layer) + ".weight", cfg.hiddenWidths[layer], inW);
    addTensor("mlp" + std::to_string(layer) + ".bias", cfg.hiddenWidths[layer], 1);
    inW = cfg.hiddenWidths[layer];
  }
  addTensor("global.weight", cfg.globalWidth, cfg.hiddenWidths.back());
  addTensor("global.bias", cfg.globalWidth, 1);
  addTensor("head.weight", 3, cfg.hiddenWidths.back() + cfg.globalWidth);
  addTensor("head.bias", 3, 1);

  // Fan-in scaled uniform init; the output head stays at zero so an
  // untrained model predicts zero noise.
  std::mt19937_64 engine(cfg.initSeed);
  for (const auto& spec : params.manifest) {
    if (spec.name.rfind("head.", 0) == 0) continue;
    if (spec.cols == 1) continue;  // biases stay zero
    const double bound = 1.0 / std::sqrt(static_cast<double>(spec.cols));
    std::uniform_real_distribution<double> dist(-bound, bound);
    auto w = params.tensor(spec);
    for (int r = 0; r < spec.rows; ++r)
      for (int c = 0; c < spec.cols; ++c) w(r, c) = dist(engine);
  }
  return params;
}

RowMatrixXd denoiserForward(const ParameterSet& params, const DenoiserConfig& cfg,
                            const RowMatrixXd& perPointInput, double t) {
  return runForward(params, cfg, perPointInput, t).output;
}

DenoiserGradients denoiserBackward(const ParameterSet& params, const DenoiserConfig& cfg,
                                   const RowMatrixXd& perPointInput, double t,
                                   const RowMatrixXd& outputGradient) {
  const ForwardCache cache = runForward(params, cfg, perPointInput, t);
  if (outputGradient.rows() != cache.output.rows() ||
      outputGradient.cols() != cache.output.cols())
    throw ConfigError("output gradient shape mismatch");

  DenoiserGradients grads;
  grads.paramGrad.assign(params.values.size(), 0.0);
  ParameterSet gview;
  gview.values.swap(grads.paramGrad);
  gview.manifest = params.manifest;

  const Eigen::Index hLast = cache.activations.back().cols();

  const auto whSpec = findSpec(params, "head.weight");
  const auto bhSpec = findSpec(params, "head.bias");
  gview.tensor(whSpec) = outputGradient.transpose() * cache.concat;
  gview.tensor(bhSpec).col(0) = outputGradient.colwise().sum().transpose();

  const RowMatrixXd dConcat = outputGradient * params.tensor(whSpec);
  RowMatrixXd dLast = dConcat.leftCols(hLast);
  const Eigen::VectorXd dGlobal =
      dConcat.rightCols(cache.global.size()).colwise().sum().transpose();

  const Eigen::VectorXd dGlobalPre =
      dGlobal.cwiseProduct(cache.globalPre.unaryExpr([](double x) { return sigmoid(x); }));
  const auto wgSpec = findSpec(params, "global.weight");
  const auto bgSpec = findSpec(params, "global.bias");
  gview.tensor(wgSpec) = dGlobalPre * cache.pooled.transpose();
  gview.tensor(bgSpec).col(0) = dGlobalPre;

  const Eigen::VectorXd dPooled = params.tensor(wgSpec).transpose() * dGlobalPre;
  for (Eigen::Index k = 0; k < hLast; ++k)
    dLast(cache.argmax[static_cast<std::size_t>(k)], k) += dPooled(k);

  RowMatrixXd dAct = dLast;
  for (int layer = static_cast<int>(cfg.hiddenWidths.size()) - 1; layer >= 0; --layer) {
    const RowMatrixXd dz = dAct.cwiseProduct(sigmoidMat(cache.preActs[layer]));
    const auto wSpec = findSpec(params, "mlp" + std::to_string(layer) + ".weight");
    const auto bSpec = findSpec(params, "mlp" + std::to_string(layer) + ".bias");
    const RowMatrixXd& below =
        layer == 0 ? cache.augmented : cache.activations[static_cast<std::size_t>(layer - 1)];
    gview.tensor(wSpec) = dz.transpose() * below;
    gview.tensor(bSpec).col(0) = dz.colwise().sum().transpose();
    dAct = dz * params.tensor(wSpec);
  }

  grads.paramGrad.swap(gview.values);
  grads.inputGrad = dAct.leftCols(cfg.inputWidth());
  return grads;
}

}  // namespace mhcd
