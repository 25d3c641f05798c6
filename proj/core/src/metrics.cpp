#include "mhcd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "mhcd/rng.hpp"

namespace mhcd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Uniform grid for exact nearest-neighbour queries: every cell whose box
// could beat the current best is visited, so the result equals brute force.
class PointGrid {
public:
  explicit PointGrid(const PointCloud& points) : points_(points) {
    lo_ = points.colwise().minCoeff().transpose();
    const Vec3 hi = points.colwise().maxCoeff().transpose();
    const double extent = std::max((hi - lo_).maxCoeff(), 1e-12);
    const int target = std::max(
        1, static_cast<int>(std::cbrt(static_cast<double>(points.rows()))));
    cell_ = extent / target;
    for (int k = 0; k < 3; ++k)
      dims_[k] = std::min<Eigen::Index>(
          128, std::max<Eigen::Index>(
                   1, static_cast<Eigen::Index>((hi[k] - lo_[k]) / cell_) + 1));
    cells_.resize(static_cast<std::size_t>(dims_[0] * dims_[1] * dims_[2]));
    for (Eigen::Index i = 0; i < points.rows(); ++i)
      cells_[cellIndex(points.row(i).transpose())].push_back(static_cast<int>(i));
  }

  double nearestDistance(const Vec3& q) const {
    Eigen::Index ci[3];
    cellCoords(q, ci);
    double best = kInf;
    const Eigen::Index maxDim = std::max({dims_[0], dims_[1], dims_[2]});
    for (Eigen::Index ring = 0;; ++ring) {
      if (ring > 0 && best < kInf && (ring - 1) * cell_ > best) break;
      if (ring > maxDim) break;
      bool anyCell = false;
      for (Eigen::Index dz = -ring; dz <= ring; ++dz) {
        for (Eigen::Index dy = -ring; dy <= ring; ++dy) {
          for (Eigen::Index dx = -ring; dx <= ring; ++dx) {
            if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != ring) continue;
            const Eigen::Index x = ci[0] + dx, y = ci[1] + dy, z = ci[2] + dz;
            if (x < 0 || x >= dims_[0] || y < 0 || y >= dims_[1] || z < 0 || z >= dims_[2])
              continue;
            anyCell = true;
            for (int idx : cells_[static_cast<std::size_t>((z * dims_[1] + y) * dims_[0] + x)]) {
              const double d = (q - points_.row(idx).transpose()).norm();
              best = std::min(best, d);
            }
          }
        }
      }
      if (!anyCell && ring > maxDim) break;
    }
    return best;
  }

private:
  const PointCloud& points_;
  Vec3 lo_;
  double cell_ = 1;
  Eigen::Index dims_[3] = {1, 1, 1};
  std::vector<std::vector<int>> cells_;

  void cellCoords(const Vec3& p, Eigen::Index* out) const {
    for (int k = 0; k < 3; ++k)
      out[k] = std::clamp<Eigen::Index>(
          static_cast<Eigen::Index>((p[k] - lo_[k]) / cell_), 0, dims_[k] - 1);
  }
  std::size_t cellIndex(const Vec3& p) const {
    Eigen::Index c[3];
    cellCoords(p, c);
    return static_cast<std::size_t>((c[2] * dims_[1] + c[1]) * dims_[0] + c[0]);
  }
};

double directedMean(const PointCloud& from, const PointGrid& toGrid) {
  double sum = 0;
  for (Eigen::Index i = 0; i < from.rows(); ++i)
    sum += toGrid.nearestDistance(from.row(i).transpose());
  return sum / static_cast<double>(from.rows());
}

}  // namespace

double chamferDistance(const PointCloud& predicted, const PointCloud& reference) {
  if (predicted.rows() == 0 || reference.rows() == 0)
    throw DataError("chamfer distance needs non-empty clouds");
  const PointGrid predGrid(predicted);
  const PointGrid refGrid(reference);
  return 0.5 * (directedMean(predicted, refGrid) + directedMean(reference, predGrid));
}

double pointToSurface(const PointCloud& predicted, const BodySurface& reference) {
  if (predicted.rows() == 0) throw DataError("point-to-surface needs a non-empty cloud");
  double sum = 0;
  for (Eigen::Index i = 0; i < predicted.rows(); ++i)
    sum += closestSurfacePoint(reference.bvh, reference.mesh, predicted.row(i).transpose())
               .unsignedDistance;
  return sum / static_cast<double>(predicted.rows());
}

PointCloud uniformSurfaceSample(const TriangleMesh& mesh, int count, std::uint64_t seed) {
  if (count < 1) throw ConfigError("surface sample count must be >= 1");
  std::vector<double> cumulative(mesh.faceCount());
  double total = 0;
  for (std::size_t f = 0; f < mesh.faceCount(); ++f) {
    const auto& tri = mesh.faces()[f];
    const Vec3& a = mesh.vertices()[tri[0]];
    total += 0.5 * (mesh.vertices()[tri[1]] - a).cross(mesh.vertices()[tri[2]] - a).norm();
    cumulative[f] = total;
  }
  if (!(total > 0)) throw DataError("mesh has degenerate total area");

  Rng rng(seed);
  PointCloud out(count, 3);
  for (int i = 0; i < count; ++i) {
    const double r = rng.uniform(0.0, total);
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
    const std::size_t f = std::min<std::size_t>(
        static_cast<std::size_t>(it - cumulative.begin()), mesh.faceCount() - 1);
    double u = rng.uniform();
    double v = rng.uniform();
    if (u + v > 1) {
      u = 1 - u;
      v = 1 - v;
    }
    const auto& tri = mesh.faces()[f];
    const Vec3& a = mesh.vertices()[tri[0]];
    const Vec3& b = mesh.vertices()[tri[1]];
    const Vec3& c = mesh.vertices()[tri[2]];
    out.row(i) = (a + u * (b - a) + v * (c - a)).transpose();
  }
  return out;
}

double EvalReport::meanChamferCm() const {
  double sum = 0;
  for (const auto& s : samples) sum += s.chamferCm;
  return samples.empty() ? 0 : sum / static_cast<double>(samples.size());
}

double EvalReport::meanP2sCm() const {
  double sum = 0;
  for (const auto& s : samples) sum += s.p2sCm;
  return samples.empty() ? 0 : sum / static_cast<double>(samples.size());
}

void EvalReport::seedStatistics(double& meanOut, double& stderrOut) const {
  std::map<std::uint64_t, std::pair<double, int>> bySeed;
  for (const auto& s : samples) {
    auto& acc = bySeed[s.seed];
    acc.first += s.chamferCm;
    ++acc.second;
  }
  std::vector<double> means;
  for (const auto& [seed, acc] : bySeed) {
    (void)seed;
    means.push_back(acc.first / acc.second);
  }
  double mean = 0;
  for (double m : means) mean += m;
  mean /= means.empty() ? 1 : static_cast<double>(means.size());
  double var = 0;
  for (double m : means) var += (m - mean) * (m - mean);
  meanOut = mean;
  stderrOut = means.size() > 1
                  ? std::sqrt(var / (static_cast<double>(means.size()) - 1.0) /
                              static_cast<double>(means.size()))
                  : 0.0;
}

void writeReportCsv(const std::string& path, const EvalReport& report) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write report: " + path);
  // Chamfer convention: halved sum of both directed mean NN distances.
  out << "# chamfer = 0.5*(mean_pred_to_ref + mean_ref_to_pred), cm\n";
  out << "id,seed,occlusion_ratio,hypothesis_count,chamfer_cm,p2s_cm\n";
  out.precision(9);
  for (const auto& s : report.samples)
    out << s.id << "," << s.seed << "," << s.occlusionRatio << "," << s.hypothesisCount
        << "," << s.chamferCm << "," << s.p2sCm << "\n";
}

}  // namespace mhcd
