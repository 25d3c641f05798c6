#include "mhcd/conditioning.hpp"

#include <algorithm>
#include <cmath>

namespace mhcd {

namespace {

constexpr double kPi = 3.14159265358979323846;

int scalarWidth(const EncodingConfig& cfg, const ConditioningOptions& opts) {
  return opts.useEncoding ? 2 * cfg.bands : 1;
}

// Writes one scalar's feature slice (encoded or raw).
void encodeScalar(double x, const EncodingConfig& cfg, const ConditioningOptions& opts,
                  double* out) {
  if (!opts.useEncoding) {
    out[0] = x;
    return;
  }
  positionalEncode(x, cfg, out);
}

struct PointBodyQuery {
  int occupancy;
  double signedDist;  // under opts.sign convention
  Vec3 normal;
};

PointBodyQuery queryBody(const BodySurface& body, const Vec3& p,
                         const ConditioningOptions& opts) {
  const SurfaceQueryResult r = closestSurfacePoint(body.bvh, body.mesh, p);
  PointBodyQuery q;
  q.occupancy = (r.sign < 0 && r.unsignedDistance >= 1e-12) ? 1 : 0;
  const double insideNegative = r.sign * r.unsignedDistance;
  q.signedDist =
      opts.sign == SignConvention::InsideNegative ? insideNegative : -insideNegative;
  q.normal = r.normal;
  return q;
}

void writeDistanceAndNormal(const PointBodyQuery& q, const EncodingConfig& cfg,
                            const ConditioningOptions& opts, double* row, int off) {
  if (opts.useSignedDistance) {
    const double d = cfg.clampDistance ? std::clamp(q.signedDist, -1.0, 1.0) : q.signedDist;
    encodeScalar(d, cfg, opts, row + off);
    off += scalarWidth(cfg, opts);
  }
  if (opts.useNormal) {
    row[off + 0] = q.normal.x();
    row[off + 1] = q.normal.y();
    row[off + 2] = q.normal.z();
  }
}

}  // namespace

int bodyFeatureWidth(const EncodingConfig& cfg, const ConditioningOptions& opts) {
  const int sw = scalarWidth(cfg, opts);
  return sw * (opts.useOccupancy ? 1 : 0) + sw * (opts.useSignedDistance ? 1 : 0) +
         (opts.useNormal ? 3 : 0);
}

void positionalEncode(double x, const EncodingConfig& cfg, double* out) {
  if (cfg.bands < 1) throw ConfigError("positional encoding needs at least one band");
  double freq = kPi;
  for (int k = 0; k < cfg.bands; ++k) {
    out[2 * k + 0] = std::sin(freq * x);
    out[2 * k + 1] = std::cos(freq * x);
    freq *= cfg.base;
  }
}

std::vector<double> positionalEncode(double x, const EncodingConfig& cfg) {
  std::vector<double> out(2 * static_cast<std::size_t>(cfg.bands));
  positionalEncode(x, cfg, out.data());
  return out;
}

RowMatrixXd singleMeshFeature(const PointCloud& points, const BodySurface& body,
                                  const EncodingConfig& cfg, const ConditioningOptions& opts) {
  if (!body.mesh.watertight())
    throw DataError("conditioning body mesh must be watertight");
  const int width = bodyFeatureWidth(cfg, opts);
  const int sw = scalarWidth(cfg, opts);
  RowMatrixXd out(points.rows(), width);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const Vec3 p = points.row(i).transpose();
    const PointBodyQuery q = queryBody(body, p, opts);
    double* row = out.row(i).data();
    int off = 0;
    if (opts.useOccupancy) {
      encodeScalar(static_cast<double>(q.occupancy), cfg, opts, row + off);
      off += sw;
    }
    writeDistanceAndNormal(q, cfg, opts, row, off);
  }
  return out;
}

RowMatrixXd multiHypothesisFeature(const PointCloud& points, const HypothesisSet& hyps,
                                       const EncodingConfig& cfg,
                                       const ConditioningOptions& opts) {
  if (hyps.empty()) throw DataError("empty hypothesis set");
  for (const auto& h : hyps) {
    if (!h || !h->mesh.watertight())
      throw DataError("hypothesis meshes must be watertight");
  }

  const int width = bodyFeatureWidth(cfg, opts);
  const int sw = scalarWidth(cfg, opts);
  const int s = static_cast<int>(hyps.size());
  RowMatrixXd out(points.rows(), width);

  // Occupancy is binary, so the encoded mean only depends on how many
  // hypotheses contain the point. Using counts keeps the result bit-exact
  // under any permutation of the hypothesis list.
  std::vector<double> enc0(static_cast<std::size_t>(sw)), enc1(enc0);
  if (opts.useOccupancy) {
    encodeScalar(0.0, cfg, opts, enc0.data());
    encodeScalar(1.0, cfg, opts, enc1.data());
  }

  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const Vec3 p = points.row(i).transpose();

    int insideCount = 0;
    int selected = -1;
    double selKey = 0, selRaw = 0;
    std::uint64_t selHash = 0;
    PointBodyQuery selQuery{};

    for (int h = 0; h < s; ++h) {
      const PointBodyQuery q = queryBody(*hyps[h], p, opts);
      insideCount += q.occupancy;
      const double key = opts.selectByAbsDistance ? std::abs(q.signedDist) : q.signedDist;
      const std::uint64_t hash = hyps[h]->mesh.contentHash();
      const bool better =
          selected < 0 || key < selKey ||
          (key == selKey &&
           (q.signedDist < selRaw || (q.signedDist == selRaw && hash < selHash)));
      if (better) {
        selected = h;
        selKey = key;
        selRaw = q.signedDist;
        selHash = hash;
        selQuery = q;
      }
    }

    double* row = out.row(i).data();
    int off = 0;
    if (opts.useOccupancy) {
      if (insideCount == s) {
        std::copy(enc1.begin(), enc1.end(), row);
      } else if (insideCount == 0) {
        std::copy(enc0.begin(), enc0.end(), row);
      } else {
        for (int k = 0; k < sw; ++k)
          row[k] = (insideCount * enc1[k] + (s - insideCount) * enc0[k]) / s;
      }
      off += sw;
    }
    writeDistanceAndNormal(selQuery, cfg, opts, row, off);
  }
  return out;
}

}  // namespace mhcd
