#include "mhcd/body.hpp"

#include <cmath>
#include <unordered_map>

#include <Eigen/Geometry>

#include "mhcd/rng.hpp"

namespace mhcd {

namespace {

Mat3 axisAngleToMatrix(const Vec3& axisAngle) {
  const double angle = axisAngle.norm();
  if (angle < 1e-15) return Mat3::Identity();
  const Vec3 axis = axisAngle / angle;
  return Eigen::AngleAxisd(angle, axis).toRotationMatrix();
}

double segmentDistance(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (p - (a + t * ab)).norm();
}

// Real spherical harmonics, bands 0..2.
void shBasis(const Vec3& d, double* out) {
  const double x = d.x(), y = d.y(), z = d.z();
  out[0] = 0.282095;
  out[1] = 0.488603 * y;
  out[2] = 0.488603 * z;
  out[3] = 0.488603 * x;
  out[4] = 1.092548 * x * y;
  out[5] = 1.092548 * y * z;
  out[6] = 0.315392 * (3 * z * z - 1);
  out[7] = 1.092548 * x * z;
  out[8] = 0.546274 * (x * x - y * y);
}

constexpr double kMaxClothing = 0.06;

}  // namespace

std::vector<BoneSpec> humanoidSkeleton() {
  auto dir = [](double x, double y, double z) { return Vec3(x, y, z).normalized(); };
  return {
      {-1, {0, 0, 0}, dir(0, 1, 0), 0.42, 0.110},          // spine
      {0, {0, 0.02, 0}, dir(0, 1, 0), 0.20, 0.100},        // head
      {0, {-0.14, -0.03, 0}, dir(-0.9, -0.35, 0.1), 0.26, 0.050},  // l upper arm
      {2, {0, 0, 0}, dir(-0.9, -0.45, 0.05), 0.24, 0.042},         // l forearm
      {0, {0.14, -0.03, 0}, dir(0.9, -0.35, 0.1), 0.26, 0.050},    // r upper arm
      {4, {0, 0, 0}, dir(0.9, -0.45, 0.05), 0.24, 0.042},          // r forearm
      {-1, {-0.09, 0, 0}, dir(-0.06, -1, 0), 0.38, 0.072},         // l thigh
      {6, {0, 0, 0}, dir(0, -1, 0.06), 0.36, 0.055},               // l shin
      {-1, {0.09, 0, 0}, dir(0.06, -1, 0), 0.38, 0.072},           // r thigh
      {8, {0, 0, 0}, dir(0, -1, 0.06), 0.36, 0.055},               // r shin
  };
}

std::vector<Capsule> worldCapsules(const CapsuleBody& body) {
  const std::size_t n = body.bones.size();
  if (body.jointRotations.size() != n || body.lengthScales.size() != n)
    throw ConfigError("capsule body pose arrays do not match the skeleton");

  std::vector<Mat3> worldRot(n);
  std::vector<Vec3> start(n), end(n);
  std::vector<Capsule> capsules(n);
  for (std::size_t i = 0; i < n; ++i) {
    const BoneSpec& bone = body.bones[i];
    const Mat3 local = axisAngleToMatrix(body.jointRotations[i]);
    if (bone.parent < 0) {
      worldRot[i] = local;
      start[i] = bone.attachOffset;
    } else {
      const auto p = static_cast<std::size_t>(bone.parent);
      worldRot[i] = worldRot[p] * local;
      start[i] = end[p] + worldRot[p] * bone.attachOffset;
    }
    end[i] = start[i] + worldRot[i] * (bone.restDir * bone.length * body.lengthScales[i]);
    capsules[i] = {start[i], end[i], bone.radius};
  }
  return capsules;
}

double capsuleUnionSdf(const std::vector<Capsule>& capsules, const Vec3& p) {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& c : capsules) d = std::min(d, segmentDistance(p, c.a, c.b) - c.radius);
  return d;
}

double clothingDisplacement(const CapsuleBody& body, const Vec3& direction) {
  if (body.clothingCoeffs.empty()) return 0.0;
  double basis[9];
  shBasis(direction, basis);
  double v = 0;
  const std::size_t n = std::min<std::size_t>(9, body.clothingCoeffs.size());
  for (std::size_t i = 0; i < n; ++i) v += body.clothingCoeffs[i] * basis[i];
  return std::clamp(v, 0.0, kMaxClothing);
}

TriangleMesh extractIsoSurface(const std::function<double(const Vec3&)>& field,
                               const Vec3& boxMin, const Vec3& boxMax, int maxAxisCells) {
  if (maxAxisCells < 4) throw ConfigError("iso-surface grid is too coarse");
  const Vec3 extent = boxMax - boxMin;
  const double cell = extent.maxCoeff() / maxAxisCells;
  if (!(cell > 0)) throw DataError("degenerate iso-surface domain");

  int dims[3];
  for (int k = 0; k < 3; ++k)
    dims[k] = std::max(2, static_cast<int>(std::ceil(extent[k] / cell))) + 1;

  const auto nx = static_cast<std::size_t>(dims[0]);
  const auto ny = static_cast<std::size_t>(dims[1]);
  const auto nz = static_cast<std::size_t>(dims[2]);

  auto gridPoint = [&](int i, int j, int k) {
    return Vec3(boxMin.x() + i * cell, boxMin.y() + j * cell, boxMin.z() + k * cell);
  };
  auto gridId = [&](int i, int j, int k) {
    return static_cast<std::size_t>(i) + nx * (static_cast<std::size_t>(j) + ny * k);
  };

  // Sample once; nudge values off zero so no vertex lands on a grid point
  // and every tet edge has an unambiguous crossing.
  const double signEps = 1e-7 * cell;
  std::vector<double> samples(nx * ny * nz);
  for (int k = 0; k < dims[2]; ++k)
    for (int j = 0; j < dims[1]; ++j)
      for (int i = 0; i < dims[0]; ++i) {
        double s = field(gridPoint(i, j, k));
        if (std::abs(s) < signEps) s = s > 0 ? signEps : -signEps;
        samples[gridId(i, j, k)] = s;
      }

  // Kuhn subdivision: 6 tets per cube sharing the main diagonal; face
  // diagonals are translation-consistent, so neighbouring cubes agree.
  static const int kTets[6][4] = {{0, 1, 3, 7}, {0, 1, 5, 7}, {0, 2, 3, 7},
                                  {0, 2, 6, 7}, {0, 4, 5, 7}, {0, 4, 6, 7}};

  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;
  std::unordered_map<std::uint64_t, int> edgeVertex;

  auto vertexOnEdge = [&](std::size_t ga, std::size_t gb, const Vec3& pa, const Vec3& pb,
                          double sa, double sb) {
    std::size_t lo = ga, hi = gb;
    const Vec3* plo = &pa;
    const Vec3* phi = &pb;
    double slo = sa, shi = sb;
    if (lo > hi) {
      std::swap(lo, hi);
      std::swap(plo, phi);
      std::swap(slo, shi);
    }
    const std::uint64_t key = (static_cast<std::uint64_t>(lo) << 32) | hi;
    const auto it = edgeVertex.find(key);
    if (it != edgeVertex.end()) return it->second;
    const double t = slo / (slo - shi);
    const int id = static_cast<int>(vertices.size());
    vertices.push_back(*plo + t * (*phi - *plo));
    edgeVertex.emplace(key, id);
    return id;
  };

  for (int k = 0; k + 1 < dims[2]; ++k) {
    for (int j = 0; j + 1 < dims[1]; ++j) {
      for (int i = 0; i + 1 < dims[0]; ++i) {
        std::size_t cornerId[8];
        Vec3 cornerPos[8];
        double cornerVal[8];
        for (int c = 0; c < 8; ++c) {
          const int dx = c & 1, dy = (c >> 1) & 1, dz = (c >> 2) & 1;
          cornerId[c] = gridId(i + dx, j + dy, k + dz);
          cornerPos[c] = gridPoint(i + dx, j + dy, k + dz);
          cornerVal[c] = samples[cornerId[c]];
        }

        for (const auto& tet : kTets) {
          int inside[4], outside[4];
          int ni = 0, no = 0;
          for (int c = 0; c < 4; ++c) {
            if (cornerVal[tet[c]] < 0)
              inside[ni++] = tet[c];
            else
              outside[no++] = tet[c];
          }
          if (ni == 0 || ni == 4) continue;

          auto edge = [&](int a, int b) {
            return vertexOnEdge(cornerId[a], cornerId[b], cornerPos[a], cornerPos[b],
                                cornerVal[a], cornerVal[b]);
          };
          auto emit = [&](int a, int b, int c, const Vec3& insidePoint) {
            const Vec3 n =
                (vertices[b] - vertices[a]).cross(vertices[c] - vertices[a]);
            if (n.dot(insidePoint - vertices[a]) > 0)
              faces.push_back({a, c, b});
            else
              faces.push_back({a, b, c});
          };

          if (ni == 1) {
            emit(edge(inside[0], outside[0]), edge(inside[0], outside[1]),
                 edge(inside[0], outside[2]), cornerPos[inside[0]]);
          } else if (ni == 3) {
            emit(edge(outside[0], inside[0]), edge(outside[0], inside[1]),
                 edge(outside[0], inside[2]), cornerPos[inside[0]]);
          } else {
            const int va = edge(inside[0], outside[0]);
            const int vb = edge(inside[0], outside[1]);
            const int vc = edge(inside[1], outside[1]);
            const int vd = edge(inside[1], outside[0]);
            emit(va, vb, vc, cornerPos[inside[0]]);
            emit(va, vc, vd, cornerPos[inside[0]]);
          }
        }
      }
    }
  }

  if (faces.empty()) throw DataError("iso-surface extraction found no surface");
  return TriangleMesh::fromData(std::move(vertices), std::move(faces));
}

TriangleMesh extractBodyMesh(const CapsuleBody& body, bool withClothing) {
  const auto capsules = worldCapsules(body);

  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  double maxRadius = 0;
  for (const auto& c : capsules) {
    lo = lo.cwiseMin(c.a).cwiseMin(c.b);
    hi = hi.cwiseMax(c.a).cwiseMax(c.b);
    maxRadius = std::max(maxRadius, c.radius);
  }
  // Same padding with and without clothing, so both variants share the
  // extraction grid and a zero displacement yields an identical mesh.
  const double pad = maxRadius + kMaxClothing + 0.05;
  lo.array() -= pad;
  hi.array() += pad;

  const Vec3 center = 0.5 * (lo + hi);
  auto field = [&](const Vec3& p) {
    double d = capsuleUnionSdf(capsules, p);
    if (withClothing) {
      const Vec3 rel = p - center;
      const double len = rel.norm();
      if (len > 1e-12) d -= clothingDisplacement(body, rel / len);
    }
    return d;
  };

  TriangleMesh mesh = extractIsoSurface(field, lo, hi, body.gridRes);
  mesh.transform(body.frameScale, body.frameOffset);
  return mesh;
}

GeneratedBody generateBody(std::uint64_t seed, const BodyGenSettings& settings) {
  GeneratedBody out;
  CapsuleBody& body = out.params;
  body.gridRes = settings.gridRes;

  const std::size_t n = body.bones.size();
  body.jointRotations.assign(n, Vec3::Zero());
  body.lengthScales.assign(n, 1.0);

  Rng pose(childSeed(seed, "pose"));
  for (std::size_t i = 0; i < n; ++i) {
    Vec3 axis(pose.normal(), pose.normal(), pose.normal());
    const double len = axis.norm();
    axis = len > 1e-12 ? Vec3(axis / len) : Vec3(0, 0, 1);
    const double angle =
        std::clamp(pose.normal(0.0, settings.poseSigma), -settings.maxPoseAngle,
                   settings.maxPoseAngle);
    body.jointRotations[i] = axis * angle;
    body.lengthScales[i] = std::clamp(1.0 + pose.normal(0.0, 0.03), 0.85, 1.15);
  }

  Rng cloth(childSeed(seed, "clothing"));
  const double amplitude = cloth.uniform(settings.clothingMin, settings.clothingMax);
  body.clothingCoeffs.assign(9, 0.0);
  for (auto& c : body.clothingCoeffs) c = cloth.normal(0.0, amplitude);

  // Extract the scan in the raw frame, then fit it to the unit cube and
  // reuse the same transform for every mesh derived from this body.
  body.frameScale = 1.0;
  body.frameOffset = Vec3::Zero();
  TriangleMesh rawScan = extractBodyMesh(body, /*withClothing=*/true);
  Vec3 lo, hi;
  rawScan.boundingBox(lo, hi);
  const double extent = (hi - lo).maxCoeff();
  body.frameScale = 0.98 / extent;
  body.frameOffset = -0.5 * (lo + hi) * body.frameScale;

  rawScan.transform(body.frameScale, body.frameOffset);
  out.scanMesh = std::move(rawScan);
  out.bodyMesh = extractBodyMesh(body, /*withClothing=*/false);
  out.camera = makeBodyCamera(0, 1, settings);
  return out;
}

Camera makeBodyCamera(int viewIndex, int viewCount, const BodyGenSettings& settings) {
  const double azimuth = 2.0 * 3.14159265358979323846 * viewIndex / std::max(1, viewCount);
  const Vec3 eye(settings.cameraDistance * std::sin(azimuth), 0.05,
                 settings.cameraDistance * std::cos(azimuth));
  return Camera::lookAt(eye, Vec3::Zero(), settings.focal, settings.imageSize,
                        settings.imageSize);
}

namespace {

CapsuleBody perturbBody(const CapsuleBody& gtBody, const HypothesisSampler& sampler,
                        std::uint64_t seed) {
  if (sampler.kappa <= 0) throw ConfigError("hypothesis sampler needs kappa > 0");
  CapsuleBody hyp = gtBody;
  hyp.clothingCoeffs.assign(hyp.clothingCoeffs.size(), 0.0);

  // Small-angle emulation of a concentration-kappa rotation distribution;
  // below 1e-4 rad the perturbation snaps to zero so the kappa->inf limit
  // reproduces the ground-truth body bit-exactly.
  double sigmaRot = 1.0 / std::sqrt(sampler.kappa);
  if (sigmaRot < 1e-4) sigmaRot = 0.0;

  Rng rng(seed);
  for (std::size_t i = 0; i < hyp.bones.size(); ++i) {
    if (sigmaRot > 0) {
      Vec3 axis(rng.normal(), rng.normal(), rng.normal());
      const double len = axis.norm();
      axis = len > 1e-12 ? Vec3(axis / len) : Vec3(0, 0, 1);
      const Mat3 noise = axisAngleToMatrix(axis * rng.normal(0.0, sigmaRot));
      const Mat3 combined = noise * axisAngleToMatrix(hyp.jointRotations[i]);
      const Eigen::AngleAxisd aa(combined);
      hyp.jointRotations[i] = aa.axis() * aa.angle();
    }
    if (sampler.lengthSigma > 0)
      hyp.lengthScales[i] =
          std::max(0.5, hyp.lengthScales[i] * (1.0 + rng.normal(0.0, sampler.lengthSigma)));
  }
  return hyp;
}

}  // namespace

std::shared_ptr<const BodySurface> sampleHypothesis(const CapsuleBody& gtBody,
                                                    const HypothesisSampler& sampler,
                                                    std::uint64_t seed) {
  const CapsuleBody hyp = perturbBody(gtBody, sampler, seed);
  return std::make_shared<BodySurface>(extractBodyMesh(hyp, /*withClothing=*/false));
}

HypothesisSet sampleHypotheses(const CapsuleBody& gtBody, const HypothesisSampler& sampler,
                               int count, std::uint64_t seed) {
  if (count < 1) throw ConfigError("hypothesis count must be >= 1");
  HypothesisSet hyps;
  hyps.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    hyps.push_back(sampleHypothesis(gtBody, sampler,
                                    childSeed(seed, "hyp", static_cast<std::uint64_t>(i))));
  return hyps;
}

}  // namespace mhcd
