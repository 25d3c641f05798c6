#include "mhcd/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace mhcd {

namespace {

constexpr double kDegenerateDoubleArea = 1e-16;
constexpr double kBaryEps = 1e-12;

std::uint64_t fnv1aBytes(std::uint64_t h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

TriangleMesh TriangleMesh::fromData(std::vector<Vec3> vertices,
                                    std::vector<std::array<int, 3>> faces) {
  if (vertices.empty()) throw DataError("mesh has no vertices");
  if (faces.empty()) throw DataError("mesh has no faces");

  const int nv = static_cast<int>(vertices.size());
  for (const auto& f : faces) {
    for (int idx : f) {
      if (idx < 0 || idx >= nv) throw DataError("face index out of range");
    }
    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2])
      throw DataError("degenerate face: repeated vertex index");
  }
  for (const auto& f : faces) {
    const Vec3 n = (vertices[f[1]] - vertices[f[0]]).cross(vertices[f[2]] - vertices[f[0]]);
    if (n.norm() <= kDegenerateDoubleArea)
      throw DataError("degenerate face: zero area");
  }

  // Drop unreferenced vertices so every stored vertex has a pseudo-normal.
  std::vector<int> remap(vertices.size(), -1);
  std::vector<Vec3> usedVerts;
  usedVerts.reserve(vertices.size());
  for (auto& f : faces) {
    for (int& idx : f) {
      if (remap[idx] < 0) {
        remap[idx] = static_cast<int>(usedVerts.size());
        usedVerts.push_back(vertices[idx]);
      }
      idx = remap[idx];
    }
  }

  TriangleMesh mesh;
  mesh.vertices_ = std::move(usedVerts);
  mesh.faces_ = std::move(faces);
  mesh.computeDerived();
  return mesh;
}

void TriangleMesh::computeDerived() {
  const std::size_t nf = faces_.size();
  faceNormals_.assign(nf, Vec3::Zero());
  vertexNormals_.assign(vertices_.size(), Vec3::Zero());
  faceEdges_.assign(nf, {-1, -1, -1});

  for (std::size_t f = 0; f < nf; ++f) {
    const Vec3& a = vertices_[faces_[f][0]];
    const Vec3& b = vertices_[faces_[f][1]];
    const Vec3& c = vertices_[faces_[f][2]];
    faceNormals_[f] = (b - a).cross(c - a).normalized();
  }

  // Undirected edge table; tracks directed usage for the watertight test.
  auto edgeKey = [](int a, int b) {
    const std::uint64_t lo = static_cast<std::uint32_t>(std::min(a, b));
    const std::uint64_t hi = static_cast<std::uint32_t>(std::max(a, b));
    return (hi << 32) | lo;
  };
  struct EdgeInfo {
    int id = -1;
    int forward = 0;   // traversed as (min,max)
    int backward = 0;  // traversed as (max,min)
    Vec3 normalSum = Vec3::Zero();
  };
  std::unordered_map<std::uint64_t, EdgeInfo> edges;
  edges.reserve(nf * 3 / 2);
  int nextEdgeId = 0;

  for (std::size_t f = 0; f < nf; ++f) {
    for (int k = 0; k < 3; ++k) {
      const int va = faces_[f][k];
      const int vb = faces_[f][(k + 1) % 3];
      auto& info = edges[edgeKey(va, vb)];
      if (info.id < 0) info.id = nextEdgeId++;
      if (va < vb)
        ++info.forward;
      else
        ++info.backward;
      info.normalSum += faceNormals_[f];
      faceEdges_[f][k] = info.id;
    }
  }

  watertight_ = true;
  for (const auto& [key, info] : edges) {
    (void)key;
    if (info.forward != 1 || info.backward != 1) {
      watertight_ = false;
      break;
    }
  }

  edgeNormals_.assign(static_cast<std::size_t>(nextEdgeId), Vec3::Zero());
  for (const auto& [key, info] : edges) {
    (void)key;
    const double n = info.normalSum.norm();
    edgeNormals_[info.id] = n > 0 ? Vec3(info.normalSum / n) : Vec3(0, 0, 1);
  }

  // Angle-weighted vertex pseudo-normals.
  for (std::size_t f = 0; f < nf; ++f) {
    for (int k = 0; k < 3; ++k) {
      const Vec3& p = vertices_[faces_[f][k]];
      const Vec3& q = vertices_[faces_[f][(k + 1) % 3]];
      const Vec3& r = vertices_[faces_[f][(k + 2) % 3]];
      const Vec3 e1 = (q - p).normalized();
      const Vec3 e2 = (r - p).normalized();
      const double angle = std::acos(std::clamp(e1.dot(e2), -1.0, 1.0));
      vertexNormals_[faces_[f][k]] += angle * faceNormals_[f];
    }
  }
  for (auto& n : vertexNormals_) {
    const double len = n.norm();
    n = len > 0 ? Vec3(n / len) : Vec3(0, 0, 1);
  }

  contentHash_ = 0xcbf29ce484222325ULL;
  contentHash_ = fnv1aBytes(contentHash_, vertices_.data(), vertices_.size() * sizeof(Vec3));
  contentHash_ = fnv1aBytes(contentHash_, faces_.data(), faces_.size() * sizeof(faces_[0]));
}

void TriangleMesh::boundingBox(Vec3& lo, Vec3& hi) const {
  lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  hi = -lo;
  for (const auto& v : vertices_) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
}

void TriangleMesh::transform(double scale, const Vec3& offset) {
  for (auto& v : vertices_) v = v * scale + offset;
  computeDerived();  // normals unchanged by uniform scale+translate, hash is not
}

TriangleClosest closestPointOnTriangle(const Vec3& query, const Vec3& a, const Vec3& b,
                                       const Vec3& c) {
  // Ericson, Real-Time Collision Detection, 5.1.5.
  const Vec3 ab = b - a, ac = c - a, ap = query - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0 && d2 <= 0) return {a, 1};

  const Vec3 bp = query - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0 && d4 <= d3) return {b, 2};

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) {
    const double v = d1 / (d1 - d3);
    return {a + v * ab, 4};
  }

  const Vec3 cp = query - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0 && d5 <= d6) return {c, 3};

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) {
    const double w = d2 / (d2 - d6);
    return {a + w * ac, 6};
  }

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return {b + w * (c - b), 5};
  }

  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom;
  const double w = vc * denom;
  const Vec3 point = a + v * ab + w * ac;

  // Reclassify by barycentrics: interior points numerically on an edge or
  // vertex must use that feature's pseudo-normal for the sign test.
  const double u = 1.0 - v - w;
  const int zeros = (u <= kBaryEps) + (v <= kBaryEps) + (w <= kBaryEps);
  if (zeros == 0) return {point, 0};
  if (zeros == 2) {
    if (u > kBaryEps) return {point, 1};
    if (v > kBaryEps) return {point, 2};
    return {point, 3};
  }
  // One barycentric is zero: on the opposite edge.
  if (u <= kBaryEps) return {point, 5};  // edge bc
  if (v <= kBaryEps) return {point, 6};  // edge ca
  return {point, 4};                     // edge ab
}

}  // namespace mhcd
