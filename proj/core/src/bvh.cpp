#include "mhcd/bvh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mhcd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kBoundaryEps = 1e-12;

double boxDistanceSq(const Vec3& p, const Vec3& lo, const Vec3& hi) {
  double d2 = 0;
  for (int k = 0; k < 3; ++k) {
    const double d = std::max({lo[k] - p[k], 0.0, p[k] - hi[k]});
    d2 += d * d;
  }
  return d2;
}

}  // namespace

MeshBvh::MeshBvh(const TriangleMesh& mesh, int leafSize) : leafSize_(std::max(1, leafSize)) {
  const std::size_t nf = mesh.faceCount();
  if (nf == 0) throw DataError("cannot build BVH over an empty mesh");

  std::vector<Vec3> centroids(nf);
  std::vector<Vec3> faceMin(nf), faceMax(nf);
  for (std::size_t f = 0; f < nf; ++f) {
    const Vec3& a = mesh.vertices()[mesh.faces()[f][0]];
    const Vec3& b = mesh.vertices()[mesh.faces()[f][1]];
    const Vec3& c = mesh.vertices()[mesh.faces()[f][2]];
    faceMin[f] = a.cwiseMin(b).cwiseMin(c);
    faceMax[f] = a.cwiseMax(b).cwiseMax(c);
    centroids[f] = (a + b + c) / 3.0;
  }

  faceOrder_.resize(nf);
  std::iota(faceOrder_.begin(), faceOrder_.end(), 0);
  nodes_.reserve(2 * nf / static_cast<std::size_t>(leafSize_) + 2);

  // Recursive median split on the widest axis of the centroid bounds.
  auto build = [&](auto&& self, int begin, int end) -> int {
    const int nodeIndex = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    Vec3 lo = Vec3::Constant(kInf), hi = -lo;
    Vec3 clo = lo, chi = hi;
    for (int i = begin; i < end; ++i) {
      const int f = faceOrder_[i];
      lo = lo.cwiseMin(faceMin[f]);
      hi = hi.cwiseMax(faceMax[f]);
      clo = clo.cwiseMin(centroids[f]);
      chi = chi.cwiseMax(centroids[f]);
    }
    nodes_[nodeIndex].boxMin = lo;
    nodes_[nodeIndex].boxMax = hi;

    const int count = end - begin;
    const Vec3 extent = chi - clo;
    int axis = 0;
    extent.maxCoeff(&axis);
    if (count <= leafSize_ || extent[axis] <= 0) {
      nodes_[nodeIndex].faceBegin = begin;
      nodes_[nodeIndex].faceCount = count;
      return nodeIndex;
    }

    const int mid = begin + count / 2;
    std::nth_element(faceOrder_.begin() + begin, faceOrder_.begin() + mid,
                     faceOrder_.begin() + end, [&](int a, int b) {
                       if (centroids[a][axis] != centroids[b][axis])
                         return centroids[a][axis] < centroids[b][axis];
                       return a < b;  // deterministic layout
                     });
    self(self, begin, mid);
    nodes_[nodeIndex].rightChild = self(self, mid, end);
    return nodeIndex;
  };
  build(build, 0, static_cast<int>(nf));
}

SurfaceQueryResult closestSurfacePoint(const MeshBvh& bvh, const TriangleMesh& mesh,
                                       const Vec3& query) {
  double bestD2 = kInf;
  int bestFace = -1;
  TriangleClosest best{Vec3::Zero(), 0};

  // Children visited nearer-box-first. Pruning keeps a one-ulp slack so
  // rounding in the box distance cannot drop a node that holds an
  // exactly-equidistant lower-index face (ties break to that face).
  int stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const int ni = stack[--top];
    const auto& node = bvh.nodes_[ni];
    if (boxDistanceSq(query, node.boxMin, node.boxMax) > bestD2 * (1.0 + 4e-16)) continue;
    if (node.faceCount > 0) {
      for (int i = node.faceBegin; i < node.faceBegin + node.faceCount; ++i) {
        const int f = bvh.faceOrder_[i];
        const auto& tri = mesh.faces()[f];
        const TriangleClosest cand = closestPointOnTriangle(query, mesh.vertices()[tri[0]],
                                                            mesh.vertices()[tri[1]],
                                                            mesh.vertices()[tri[2]]);
        const double d2 = (query - cand.point).squaredNorm();
        if (d2 < bestD2 || (d2 == bestD2 && f < bestFace)) {
          bestD2 = d2;
          bestFace = f;
          best = cand;
        }
      }
    } else {
      const int left = ni + 1;
      const int right = node.rightChild;
      const double dl = boxDistanceSq(query, bvh.nodes_[left].boxMin, bvh.nodes_[left].boxMax);
      const double dr =
          boxDistanceSq(query, bvh.nodes_[right].boxMin, bvh.nodes_[right].boxMax);
      // Push the farther child first.
      if (dl <= dr) {
        stack[top++] = right;
        stack[top++] = left;
      } else {
        stack[top++] = left;
        stack[top++] = right;
      }
    }
  }

  const auto& tri = mesh.faces()[bestFace];
  Vec3 normal;
  switch (best.region) {
    case 0: normal = mesh.faceNormals()[bestFace]; break;
    case 1: normal = mesh.vertexNormals()[tri[0]]; break;
    case 2: normal = mesh.vertexNormals()[tri[1]]; break;
    case 3: normal = mesh.vertexNormals()[tri[2]]; break;
    case 4: normal = mesh.edgeNormals()[mesh.faceEdge(bestFace, 0)]; break;
    case 5: normal = mesh.edgeNormals()[mesh.faceEdge(bestFace, 1)]; break;
    default: normal = mesh.edgeNormals()[mesh.faceEdge(bestFace, 2)]; break;
  }

  SurfaceQueryResult result;
  result.closestPoint = best.point;
  result.unsignedDistance = (query - best.point).norm();
  result.sign = normal.dot(query - best.point) >= 0 ? 1 : -1;
  result.normal = normal;
  result.faceIndex = bestFace;
  return result;
}

double signedDistance(const MeshBvh& bvh, const TriangleMesh& mesh, const Vec3& query,
                      SignConvention convention) {
  if (!mesh.watertight())
    throw DataError("signed distance undefined for non-watertight mesh");
  const SurfaceQueryResult r = closestSurfacePoint(bvh, mesh, query);
  const double insideNegative = r.sign * r.unsignedDistance;
  return convention == SignConvention::InsideNegative ? insideNegative : -insideNegative;
}

int occupancy(const MeshBvh& bvh, const TriangleMesh& mesh, const Vec3& query) {
  if (!mesh.watertight()) throw DataError("occupancy undefined for non-watertight mesh");
  const SurfaceQueryResult r = closestSurfacePoint(bvh, mesh, query);
  return (r.sign < 0 && r.unsignedDistance >= kBoundaryEps) ? 1 : 0;
}

namespace {

bool rayBoxHit(const Vec3& o, const Vec3& invDir, const Vec3& lo, const Vec3& hi,
               double tMax) {
  double t0 = 0, t1 = tMax;
  for (int k = 0; k < 3; ++k) {
    const double ta = (lo[k] - o[k]) * invDir[k];
    const double tb = (hi[k] - o[k]) * invDir[k];
    t0 = std::max(t0, std::min(ta, tb));
    t1 = std::min(t1, std::max(ta, tb));
  }
  return t0 <= t1;
}

// Moeller-Trumbore.
std::optional<double> rayTriangle(const Vec3& o, const Vec3& d, const Vec3& a, const Vec3& b,
                                  const Vec3& c) {
  const Vec3 e1 = b - a, e2 = c - a;
  const Vec3 p = d.cross(e2);
  const double det = e1.dot(p);
  if (std::abs(det) < 1e-14) return std::nullopt;
  const double inv = 1.0 / det;
  const Vec3 t = o - a;
  const double u = t.dot(p) * inv;
  if (u < 0 || u > 1) return std::nullopt;
  const Vec3 q = t.cross(e1);
  const double v = d.dot(q) * inv;
  if (v < 0 || u + v > 1) return std::nullopt;
  const double hit = e2.dot(q) * inv;
  if (hit < 0) return std::nullopt;
  return hit;
}

}  // namespace

std::optional<std::pair<double, int>> rayIntersect(const MeshBvh& bvh,
                                                   const TriangleMesh& mesh,
                                                   const Vec3& origin, const Vec3& dir) {
  Vec3 invDir;
  for (int k = 0; k < 3; ++k)
    invDir[k] = dir[k] != 0 ? 1.0 / dir[k] : std::copysign(kInf, 1.0);

  double bestT = kInf;
  int bestFace = -1;
  int stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const int ni = stack[--top];
    const auto& node = bvh.nodes_[ni];
    if (!rayBoxHit(origin, invDir, node.boxMin, node.boxMax, bestT)) continue;
    if (node.faceCount > 0) {
      for (int i = node.faceBegin; i < node.faceBegin + node.faceCount; ++i) {
        const int f = bvh.faceOrder_[i];
        const auto& tri = mesh.faces()[f];
        const auto t = rayTriangle(origin, dir, mesh.vertices()[tri[0]],
                                   mesh.vertices()[tri[1]], mesh.vertices()[tri[2]]);
        if (t && (*t < bestT || (*t == bestT && f < bestFace))) {
          bestT = *t;
          bestFace = f;
        }
      }
    } else {
      stack[top++] = node.rightChild;
      stack[top++] = ni + 1;
    }
  }
  if (bestFace < 0) return std::nullopt;
  return std::make_pair(bestT, bestFace);
}

}  // namespace mhcd
