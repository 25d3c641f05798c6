#pragma once

// Test-only oracles, deliberately independent of the accelerated
// implementations they check: exhaustive triangle scans, ray-parity and
// winding-number inside tests, direct bilinear arithmetic and reference
// shape constructors.

#include <cmath>
#include <map>
#include <random>
#include <vector>

#include "mhcd/mesh.hpp"
#include "mhcd/types.hpp"

namespace oracles {

using mhcd::TriangleMesh;
using mhcd::Vec3;

// Closest point on one triangle by brute parameter search is too slow, so
// the oracle reuses the public single-triangle routine but scans every
// face; only the tree traversal is under test.
struct BruteClosest {
  Vec3 point;
  double distance;
  int face;
};

inline BruteClosest bruteForceClosestPoint(const TriangleMesh& mesh, const Vec3& query) {
  BruteClosest best{Vec3::Zero(), std::numeric_limits<double>::infinity(), -1};
  double bestSq = std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < mesh.faceCount(); ++f) {
    const auto& tri = mesh.faces()[f];
    const auto c = mhcd::closestPointOnTriangle(query, mesh.vertices()[tri[0]],
                                                mesh.vertices()[tri[1]],
                                                mesh.vertices()[tri[2]]);
    const double d2 = (query - c.point).squaredNorm();
    if (d2 < bestSq || (d2 == bestSq && static_cast<int>(f) < best.face)) {
      bestSq = d2;
      best = {c.point, std::sqrt(d2), static_cast<int>(f)};
    }
  }
  return best;
}

// Segment-based ray/triangle test (independent of the BVH ray code).
inline bool rayHitsTriangle(const Vec3& origin, const Vec3& dir, const Vec3& a,
                            const Vec3& b, const Vec3& c, double& tOut) {
  const Vec3 e1 = b - a, e2 = c - a;
  const Vec3 p = dir.cross(e2);
  const double det = e1.dot(p);
  if (std::abs(det) < 1e-13) return false;
  const double inv = 1.0 / det;
  const Vec3 t = origin - a;
  const double u = t.dot(p) * inv;
  if (u < 0 || u > 1) return false;
  const Vec3 q = t.cross(e1);
  const double v = dir.dot(q) * inv;
  if (v < 0 || u + v > 1) return false;
  tOut = e2.dot(q) * inv;
  return tOut > 1e-12;
}

// Inside test by parity voting over several random ray directions.
inline bool rayParityInside(const TriangleMesh& mesh, const Vec3& query, int rays = 16,
                            std::uint64_t seed = 12345) {
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal;
  int insideVotes = 0;
  for (int r = 0; r < rays; ++r) {
    Vec3 dir(normal(engine), normal(engine), normal(engine));
    if (dir.norm() < 1e-9) dir = Vec3(1, 0, 0);
    dir.normalize();
    int crossings = 0;
    for (const auto& tri : mesh.faces()) {
      double t;
      if (rayHitsTriangle(query, dir, mesh.vertices()[tri[0]], mesh.vertices()[tri[1]],
                          mesh.vertices()[tri[2]], t))
        ++crossings;
    }
    insideVotes += crossings % 2;
  }
  return insideVotes * 2 > rays;
}

// Generalized winding number (solid-angle sum / 4pi); > 0.5 means inside.
inline double windingNumber(const TriangleMesh& mesh, const Vec3& query) {
  double total = 0;
  for (const auto& tri : mesh.faces()) {
    const Vec3 a = mesh.vertices()[tri[0]] - query;
    const Vec3 b = mesh.vertices()[tri[1]] - query;
    const Vec3 c = mesh.vertices()[tri[2]] - query;
    const double la = a.norm(), lb = b.norm(), lc = c.norm();
    const double num = a.dot(b.cross(c));
    const double den = la * lb * lc + a.dot(b) * lc + b.dot(c) * la + c.dot(a) * lb;
    total += 2.0 * std::atan2(num, den);
  }
  return total / (4.0 * 3.14159265358979323846);
}

// Axis-aligned box mesh (12 triangles, outward orientation).
inline TriangleMesh makeBox(const Vec3& lo, const Vec3& hi) {
  std::vector<Vec3> v = {{lo.x(), lo.y(), lo.z()}, {hi.x(), lo.y(), lo.z()},
                         {hi.x(), hi.y(), lo.z()}, {lo.x(), hi.y(), lo.z()},
                         {lo.x(), lo.y(), hi.z()}, {hi.x(), lo.y(), hi.z()},
                         {hi.x(), hi.y(), hi.z()}, {lo.x(), hi.y(), hi.z()}};
  std::vector<std::array<int, 3>> f = {
      {0, 2, 1}, {0, 3, 2},  // z = lo
      {4, 5, 6}, {4, 6, 7},  // z = hi
      {0, 1, 5}, {0, 5, 4},  // y = lo
      {3, 6, 2}, {3, 7, 6},  // y = hi
      {0, 7, 3}, {0, 4, 7},  // x = lo
      {1, 2, 6}, {1, 6, 5},  // x = hi
  };
  return TriangleMesh::fromData(std::move(v), std::move(f));
}

inline TriangleMesh makeCube(double halfExtent = 0.5) {
  return makeBox(Vec3::Constant(-halfExtent), Vec3::Constant(halfExtent));
}

// Icosphere by subdividing an icosahedron; 320 faces at subdivisions=2.
inline TriangleMesh makeIcosphere(double radius = 1.0, int subdivisions = 2) {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> verts = {{-1, phi, 0}, {1, phi, 0},   {-1, -phi, 0}, {1, -phi, 0},
                             {0, -1, phi}, {0, 1, phi},   {0, -1, -phi}, {0, 1, -phi},
                             {phi, 0, -1}, {phi, 0, 1},   {-phi, 0, -1}, {-phi, 0, 1}};
  for (auto& v : verts) v.normalize();
  std::vector<std::array<int, 3>> faces = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};

  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      const auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      verts.push_back(((verts[a] + verts[b]) * 0.5).normalized());
      const int id = static_cast<int>(verts.size()) - 1;
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<std::array<int, 3>> next;
    for (const auto& f : faces) {
      const int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }

  for (auto& v : verts) v *= radius;
  return TriangleMesh::fromData(std::move(verts), std::move(faces));
}

inline double directBilinear(const double* f00, const double* f10, const double* f01,
                             const double* f11, double ax, double ay, int k) {
  return (1 - ax) * (1 - ay) * f00[k] + ax * (1 - ay) * f10[k] + (1 - ax) * ay * f01[k] +
         ax * ay * f11[k];
}

}  // namespace oracles
