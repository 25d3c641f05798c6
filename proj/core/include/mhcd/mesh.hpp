#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "mhcd/types.hpp"

namespace mhcd {

/// Watertight-capable triangle mesh with precomputed angle-weighted
/// pseudo-normals (per vertex), edge pseudo-normals and face normals.
/// Non-watertight meshes are accepted but only support unsigned queries.
class TriangleMesh {
public:
  TriangleMesh() = default;

  // Validates indices, rejects degenerate (zero-area) faces, drops
  // unreferenced vertices, classifies watertightness and precomputes
  // all normals. Throws DataError on invalid input.
  static TriangleMesh fromData(std::vector<Vec3> vertices,
                               std::vector<std::array<int, 3>> faces);

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& faces() const { return faces_; }
  const std::vector<Vec3>& faceNormals() const { return faceNormals_; }
  const std::vector<Vec3>& vertexNormals() const { return vertexNormals_; }
  const std::vector<Vec3>& edgeNormals() const { return edgeNormals_; }
  // Edge id of corner k of face f, i.e. edge (v_k, v_{k+1}).
  int faceEdge(int face, int corner) const { return faceEdges_[face][corner]; }

  bool watertight() const { return watertight_; }
  std::size_t vertexCount() const { return vertices_.size(); }
  std::size_t faceCount() const { return faces_.size(); }

  // Content hash over vertex and face data; used as the canonical
  // tie-break between geometrically equidistant hypothesis meshes.
  std::uint64_t contentHash() const { return contentHash_; }

  void boundingBox(Vec3& lo, Vec3& hi) const;

  // Rigid/scale transform applied in place: v -> v * scale + offset.
  void transform(double scale, const Vec3& offset);

private:
  std::vector<Vec3> vertices_;
  std::vector<std::array<int, 3>> faces_;
  std::vector<Vec3> faceNormals_;
  std::vector<Vec3> vertexNormals_;
  std::vector<Vec3> edgeNormals_;
  std::vector<std::array<int, 3>> faceEdges_;
  bool watertight_ = false;
  std::uint64_t contentHash_ = 0;

  void computeDerived();
};

// Closest point on a single triangle. `region` identifies the feature the
// closest point lies on: 0 face interior, 1..3 vertex a/b/c, 4..6 edge
// ab/bc/ca. Feature classification follows the barycentric-epsilon
// convention used by pseudo-normal sign tests.
struct TriangleClosest {
  Vec3 point;
  int region;
};
TriangleClosest closestPointOnTriangle(const Vec3& query, const Vec3& a, const Vec3& b,
                                       const Vec3& c);

}  // namespace mhcd
