#pragma once

#include <optional>
#include <vector>

#include "mhcd/mesh.hpp"
#include "mhcd/types.hpp"

namespace mhcd {

enum class SignConvention { InsideNegative, InsidePositive };

struct SurfaceQueryResult {
  Vec3 closestPoint;
  double unsignedDistance;
  int sign;     // +1 outside, -1 inside (pseudo-normal test)
  Vec3 normal;  // pseudo-normal of the closest feature, unit length
  int faceIndex;
};

/// Axis-aligned bounding-box tree over mesh faces, nodes stored in
/// depth-first order (left child is the next node, right child indexed).
/// Immutable after construction; queries are const and thread-safe.
class MeshBvh {
public:
  struct Node {
    Vec3 boxMin, boxMax;
    int rightChild = -1;  // internal nodes; leaf iff faceCount > 0
    int faceBegin = 0;
    int faceCount = 0;
  };

  MeshBvh() = default;
  explicit MeshBvh(const TriangleMesh& mesh, int leafSize = 4);

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<int>& faceOrder() const { return faceOrder_; }
  int leafSize() const { return leafSize_; }

private:
  std::vector<Node> nodes_;
  std::vector<int> faceOrder_;
  int leafSize_ = 4;

  friend SurfaceQueryResult closestSurfacePoint(const MeshBvh&, const TriangleMesh&,
                                                const Vec3&);
  friend std::optional<std::pair<double, int>> rayIntersect(const MeshBvh&,
                                                            const TriangleMesh&, const Vec3&,
                                                            const Vec3&);
};

SurfaceQueryResult closestSurfacePoint(const MeshBvh& bvh, const TriangleMesh& mesh,
                                       const Vec3& query);

// Negative inside under the default convention. Throws DataError for
// non-watertight meshes (the sign is undefined there).
double signedDistance(const MeshBvh& bvh, const TriangleMesh& mesh, const Vec3& query,
                      SignConvention convention = SignConvention::InsideNegative);

// 1 iff strictly inside; points within 1e-12 of the surface count as outside.
int occupancy(const MeshBvh& bvh, const TriangleMesh& mesh, const Vec3& query);

// Nearest intersection (t, faceIndex) along origin + t*dir, t >= 0.
std::optional<std::pair<double, int>> rayIntersect(const MeshBvh& bvh,
                                                   const TriangleMesh& mesh,
                                                   const Vec3& origin, const Vec3& dir);

/// A mesh bundled with its acceleration structure; watertight bodies in
/// this pairing are what conditioning consumes as hypotheses.
struct BodySurface {
  TriangleMesh mesh;
  MeshBvh bvh;

  explicit BodySurface(TriangleMesh m) : mesh(std::move(m)), bvh(mesh) {}
};

}  // namespace mhcd
