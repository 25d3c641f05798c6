#include <doctest.h>

#include <random>

#include <Eigen/Geometry>

#include "mhcd/body.hpp"
#include "mhcd/bvh.hpp"
#include "oracles.hpp"

using namespace mhcd;

namespace {

PointCloud randomQueries(int n, double extent, std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  std::uniform_real_distribution<double> dist(-extent, extent);
  PointCloud out(n, 3);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < 3; ++k) out(i, k) = dist(engine);
  return out;
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("single triangle gives a one-leaf BVH with the triangle's box") {
  std::vector<Vec3> v = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  std::vector<std::array<int, 3>> f = {{0, 1, 2}};
  const TriangleMesh mesh = TriangleMesh::fromData(v, f);
  const MeshBvh bvh(mesh);
  REQUIRE(bvh.nodes().size() == 1);
  CHECK(bvh.nodes()[0].faceCount == 1);
  CHECK((bvh.nodes()[0].boxMin - Vec3(0, 0, 0)).norm() == 0.0);
  CHECK((bvh.nodes()[0].boxMax - Vec3(1, 1, 0)).norm() == 0.0);
}

TEST_CASE("empty mesh cannot build a BVH") {
  CHECK_THROWS_AS(TriangleMesh::fromData({}, {}), DataError);
}

TEST_CASE("BVH structural invariants") {
  const TriangleMesh mesh = oracles::makeIcosphere(1.0, 2);
  const MeshBvh bvh(mesh);

  // Every face appears exactly once across leaves.
  std::vector<int> seen(mesh.faceCount(), 0);
  for (const auto& node : bvh.nodes()) {
    for (int i = node.faceBegin; i < node.faceBegin + node.faceCount; ++i)
      seen[bvh.faceOrder()[i]]++;
  }
  for (int count : seen) CHECK(count == 1);

  // Parent boxes contain child boxes (DFS order: left child follows).
  for (std::size_t n = 0; n < bvh.nodes().size(); ++n) {
    const auto& node = bvh.nodes()[n];
    if (node.faceCount > 0) continue;
    for (int child : {static_cast<int>(n) + 1, node.rightChild}) {
      const auto& c = bvh.nodes()[child];
      CHECK((c.boxMin.array() >= node.boxMin.array() - 1e-15).all());
      CHECK((c.boxMax.array() <= node.boxMax.array() + 1e-15).all());
    }
  }
}

TEST_CASE("BVH closest point equals brute force on an icosphere") {
  const TriangleMesh mesh = oracles::makeIcosphere(1.0, 2);
  REQUIRE(mesh.faceCount() == 320);
  const MeshBvh bvh(mesh);
  const PointCloud queries = randomQueries(1000, 1.6, 42);

  for (Eigen::Index i = 0; i < queries.rows(); ++i) {
    const Vec3 q = queries.row(i).transpose();
    const auto fast = closestSurfacePoint(bvh, mesh, q);
    const auto brute = oracles::bruteForceClosestPoint(mesh, q);
    CHECK(std::abs(fast.unsignedDistance - brute.distance) <= 1e-9);
    CHECK(fast.faceIndex == brute.face);
    CHECK(std::abs(fast.unsignedDistance - (q - fast.closestPoint).norm()) <= 1e-12);
  }
}

TEST_CASE("query at icosphere center is inside, distance near radius") {
  const TriangleMesh mesh = oracles::makeIcosphere(1.0, 2);
  const MeshBvh bvh(mesh);
  const auto r = closestSurfacePoint(bvh, mesh, Vec3::Zero());
  CHECK(r.sign == -1);
  // Faceted sphere: distance is the inradius of the closest face, just
  // under the circumscribed radius 1.
  CHECK(r.unsignedDistance > 0.9);
  CHECK(r.unsignedDistance < 1.0);
  const auto brute = oracles::bruteForceClosestPoint(mesh, Vec3::Zero());
  CHECK(std::abs(r.unsignedDistance - brute.distance) <= 1e-12);
}

TEST_CASE("query exactly on a vertex") {
  const TriangleMesh mesh = oracles::makeIcosphere(1.0, 1);
  const MeshBvh bvh(mesh);
  const Vec3 vertex = mesh.vertices()[7];
  const auto r = closestSurfacePoint(bvh, mesh, vertex);
  CHECK(r.unsignedDistance == 0.0);
  CHECK((r.closestPoint - vertex).norm() == 0.0);
}

TEST_CASE("cube query from above") {
  const TriangleMesh cube = oracles::makeCube();
  const MeshBvh bvh(cube);
  const auto r = closestSurfacePoint(bvh, cube, Vec3(0, 0, 2));
  CHECK((r.closestPoint - Vec3(0, 0, 0.5)).norm() <= 1e-12);
  CHECK(r.unsignedDistance == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(r.sign == 1);
}

TEST_CASE("signed distance on the cube") {
  const TriangleMesh cube = oracles::makeCube();
  const MeshBvh bvh(cube);
  CHECK(signedDistance(bvh, cube, Vec3(0, 0, 0)) == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(signedDistance(bvh, cube, Vec3(0, 0, 1)) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(signedDistance(bvh, cube, Vec3(0, 0, 1), SignConvention::InsidePositive) ==
        doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("signed distance requires a watertight mesh") {
  std::vector<Vec3> v = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  std::vector<std::array<int, 3>> f = {{0, 1, 2}};
  const TriangleMesh tri = TriangleMesh::fromData(v, f);
  const MeshBvh bvh(tri);
  CHECK_THROWS_AS(signedDistance(bvh, tri, Vec3(0, 0, 1)), DataError);
  CHECK_THROWS_AS(occupancy(bvh, tri, Vec3(0, 0, 1)), DataError);
}

TEST_CASE("capsule body signed distance matches the ray-parity oracle") {
  const GeneratedBody body = generateBody(7);
  const MeshBvh bvh(body.bodyMesh);
  const PointCloud queries = randomQueries(1000, 0.55, 99);

  int signMismatches = 0;
  double maxDistErr = 0;
  for (Eigen::Index i = 0; i < queries.rows(); ++i) {
    const Vec3 q = queries.row(i).transpose();
    const double sd = signedDistance(bvh, body.bodyMesh, q);
    const auto brute = oracles::bruteForceClosestPoint(body.bodyMesh, q);
    maxDistErr = std::max(maxDistErr, std::abs(std::abs(sd) - brute.distance));
    if (std::abs(sd) < 1e-7) continue;  // parity voting is noisy on-surface
    const bool inside = oracles::rayParityInside(body.bodyMesh, q, 16, 1000 + i);
    if (inside != (sd < 0)) ++signMismatches;
  }
  CHECK(signMismatches == 0);
  CHECK(maxDistErr <= 1e-9);
}

TEST_CASE("sign agrees with the winding number oracle") {
  const GeneratedBody body = generateBody(11);
  const MeshBvh bvh(body.bodyMesh);
  const PointCloud queries = randomQueries(200, 0.5, 5);
  for (Eigen::Index i = 0; i < queries.rows(); ++i) {
    const Vec3 q = queries.row(i).transpose();
    const double sd = signedDistance(bvh, body.bodyMesh, q);
    if (std::abs(sd) < 1e-7) continue;
    const bool inside = oracles::windingNumber(body.bodyMesh, q) > 0.5;
    CHECK(inside == (sd < 0));
  }
}

TEST_CASE("occupancy basics and boundary convention") {
  const TriangleMesh cube = oracles::makeCube();
  const MeshBvh bvh(cube);
  CHECK(occupancy(bvh, cube, Vec3(0, 0, 0)) == 1);
  CHECK(occupancy(bvh, cube, Vec3(2, 2, 2)) == 0);
  CHECK(occupancy(bvh, cube, Vec3(0, 0, 0.5)) == 0);  // on the surface
}

TEST_CASE("occupancy on a two-component mesh agrees with ray parity") {
  // Two disjoint watertight boxes merged into one mesh.
  const TriangleMesh a = oracles::makeBox(Vec3(-0.5, -0.5, -0.5), Vec3(-0.1, 0.4, 0.3));
  const TriangleMesh b = oracles::makeBox(Vec3(0.1, -0.3, -0.2), Vec3(0.5, 0.5, 0.5));
  std::vector<Vec3> verts = a.vertices();
  std::vector<std::array<int, 3>> faces = a.faces();
  const int off = static_cast<int>(verts.size());
  for (const auto& v : b.vertices()) verts.push_back(v);
  for (auto f : b.faces()) {
    for (int& idx : f) idx += off;
    faces.push_back(f);
  }
  const TriangleMesh merged = TriangleMesh::fromData(verts, faces);
  REQUIRE(merged.watertight());
  const MeshBvh bvh(merged);

  const PointCloud queries = randomQueries(10000, 0.7, 31);
  int disagreements = 0;
  for (Eigen::Index i = 0; i < queries.rows(); ++i) {
    const Vec3 q = queries.row(i).transpose();
    const auto r = closestSurfacePoint(bvh, merged, q);
    if (r.unsignedDistance < 1e-7) continue;
    const bool inside = oracles::rayParityInside(merged, q, 16, 400 + i);
    if (inside != (occupancy(bvh, merged, q) == 1)) ++disagreements;
  }
  CHECK(disagreements == 0);
}

TEST_CASE("occupancy is consistent with signed distance off the surface") {
  const GeneratedBody body = generateBody(3);
  const MeshBvh bvh(body.bodyMesh);
  const PointCloud queries = randomQueries(2000, 0.6, 77);
  for (Eigen::Index i = 0; i < queries.rows(); ++i) {
    const Vec3 q = queries.row(i).transpose();
    const double sd = signedDistance(bvh, body.bodyMesh, q);
    if (std::abs(sd) < 1e-9) continue;
    CHECK(occupancy(bvh, body.bodyMesh, q) == (sd < 0 ? 1 : 0));
  }
}

TEST_CASE("rigid transform equivariance") {
  const TriangleMesh mesh = oracles::makeIcosphere(0.9, 1);
  const MeshBvh bvh(mesh);

  const Eigen::AngleAxisd rot(0.7, Vec3(1, 2, 3).normalized());
  const Mat3 R = rot.toRotationMatrix();
  const Vec3 shift(0.3, -0.2, 0.9);

  std::vector<Vec3> verts;
  for (const auto& v : mesh.vertices()) verts.push_back(R * v + shift);
  const TriangleMesh moved = TriangleMesh::fromData(verts, mesh.faces());
  const MeshBvh movedBvh(moved);

  const PointCloud queries = randomQueries(200, 1.4, 8);
  for (Eigen::Index i = 0; i < queries.rows(); ++i) {
    const Vec3 q = queries.row(i).transpose();
    const auto base = closestSurfacePoint(bvh, mesh, q);
    const auto xformed = closestSurfacePoint(movedBvh, moved, R * q + shift);
    CHECK(std::abs(base.unsignedDistance - xformed.unsignedDistance) <= 1e-9);
    CHECK((R * base.normal - xformed.normal).norm() <= 1e-6);
    CHECK(base.sign == xformed.sign);
  }
}

TEST_CASE("queries are bit-deterministic") {
  const GeneratedBody body = generateBody(21);
  const MeshBvh bvh(body.bodyMesh);
  const Vec3 q(0.123, -0.321, 0.05);
  const auto a = closestSurfacePoint(bvh, body.bodyMesh, q);
  const auto b = closestSurfacePoint(bvh, body.bodyMesh, q);
  CHECK(a.unsignedDistance == b.unsignedDistance);
  CHECK(a.faceIndex == b.faceIndex);
  CHECK((a.closestPoint - b.closestPoint).norm() == 0.0);
  CHECK((a.normal - b.normal).norm() == 0.0);
}

TEST_CASE("equidistant faces resolve to the lowest index") {
  const TriangleMesh cube = oracles::makeCube();
  const MeshBvh bvh(cube);
  // Center of the +z face's diagonal edge: equidistant to both faces 2,3.
  const auto r = closestSurfacePoint(bvh, cube, Vec3(0, 0, 0.75));
  const auto brute = oracles::bruteForceClosestPoint(cube, Vec3(0, 0, 0.75));
  CHECK(r.faceIndex == brute.face);
}

}  // TEST_SUITE
