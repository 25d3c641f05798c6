#include <doctest.h>

#include <cmath>

#include "mhcd/metrics.hpp"
#include "mhcd/rng.hpp"
#include "oracles.hpp"

using namespace mhcd;

namespace {

double bruteChamfer(const PointCloud& a, const PointCloud& b) {
  auto directed = [](const PointCloud& from, const PointCloud& to) {
    double sum = 0;
    for (Eigen::Index i = 0; i < from.rows(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < to.rows(); ++j)
        best = std::min(best, (from.row(i) - to.row(j)).norm());
      sum += best;
    }
    return sum / static_cast<double>(from.rows());
  };
  return 0.5 * (directed(a, b) + directed(b, a));
}

PointCloud randomCloud(int n, double extent, std::uint64_t seed, const Vec3& shift = Vec3::Zero()) {
  Rng rng(seed);
  PointCloud out(n, 3);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < 3; ++k) out(i, k) = rng.uniform(-extent, extent) + shift[k];
  return out;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("chamfer: identical clouds score zero") {
  const PointCloud a = randomCloud(100, 0.5, 1);
  CHECK(chamferDistance(a, a) == 0.0);
}

TEST_CASE("chamfer: uniform shift by d scores d") {
  PointCloud a(2, 3);
  a << 0, 0, 0, 0, 1, 0;
  PointCloud b = a;
  b.col(0).array() += 0.25;
  CHECK(chamferDistance(a, b) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("chamfer: grid acceleration equals brute force") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const PointCloud a = randomCloud(500, 0.6, seed * 2 + 1);
    const PointCloud b = randomCloud(500, 0.6, seed * 2 + 2, Vec3(0.2, -0.1, 0.05));
    CHECK(std::abs(chamferDistance(a, b) - bruteChamfer(a, b)) <= 1e-12);
  }
}

TEST_CASE("chamfer: symmetry, non-negativity, empty rejection") {
  const PointCloud a = randomCloud(64, 0.5, 5);
  const PointCloud b = randomCloud(80, 0.5, 6);
  CHECK(chamferDistance(a, b) == chamferDistance(b, a));
  CHECK(chamferDistance(a, b) > 0.0);
  const PointCloud empty(0, 3);
  CHECK_THROWS_AS(chamferDistance(a, empty), DataError);
}

TEST_CASE("chamfer and p2s scale linearly with the inputs") {
  const PointCloud a = randomCloud(64, 0.5, 7);
  const PointCloud b = randomCloud(64, 0.5, 8);
  const double base = chamferDistance(a, b);
  CHECK(chamferDistance(PointCloud(3.0 * a), PointCloud(3.0 * b)) ==
        doctest::Approx(3.0 * base).epsilon(1e-12));

  const BodySurface sphere{oracles::makeIcosphere(0.5, 2)};
  const BodySurface bigSphere{oracles::makeIcosphere(1.0, 2)};
  const double p2s = pointToSurface(a, sphere);
  CHECK(pointToSurface(PointCloud(2.0 * a), bigSphere) ==
        doctest::Approx(2.0 * p2s).epsilon(1e-9));
}

TEST_CASE("p2s: surface samples score zero, height above a plane scores the height") {
  const TriangleMesh sphereMesh = oracles::makeIcosphere(0.5, 2);
  const BodySurface sphere{oracles::makeIcosphere(0.5, 2)};
  const PointCloud onSurface = uniformSurfaceSample(sphereMesh, 500, 3);
  CHECK(pointToSurface(onSurface, sphere) <= 1e-9);

  std::vector<Vec3> v = {{-1, 0, -1}, {1, 0, -1}, {1, 0, 1}, {-1, 0, 1}};
  std::vector<std::array<int, 3>> f = {{0, 1, 2}, {0, 2, 3}};
  const BodySurface plane{TriangleMesh::fromData(v, f)};
  PointCloud single(1, 3);
  single << 0.1, 0.35, -0.2;
  CHECK(pointToSurface(single, plane) == doctest::Approx(0.35).epsilon(1e-12));
}

TEST_CASE("p2s matches a brute-force per-triangle scan") {
  const BodySurface body{oracles::makeIcosphere(0.45, 2)};
  const PointCloud pts = randomCloud(1000, 0.8, 17);
  double brute = 0;
  for (Eigen::Index i = 0; i < pts.rows(); ++i)
    brute += oracles::bruteForceClosestPoint(body.mesh, pts.row(i).transpose()).distance;
  brute /= static_cast<double>(pts.rows());
  CHECK(pointToSurface(pts, body) == doctest::Approx(brute).epsilon(1e-12));
}

TEST_CASE("p2s is bounded by the distance to any vertex set of the mesh") {
  const BodySurface body{oracles::makeIcosphere(0.45, 1)};
  const PointCloud pts = randomCloud(200, 0.7, 23);
  PointCloud verts(static_cast<Eigen::Index>(body.mesh.vertexCount()), 3);
  for (std::size_t i = 0; i < body.mesh.vertexCount(); ++i)
    verts.row(static_cast<Eigen::Index>(i)) = body.mesh.vertices()[i].transpose();

  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    PointCloud one(1, 3);
    one.row(0) = pts.row(i);
    const double toSurface = pointToSurface(one, body);
    double toVerts = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < verts.rows(); ++j)
      toVerts = std::min(toVerts, (one.row(0) - verts.row(j)).norm());
    CHECK(toSurface <= toVerts + 1e-12);
  }
}

TEST_CASE("uniform surface sampling stays on a single triangle") {
  std::vector<Vec3> v = {{0, 0, 0}, {2, 0, 0}, {0, 3, 0}};
  std::vector<std::array<int, 3>> f = {{0, 1, 2}};
  const TriangleMesh tri = TriangleMesh::fromData(v, f);
  const PointCloud pts = uniformSurfaceSample(tri, 500, 9);
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    // Barycentric coordinates with respect to the triangle.
    const double u = pts(i, 0) / 2.0;
    const double w = pts(i, 1) / 3.0;
    CHECK(pts(i, 2) == 0.0);
    CHECK(u >= -1e-12);
    CHECK(w >= -1e-12);
    CHECK(u + w <= 1.0 + 1e-12);
  }
}

TEST_CASE("area-weighted selection follows a 9:1 ratio within 3 sigma") {
  // Two right triangles with legs (3,3) and (1,1): areas 4.5 and 0.5.
  std::vector<Vec3> v = {{0, 0, 0}, {3, 0, 0}, {0, 3, 0}, {10, 0, 0}, {11, 0, 0}, {10, 1, 0}};
  std::vector<std::array<int, 3>> f = {{0, 1, 2}, {3, 4, 5}};
  const TriangleMesh mesh = TriangleMesh::fromData(v, f);
  const int k = 10000;
  const PointCloud pts = uniformSurfaceSample(mesh, k, 11);
  int big = 0;
  for (Eigen::Index i = 0; i < pts.rows(); ++i) big += pts(i, 0) < 5.0;
  const double p = 0.9;
  const double sigma = std::sqrt(k * p * (1 - p));
  CHECK(std::abs(big - k * p) <= 3.0 * sigma);
}

TEST_CASE("surface sampling is reproducible per seed") {
  const TriangleMesh mesh = oracles::makeIcosphere(0.5, 1);
  const PointCloud a = uniformSurfaceSample(mesh, 100, 21);
  const PointCloud b = uniformSurfaceSample(mesh, 100, 21);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("report statistics aggregate per seed") {
  EvalReport report;
  for (std::uint64_t seed = 0; seed < 4; ++seed)
    for (int i = 0; i < 3; ++i)
      report.samples.push_back(
          {"s" + std::to_string(i), seed, 0.4, 10, 2.0 + 0.1 * seed, 1.9});
  double mean = 0, se = 0;
  report.seedStatistics(mean, se);
  CHECK(mean == doctest::Approx(2.15).epsilon(1e-12));
  CHECK(se > 0.0);
  CHECK(report.meanChamferCm() == doctest::Approx(2.15).epsilon(1e-12));
}

}  // TEST_SUITE
