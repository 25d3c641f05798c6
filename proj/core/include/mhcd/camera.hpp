#pragma once

#include "mhcd/types.hpp"

namespace mhcd {

/// Pinhole camera, world -> camera via x_c = R x + t, pixel via intrinsics.
struct Camera {
  double fx = 1, fy = 1, cx = 0, cy = 0;
  Mat3 rotation = Mat3::Identity();  // world -> camera
  Vec3 translation = Vec3::Zero();
  int width = 0, height = 0;

  struct Projection {
    double u, v, depth;  // continuous pixel coordinates, camera-space z
    bool inFrustum;
  };

  void validate() const;

  Vec3 toCamera(const Vec3& p) const { return rotation * p + translation; }
  Vec3 center() const { return -rotation.transpose() * translation; }

  Projection project(const Vec3& p) const;
  Vec3 unproject(double u, double v, double depth) const;

  // Camera at `eye` looking at `target` (up = +y), standard pinhole axes
  // (+z forward, +x right, +y down in image coordinates).
  static Camera lookAt(const Vec3& eye, const Vec3& target, double focal, int width,
                       int height);
};

// Per-point projection of a cloud.
std::vector<Camera::Projection> projectPoints(const PointCloud& points, const Camera& cam);

}  // namespace mhcd
