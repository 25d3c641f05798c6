#include "mhcd/camera.hpp"

#include <cmath>

namespace mhcd {

namespace {
constexpr double kMinDepth = 1e-12;
}

void Camera::validate() const {
  if (fx <= 0 || fy <= 0) throw ConfigError("camera focal lengths must be positive");
  if (width <= 0 || height <= 0) throw ConfigError("camera image size must be positive");
  const Mat3 rtr = rotation.transpose() * rotation;
  if ((rtr - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-9)
    throw ConfigError("camera rotation is not orthonormal");
}

Camera::Projection Camera::project(const Vec3& p) const {
  const Vec3 pc = toCamera(p);
  Projection out;
  out.depth = pc.z();
  if (pc.z() <= kMinDepth) {
    out.u = 0;
    out.v = 0;
    out.inFrustum = false;
    return out;
  }
  out.u = fx * pc.x() / pc.z() + cx;
  out.v = fy * pc.y() / pc.z() + cy;
  out.inFrustum = out.u >= 0 && out.u <= width && out.v >= 0 && out.v <= height;
  return out;
}

Vec3 Camera::unproject(double u, double v, double depth) const {
  const Vec3 pc((u - cx) * depth / fx, (v - cy) * depth / fy, depth);
  return rotation.transpose() * (pc - translation);
}

Camera Camera::lookAt(const Vec3& eye, const Vec3& target, double focal, int width,
                      int height) {
  const Vec3 forward = (target - eye).normalized();
  Vec3 worldUp(0, 1, 0);
  if (std::abs(forward.dot(worldUp)) > 0.999) worldUp = Vec3(0, 0, 1);
  const Vec3 right = forward.cross(worldUp).normalized();
  const Vec3 down = forward.cross(right).normalized();  // image +v is down

  Camera cam;
  cam.rotation.row(0) = right.transpose();
  cam.rotation.row(1) = down.transpose();
  cam.rotation.row(2) = forward.transpose();
  cam.translation = -cam.rotation * eye;
  cam.fx = cam.fy = focal;
  cam.cx = width / 2.0;
  cam.cy = height / 2.0;
  cam.width = width;
  cam.height = height;
  return cam;
}

std::vector<Camera::Projection> projectPoints(const PointCloud& points, const Camera& cam) {
  std::vector<Camera::Projection> out(static_cast<std::size_t>(points.rows()));
  for (Eigen::Index i = 0; i < points.rows(); ++i)
    out[static_cast<std::size_t>(i)] = cam.project(points.row(i).transpose());
  return out;
}

}  // namespace mhcd
