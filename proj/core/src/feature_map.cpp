#include "mhcd/feature_map.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mhcd {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

double OcclusionMask::erasedFraction() const {
  if (erased.empty()) return 0;
  std::size_t n = 0;
  for (auto v : erased) n += v != 0;
  return static_cast<double>(n) / static_cast<double>(erased.size());
}

FeatureMap renderFeatureMap(const BodySurface& body, const Camera& cam,
                            const OcclusionMask& mask, const ProjectionSettings& settings) {
  if (settings.channels < 5) throw ConfigError("feature map needs at least 5 channels");
  if (mask.width != cam.width || mask.height != cam.height)
    throw DataError("occlusion mask size does not match camera image size");
  cam.validate();

  bool anyVisible = false;
  for (const auto& v : body.mesh.vertices()) {
    if (cam.project(v).inFrustum) {
      anyVisible = true;
      break;
    }
  }
  if (!anyVisible) throw DataError("mesh is entirely outside the camera frustum");

  const int w = settings.mapSize, h = settings.mapSize, c = settings.channels;
  FeatureMap fmap{w, h, c, std::vector<double>(static_cast<std::size_t>(w) * h * c, 0.0)};

  const Vec3 origin = cam.center();
  const double sx = static_cast<double>(cam.width) / w;
  const double sy = static_cast<double>(cam.height) / h;

  struct Hit {
    double z;
    int face;
  };
  std::vector<Hit> hits(static_cast<std::size_t>(w) * h, {kInf, -1});
  double zMin = kInf, zMax = -kInf;

  for (int py = 0; py < h; ++py) {
    for (int px = 0; px < w; ++px) {
      const double u = (px + 0.5) * sx;
      const double v = (py + 0.5) * sy;
      const int mx = std::clamp(static_cast<int>(u), 0, cam.width - 1);
      const int my = std::clamp(static_cast<int>(v), 0, cam.height - 1);
      if (mask.at(mx, my)) continue;

      const Vec3 dirCam((u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy, 1.0);
      const Vec3 dir = (cam.rotation.transpose() * dirCam).normalized();
      const auto hit = rayIntersect(body.bvh, body.mesh, origin, dir);
      if (!hit) continue;
      const double z = cam.toCamera(origin + hit->first * dir).z();
      hits[static_cast<std::size_t>(py) * w + px] = {z, hit->second};
      zMin = std::min(zMin, z);
      zMax = std::max(zMax, z);
    }
  }

  const double zRange = zMax > zMin ? zMax - zMin : 1.0;
  for (int py = 0; py < h; ++py) {
    for (int px = 0; px < w; ++px) {
      const Hit& hit = hits[static_cast<std::size_t>(py) * w + px];
      if (hit.face < 0) continue;
      double* f = fmap.at(px, py);
      f[0] = 1.0;
      f[1] = (hit.z - zMin) / zRange;
      const Vec3 n = cam.rotation * body.mesh.faceNormals()[hit.face];
      f[2] = n.x();
      f[3] = n.y();
      f[4] = n.z();
      // Radial position encoding of the pixel, alternating sin/cos bands.
      const double u = (px + 0.5) * sx;
      const double v = (py + 0.5) * sy;
      const double r = std::min(
          1.0, 2.0 * std::hypot((u - cam.cx) / cam.width, (v - cam.cy) / cam.height));
      for (int k = 0; k + 5 < c; ++k) {
        const double freq = std::pow(2.0, k / 2) * kPi;
        f[5 + k] = (k % 2 == 0) ? std::sin(freq * r) : std::cos(freq * r);
      }
    }
  }
  return fmap;
}

RowMatrixXd samplePointFeatures(const PointCloud& points, const Camera& cam,
                                const FeatureMap& fmap, const ProjectionSettings& settings) {
  const int w = fmap.width, h = fmap.height, c = fmap.channels;
  RowMatrixXd out = RowMatrixXd::Zero(points.rows(), c);
  if (points.rows() == 0) return out;

  const auto projections = projectPoints(points, cam);
  const double sx = w / static_cast<double>(cam.width);
  const double sy = h / static_cast<double>(cam.height);

  // Depth buffer from splatting the cloud itself at map resolution.
  std::vector<double> zbuf(static_cast<std::size_t>(w) * h, kInf);
  const int r = std::max(0, settings.splatRadius);
  for (const auto& p : projections) {
    if (!p.inFrustum) continue;
    const int ix = std::clamp(static_cast<int>(p.u * sx), 0, w - 1);
    const int iy = std::clamp(static_cast<int>(p.v * sy), 0, h - 1);
    for (int dy = -r; dy <= r; ++dy) {
      for (int dx = -r; dx <= r; ++dx) {
        const int x = ix + dx, y = iy + dy;
        if (x < 0 || x >= w || y < 0 || y >= h) continue;
        double& z = zbuf[static_cast<std::size_t>(y) * w + x];
        z = std::min(z, p.depth);
      }
    }
  }

  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const auto& p = projections[static_cast<std::size_t>(i)];
    if (!p.inFrustum) continue;
    const double tx = p.u * sx;
    const double ty = p.v * sy;
    const int ix = std::clamp(static_cast<int>(tx), 0, w - 1);
    const int iy = std::clamp(static_cast<int>(ty), 0, h - 1);

    // Zero-feature sinks: masked pixel, or hidden behind the splatted cloud.
    if (fmap.at(ix, iy)[0] == 0.0) continue;
    if (p.depth > zbuf[static_cast<std::size_t>(iy) * w + ix] + settings.depthEps) continue;

    // Bilinear over texel centers, clamped at borders.
    const double gx = std::clamp(tx - 0.5, 0.0, static_cast<double>(w - 1));
    const double gy = std::clamp(ty - 0.5, 0.0, static_cast<double>(h - 1));
    const int x0 = std::min(static_cast<int>(gx), w - 2 >= 0 ? w - 2 : 0);
    const int y0 = std::min(static_cast<int>(gy), h - 2 >= 0 ? h - 2 : 0);
    const int x1 = std::min(x0 + 1, w - 1);
    const int y1 = std::min(y0 + 1, h - 1);
    const double ax = gx - x0;
    const double ay = gy - y0;

    const double* f00 = fmap.at(x0, y0);
    const double* f10 = fmap.at(x1, y0);
    const double* f01 = fmap.at(x0, y1);
    const double* f11 = fmap.at(x1, y1);
    double* row = out.row(i).data();
    for (int k = 0; k < c; ++k) {
      row[k] = (1 - ax) * (1 - ay) * f00[k] + ax * (1 - ay) * f10[k] +
               (1 - ax) * ay * f01[k] + ax * ay * f11[k];
    }
  }
  return out;
}

}  // namespace mhcd
