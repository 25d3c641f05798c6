#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "mhcd/camera.hpp"
#include "mhcd/conditioning.hpp"
#include "mhcd/mesh.hpp"
#include "mhcd/types.hpp"

namespace mhcd {

/// Articulated capsule body: a fixed humanoid skeleton posed by per-joint
/// axis-angle rotations and per-bone length scales, skinned as the union
/// of capsules. The scan variant adds a smooth spherical-harmonic radial
/// displacement ("clothing") on top of the bare body.
struct BoneSpec {
  int parent;        // -1 attaches at the root origin
  Vec3 attachOffset; // from the parent's end point, in the parent's frame
  Vec3 restDir;      // unit direction at rest
  double length;
  double radius;
};

std::vector<BoneSpec> humanoidSkeleton();  // 10 bones

struct CapsuleBody {
  std::vector<BoneSpec> bones = humanoidSkeleton();
  std::vector<Vec3> jointRotations;   // axis-angle per bone
  std::vector<double> lengthScales;   // per bone
  std::vector<double> clothingCoeffs; // 9 real SH coefficients (bands 0..2)
  // Canonical-frame transform fitting the scan into the unit cube;
  // shared by every mesh derived from this body (scan, body, hypotheses).
  double frameScale = 1.0;
  Vec3 frameOffset = Vec3::Zero();
  int gridRes = 48;  // iso-surface extraction resolution (cells on max axis)
};

struct Capsule {
  Vec3 a, b;
  double radius;
};

// Forward kinematics: world-space capsules of the posed skeleton.
std::vector<Capsule> worldCapsules(const CapsuleBody& body);

double capsuleUnionSdf(const std::vector<Capsule>& capsules, const Vec3& p);

// Clamped low-order SH radial offset; identically zero for zero coefficients.
double clothingDisplacement(const CapsuleBody& body, const Vec3& direction);

// Marching-tetrahedra extraction (Kuhn cube subdivision, shared edge
// interpolation): closed, consistently oriented, watertight by
// construction and validated on load.
TriangleMesh extractIsoSurface(const std::function<double(const Vec3&)>& field,
                               const Vec3& boxMin, const Vec3& boxMax, int maxAxisCells);

// Raw-frame extraction + the body's canonical transform.
TriangleMesh extractBodyMesh(const CapsuleBody& body, bool withClothing);

struct BodyGenSettings {
  int gridRes = 48;
  double poseSigma = 0.18;        // GT pose randomization, radians
  double maxPoseAngle = 0.5;
  double clothingMin = 0.005;     // displacement amplitude range
  double clothingMax = 0.03;
  int imageSize = 256;
  double focal = 300.0;
  double cameraDistance = 2.2;
};

struct GeneratedBody {
  CapsuleBody params;
  TriangleMesh scanMesh;  // clothed, canonical frame
  TriangleMesh bodyMesh;  // bare body prior, canonical frame
  Camera camera;          // view 0
};

GeneratedBody generateBody(std::uint64_t seed, const BodyGenSettings& settings = {});

// Ring of cameras around the (canonical-frame) body.
Camera makeBodyCamera(int viewIndex, int viewCount, const BodyGenSettings& settings = {});

/// Stand-in for an off-the-shelf pose-distribution estimator: perturbs the
/// ground-truth skeleton with concentration-controlled rotation noise and
/// relative bone-length noise.
struct HypothesisSampler {
  double kappa = 40.0;       // rotation concentration; sigma = 1/sqrt(kappa)
  double lengthSigma = 0.02; // relative bone-length stddev
};

HypothesisSet sampleHypotheses(const CapsuleBody& gtBody, const HypothesisSampler& sampler,
                               int count, std::uint64_t seed);

// Single perturbed body surface (used for "estimated single" conditioning).
std::shared_ptr<const BodySurface> sampleHypothesis(const CapsuleBody& gtBody,
                                                    const HypothesisSampler& sampler,
                                                    std::uint64_t seed);

}  // namespace mhcd
