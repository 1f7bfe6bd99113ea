#pragma once

#include <cstdint>
#include <random>

#include "hlsynth/geometry.hpp"
#include "hlsynth/losses.hpp"
#include "hlsynth/shading.hpp"

namespace hlsynth::testkit {

enum class SceneKind { kPlane, kSphere, kCheckerboard };

/// A closed-form scene rasterized through a pinhole camera. `geometry` holds
/// the rasterized depth, back-projected points, analytic normals evaluated at
/// those points, and the coverage mask. `albedo` is a plain test texture.
struct AnalyticScene {
  SceneKind kind = SceneKind::kSphere;
  CameraIntrinsics intrinsics;
  // Sphere: center and radius. Plane / checkerboard: unit normal facing the
  // camera and offset, so the plane is {X : normal . X = offset}.
  std::array<double, 3> center{0.0, 0.0, 1.0};
  double radius = 0.5;
  std::array<double, 3> plane_normal{0.0, 0.0, -1.0};
  double plane_offset = -1.0;
  int checker_cell = 8;

  GeometryBuffers geometry;
  LinearImage albedo;

  /// Analytic outward normal at camera-space point (x, y, z).
  std::array<double, 3> normal_at(double x, double y, double z) const;
};

/// Throws if any part of the sphere lies at or behind the camera plane.
AnalyticScene make_sphere_scene(double radius, const std::array<double, 3>& center,
                                const CameraIntrinsics& K, int width, int height);

/// Plane through `point` with the given normal; the normal is flipped to face
/// the camera. Pixels whose ray misses the plane in front are invalid.
AnalyticScene make_plane_scene(const std::array<double, 3>& point,
                               const std::array<double, 3>& normal,
                               const CameraIntrinsics& K, int width, int height);

AnalyticScene make_checkerboard_scene(const std::array<double, 3>& point,
                                      const std::array<double, 3>& normal,
                                      const CameraIntrinsics& K, int width,
                                      int height, int cell);

/// Scene with random kind and parameters, fully in front of the camera.
AnalyticScene random_scene(std::mt19937_64& rng, int width, int height);

/// Reference evaluation of the specular model at one pixel in plain scalar
/// arithmetic, reading only the scene's rasterized depth and its closed-form
/// normal. Returns 0 for uncovered pixels. Output is clamped to [0,1].
double brute_force_highlight(const AnalyticScene& scene,
                             const ShadingParams& params, int px, int py,
                             ViewConvention convention =
                                 ViewConvention::kTowardCamera);

/// Copy of `base` with `count` random squares raised to near-white, so the
/// luminance cutoff has something to find.
LinearImage add_bright_spots(const LinearImage& base, std::mt19937_64& rng, int count);

// Random instances for gradient checks. Each keeps every quantity that feeds
// an absolute value or threshold at least `margin` away from its kink, so a
// central difference with step < margin never straddles one.

struct HighlightInstance {
  ScalarMap pred;
  ScalarMap target;
};
HighlightInstance highlight_instance(std::mt19937_64& rng, int width, int height,
                                     double margin = 1e-3);

struct SeamInstance {
  LinearImage pred;
  LinearImage input;
  BinaryMask ring;
};
/// A random blob hole with its radius-1 ring; the ring is never empty.
SeamInstance seam_instance(std::mt19937_64& rng, int width, int height,
                           double margin = 1e-3);

/// Brightness of every pixel stays at least `margin` from tau_m, and at
/// least one pixel is above it.
LinearImage spec_instance(std::mt19937_64& rng, int width, int height,
                          double tau_m, double margin = 1e-2);

struct ReconstructionInstance {
  LinearImage pred;
  LinearImage ref;
  BinaryMask mask;
};
ReconstructionInstance reconstruction_instance(std::mt19937_64& rng, int width,
                                               int height, double margin = 1e-3);

}  // namespace hlsynth::testkit
