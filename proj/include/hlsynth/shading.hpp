#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>

#include "hlsynth/geometry.hpp"

namespace hlsynth {

inline constexpr double kDefaultR0 = 0.04;

struct ShadingParams {
  double r0 = kDefaultR0;   // Fresnel reflectance at normal incidence
  double k_h = 1.0;         // global highlight intensity, > 0
  double shininess = 50.0;  // Blinn-Phong exponent, > 0
  Vec3 light = Vec3::Zero();  // point light, camera frame, meters

  void validate() const;
};

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

// The defaults are a calibration for meter-scale scenes, not published values.
struct SamplingRanges {
  Range k_h{0.2, 1.0};
  Range shininess{20.0, 400.0};
  Vec3 light_min{-0.5, -0.5, 0.0};
  Vec3 light_max{0.5, 0.5, 0.3};
  double r0 = kDefaultR0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// R0 + (1 - R0)(1 - cos)^5. The caller clamps cos_vh to [0,1].
inline double fresnel_schlick(double cos_vh, double r0) {
  const double m = 1.0 - cos_vh;
  const double m2 = m * m;
  return r0 + (1.0 - r0) * (m2 * m2 * m);
}

/// K_H * R(max(0, v.h)) * max(0, n.h)^S, unclamped.
inline double specular_intensity(double n_dot_h, double v_dot_h,
                                 const ShadingParams& p) {
  const double nh = n_dot_h > 0.0 ? n_dot_h : 0.0;
  const double vh = v_dot_h > 0.0 ? (v_dot_h < 1.0 ? v_dot_h : 1.0) : 0.0;
  if (nh == 0.0) return 0.0;
  return p.k_h * fresnel_schlick(vh, p.r0) * std::pow(nh, p.shininess);
}

/// Per-pixel highlight intensity H; zero on pixels invalid in either input.
/// With clamp_output the result is clamped to [0,1].
ScalarMap blinn_phong_highlight(const DirectionField& dirs,
                                const GeometryBuffers& geom,
                                const ShadingParams& params,
                                bool clamp_output = true);

/// Deterministic in (ranges.seed, draw_index) only: each draw seeds its own
/// generator, so draws can be evaluated in any order or in parallel.
ShadingParams sample_params(const SamplingRanges& ranges,
                            std::uint64_t draw_index);

}  // namespace hlsynth
