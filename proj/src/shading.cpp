#include "hlsynth/shading.hpp"

#include <cmath>
#include <random>

namespace hlsynth {
namespace {

void check_range(const Range& r, const char* name) {
  if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || r.lo > r.hi) {
    throw Error(std::string("sampling range ") + name + " must satisfy lo <= hi");
  }
}

// 53 high bits of a 64-bit word mapped to [0,1).
double unit_interval(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

double lerp(const Range& r, double u) { return r.lo + (r.hi - r.lo) * u; }

}  // namespace

void ShadingParams::validate() const {
  if (!(r0 >= 0.0 && r0 <= 1.0)) throw Error("R0 must lie in [0,1]");
  if (!(k_h > 0.0) || !std::isfinite(k_h)) throw Error("K_H must be positive");
  if (!(shininess > 0.0) || !std::isfinite(shininess)) {
    throw Error("shininess must be positive");
  }
  if (!light.allFinite()) throw Error("light position must be finite");
}

void SamplingRanges::validate() const {
  check_range(k_h, "k_h");
  check_range(shininess, "shininess");
  if (!(k_h.lo > 0.0)) throw Error("k_h range must be positive");
  if (!(shininess.lo > 0.0)) throw Error("shininess range must be positive");
  for (int i = 0; i < 3; ++i) {
    check_range({light_min[i], light_max[i]}, "light_box");
  }
  if (!(r0 >= 0.0 && r0 <= 1.0)) throw Error("R0 must lie in [0,1]");
}

ScalarMap blinn_phong_highlight(const DirectionField& dirs,
                                const GeometryBuffers& geom,
                                const ShadingParams& params,
                                bool clamp_output) {
  params.validate();
  const int w = geom.width();
  const int h = geom.height();
  if (dirs.valid.width() != w || dirs.valid.height() != h) {
    throw Error("blinn_phong_highlight: direction field does not match geometry");
  }
  ScalarMap out(w, h, 0.0f);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!dirs.valid(x, y) || !geom.valid(x, y)) continue;
      const Vec3& half = dirs.half(x, y);
      double value = specular_intensity(geom.normals(x, y).dot(half),
                                        dirs.view(x, y).dot(half), params);
      if (clamp_output) value = std::clamp(value, 0.0, 1.0);
      out(x, y) = static_cast<float>(value);
    }
  }
  return out;
}

ShadingParams sample_params(const SamplingRanges& ranges,
                            std::uint64_t draw_index) {
  ranges.validate();
  std::seed_seq seq{
      static_cast<std::uint32_t>(ranges.seed),
      static_cast<std::uint32_t>(ranges.seed >> 32),
      static_cast<std::uint32_t>(draw_index),
      static_cast<std::uint32_t>(draw_index >> 32)};
  std::mt19937_64 gen(seq);

  ShadingParams p;
  p.r0 = ranges.r0;
  p.k_h = lerp(ranges.k_h, unit_interval(gen()));
  p.shininess = lerp(ranges.shininess, unit_interval(gen()));
  for (int i = 0; i < 3; ++i) {
    p.light[i] = lerp({ranges.light_min[i], ranges.light_max[i]},
                      unit_interval(gen()));
  }
  return p;
}

}  // namespace hlsynth
