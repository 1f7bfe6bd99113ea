#include "hlsynth/geometry.hpp"

#include <Eigen/Geometry>
#include <cmath>
#include <optional>
#include <string>

namespace hlsynth {
namespace {

constexpr double kMinLightDistance = 1e-12;
constexpr double kMinHalfNorm = 1e-8;

bool usable(const GeometryBuffers& g, int x, int y) {
  return x >= 0 && y >= 0 && x < g.width() && y < g.height() && g.valid(x, y);
}

// Tangent along one image axis, or nullopt when no neighbor is usable.
std::optional<Vec3> tangent(const GeometryBuffers& g, int x, int y, int dx,
                            int dy) {
  const bool fwd = usable(g, x + dx, y + dy);
  const bool back = usable(g, x - dx, y - dy);
  if (fwd && back) return g.points(x + dx, y + dy) - g.points(x - dx, y - dy);
  if (fwd) return g.points(x + dx, y + dy) - g.points(x, y);
  if (back) return g.points(x, y) - g.points(x - dx, y - dy);
  return std::nullopt;
}

}  // namespace

void CameraIntrinsics::validate(int width, int height) const {
  if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy)) {
    throw Error("intrinsics: focal lengths must be positive and finite");
  }
  if (!(cx >= 0.0 && cx < width && cy >= 0.0 && cy < height)) {
    throw Error("intrinsics: principal point outside the " +
                std::to_string(width) + "x" + std::to_string(height) +
                " frame");
  }
}

GeometryBuffers backproject(const ScalarMap& depth, const CameraIntrinsics& K,
                            const BinaryMask& valid) {
  K.validate(depth.width(), depth.height());
  GeometryBuffers g;
  g.depth = depth;
  g.intrinsics = K;
  g.valid = valid.empty() ? BinaryMask(depth.width(), depth.height(), 1) : valid;
  require_same_shape(depth, g.valid, "backproject");
  g.points = VectorField(depth.width(), depth.height(), Vec3::Zero());
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      if (!g.valid(x, y)) continue;
      const double d = depth(x, y);
      if (!(d > 0.0) || !std::isfinite(d)) {
        throw Error("backproject: non-positive depth at valid pixel (" +
                    std::to_string(x) + "," + std::to_string(y) + ")");
      }
      g.points(x, y) = d * K.ray(x, y);
    }
  }
  return g;
}

NormalEstimate normals_from_depth(const GeometryBuffers& geom) {
  NormalEstimate out{VectorField(geom.width(), geom.height(), Vec3::Zero()),
                     geom.valid};
  for (int y = 0; y < geom.height(); ++y) {
    for (int x = 0; x < geom.width(); ++x) {
      if (!geom.valid(x, y)) continue;
      const auto du = tangent(geom, x, y, 1, 0);
      const auto dv = tangent(geom, x, y, 0, 1);
      if (!du || !dv) {
        out.valid(x, y) = 0;
        continue;
      }
      Vec3 n = du->cross(*dv);
      const double len = n.norm();
      if (!(len > 1e-12 * du->norm() * dv->norm()) || !std::isfinite(len)) {
        out.valid(x, y) = 0;
        continue;
      }
      n /= len;
      if (n.dot(-geom.points(x, y)) < 0.0) n = -n;
      out.normals(x, y) = n;
    }
  }
  return out;
}

NormalEstimate normals_from_depth(const ScalarMap& depth,
                                  const CameraIntrinsics& K) {
  return normals_from_depth(backproject(depth, K));
}

DirectionField direction_field(const GeometryBuffers& geom, const Vec3& light,
                               ViewConvention convention) {
  if (!light.allFinite()) throw Error("direction_field: light is not finite");
  const int w = geom.width();
  const int h = geom.height();
  DirectionField f{VectorField(w, h, Vec3::Zero()), VectorField(w, h, Vec3::Zero()),
                   VectorField(w, h, Vec3::Zero()), geom.valid};
  const double view_sign = convention == ViewConvention::kTowardCamera ? -1.0 : 1.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!geom.valid(x, y)) continue;
      const Vec3& p = geom.points(x, y);
      const Vec3 to_light = light - p;
      const double light_dist = to_light.norm();
      if (!(light_dist > kMinLightDistance)) {
        f.valid(x, y) = 0;
        continue;
      }
      const Vec3 l = to_light / light_dist;
      const Vec3 v = view_sign * p / p.norm();
      const Vec3 sum = l + v;
      const double sum_norm = sum.norm();
      if (!(sum_norm >= kMinHalfNorm)) {
        f.valid(x, y) = 0;
        continue;
      }
      f.view(x, y) = v;
      f.light(x, y) = l;
      f.half(x, y) = sum / sum_norm;
    }
  }
  return f;
}

GeometryBuffers make_geometry(const ScalarMap& depth, const CameraIntrinsics& K,
                              const VectorField& normals,
                              const BinaryMask& valid) {
  GeometryBuffers g = backproject(depth, K, valid);
  if (normals.values().empty()) {
    auto est = normals_from_depth(g);
    g.normals = std::move(est.normals);
    g.valid = std::move(est.valid);
    return g;
  }
  if (normals.width() != depth.width() || normals.height() != depth.height()) {
    throw Error("make_geometry: normal field does not match depth shape");
  }
  g.normals = normals;
  for (int y = 0; y < g.height(); ++y) {
    for (int x = 0; x < g.width(); ++x) {
      if (!g.valid(x, y)) continue;
      Vec3& n = g.normals(x, y);
      const double len = n.norm();
      if (!(len > 1e-12) || !std::isfinite(len)) {
        g.valid(x, y) = 0;
        n.setZero();
      } else {
        n /= len;
      }
    }
  }
  return g;
}

}  // namespace hlsynth
