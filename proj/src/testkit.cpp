#include "hlsynth/testkit.hpp"

#include <algorithm>
#include <cmath>

namespace hlsynth::testkit {
namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

// Shared tail: back-project the rasterized depth and attach analytic normals.
void finish_scene(AnalyticScene& s, const ScalarMap& depth, const BinaryMask& valid) {
  s.geometry = backproject(depth, s.intrinsics, valid);
  s.geometry.normals = VectorField(depth.width(), depth.height(), Vec3::Zero());
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      if (!valid(x, y)) continue;
      const Vec3& p = s.geometry.points(x, y);
      const auto n = s.normal_at(p.x(), p.y(), p.z());
      s.geometry.normals(x, y) = Vec3(n[0], n[1], n[2]);
    }
  }
}

AnalyticScene plane_common(SceneKind kind, const std::array<double, 3>& point,
                           const std::array<double, 3>& normal,
                           const CameraIntrinsics& K, int width, int height) {
  K.validate(width, height);
  const double len = std::sqrt(normal[0] * normal[0] + normal[1] * normal[1] +
                               normal[2] * normal[2]);
  if (!(len > 0.0)) throw Error("plane scene: zero normal");
  AnalyticScene s;
  s.kind = kind;
  s.intrinsics = K;
  s.plane_normal = {normal[0] / len, normal[1] / len, normal[2] / len};
  s.plane_offset = s.plane_normal[0] * point[0] + s.plane_normal[1] * point[1] +
                   s.plane_normal[2] * point[2];
  // Facing the camera means n . (0 - X) > 0, i.e. offset < 0.
  if (s.plane_offset > 0.0) {
    for (double& c : s.plane_normal) c = -c;
    s.plane_offset = -s.plane_offset;
  }
  if (!(s.plane_offset < 0.0)) throw Error("plane scene: plane passes through the camera");

  ScalarMap depth(width, height, 0.0f);
  BinaryMask valid(width, height, 0);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double rx = (x - K.cx) / K.fx;
      const double ry = (y - K.cy) / K.fy;
      const double denom = s.plane_normal[0] * rx + s.plane_normal[1] * ry + s.plane_normal[2];
      if (denom == 0.0) continue;
      const double t = s.plane_offset / denom;
      if (!(t > 1e-3) || !std::isfinite(t)) continue;
      depth(x, y) = static_cast<float>(t);
      valid(x, y) = 1;
    }
  }
  finish_scene(s, depth, valid);
  s.albedo = LinearImage(width, height, 0.5f);
  return s;
}

}  // namespace

std::array<double, 3> AnalyticScene::normal_at(double x, double y, double z) const {
  if (kind == SceneKind::kSphere) {
    const double dx = x - center[0];
    const double dy = y - center[1];
    const double dz = z - center[2];
    const double len = std::sqrt(dx * dx + dy * dy + dz * dz);
    return {dx / len, dy / len, dz / len};
  }
  return plane_normal;
}

AnalyticScene make_sphere_scene(double radius, const std::array<double, 3>& center,
                                const CameraIntrinsics& K, int width, int height) {
  K.validate(width, height);
  if (!(radius > 0.0)) throw Error("sphere scene: radius must be positive");
  if (!(center[2] - radius > 0.0)) {
    throw Error("sphere scene: sphere is not fully in front of the camera");
  }
  AnalyticScene s;
  s.kind = SceneKind::kSphere;
  s.intrinsics = K;
  s.center = center;
  s.radius = radius;

  const double cc = center[0] * center[0] + center[1] * center[1] + center[2] * center[2];
  ScalarMap depth(width, height, 0.0f);
  BinaryMask valid(width, height, 0);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double rx = (x - K.cx) / K.fx;
      const double ry = (y - K.cy) / K.fy;
      const double rr = rx * rx + ry * ry + 1.0;
      const double rc = rx * center[0] + ry * center[1] + center[2];
      const double disc = rc * rc - rr * (cc - radius * radius);
      if (!(disc > 0.0)) continue;
      // Nearer root; the ray has unit z so t is the depth.
      const double t = (rc - std::sqrt(disc)) / rr;
      depth(x, y) = static_cast<float>(t);
      valid(x, y) = 1;
    }
  }
  finish_scene(s, depth, valid);
  s.albedo = LinearImage(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const float g = valid(x, y) ? 0.6f : 0.15f;
      s.albedo(x, y, 0) = g;
      s.albedo(x, y, 1) = 0.8f * g;
      s.albedo(x, y, 2) = 0.7f * g;
    }
  }
  return s;
}

AnalyticScene make_plane_scene(const std::array<double, 3>& point,
                               const std::array<double, 3>& normal,
                               const CameraIntrinsics& K, int width, int height) {
  return plane_common(SceneKind::kPlane, point, normal, K, width, height);
}

AnalyticScene make_checkerboard_scene(const std::array<double, 3>& point,
                                      const std::array<double, 3>& normal,
                                      const CameraIntrinsics& K, int width,
                                      int height, int cell) {
  if (cell < 1) throw Error("checkerboard scene: cell must be >= 1");
  AnalyticScene s = plane_common(SceneKind::kCheckerboard, point, normal, K, width, height);
  s.checker_cell = cell;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const float g = ((x / cell + y / cell) % 2 == 0) ? 0.2f : 0.8f;
      for (int c = 0; c < 3; ++c) s.albedo(x, y, c) = g;
    }
  }
  return s;
}

AnalyticScene random_scene(std::mt19937_64& rng, int width, int height) {
  CameraIntrinsics K;
  K.fx = uniform(rng, 0.8, 1.2) * width;
  K.fy = K.fx * uniform(rng, 0.95, 1.05);
  K.cx = width * uniform(rng, 0.4, 0.6);
  K.cy = height * uniform(rng, 0.4, 0.6);
  const int kind = static_cast<int>(rng() % 3);
  if (kind == 0) {
    const double radius = uniform(rng, 0.2, 0.6);
    const std::array<double, 3> center{uniform(rng, -0.2, 0.2), uniform(rng, -0.2, 0.2),
                                       uniform(rng, radius + 0.5, radius + 2.0)};
    return make_sphere_scene(radius, center, K, width, height);
  }
  const std::array<double, 3> point{0.0, 0.0, uniform(rng, 0.8, 3.0)};
  const std::array<double, 3> normal{uniform(rng, -0.6, 0.6), uniform(rng, -0.6, 0.6), -1.0};
  if (kind == 1) return make_plane_scene(point, normal, K, width, height);
  return make_checkerboard_scene(point, normal, K, width, height,
                                 4 + static_cast<int>(rng() % 8));
}

double brute_force_highlight(const AnalyticScene& scene, const ShadingParams& params,
                             int px, int py, ViewConvention convention) {
  if (!scene.geometry.valid(px, py)) return 0.0;
  const CameraIntrinsics& K = scene.intrinsics;
  const double d = scene.geometry.depth(px, py);
  const double X = d * ((px - K.cx) / K.fx);
  const double Y = d * ((py - K.cy) / K.fy);
  const double Z = d;
  const auto n = scene.normal_at(X, Y, Z);

  const double xlen = std::sqrt(X * X + Y * Y + Z * Z);
  const double vs = convention == ViewConvention::kTowardCamera ? -1.0 : 1.0;
  const double vx = vs * X / xlen;
  const double vy = vs * Y / xlen;
  const double vz = vs * Z / xlen;

  const double lx0 = params.light[0] - X;
  const double ly0 = params.light[1] - Y;
  const double lz0 = params.light[2] - Z;
  const double llen = std::sqrt(lx0 * lx0 + ly0 * ly0 + lz0 * lz0);
  if (!(llen > 1e-12)) return 0.0;
  const double lx = lx0 / llen;
  const double ly = ly0 / llen;
  const double lz = lz0 / llen;

  const double sx = lx + vx;
  const double sy = ly + vy;
  const double sz = lz + vz;
  const double slen = std::sqrt(sx * sx + sy * sy + sz * sz);
  if (!(slen >= 1e-8)) return 0.0;
  const double hx = sx / slen;
  const double hy = sy / slen;
  const double hz = sz / slen;

  double n_dot_h = n[0] * hx + n[1] * hy + n[2] * hz;
  double v_dot_h = vx * hx + vy * hy + vz * hz;
  if (n_dot_h < 0.0) n_dot_h = 0.0;
  if (v_dot_h < 0.0) v_dot_h = 0.0;
  if (v_dot_h > 1.0) v_dot_h = 1.0;
  const double fresnel = params.r0 + (1.0 - params.r0) * std::pow(1.0 - v_dot_h, 5.0);
  double value = params.k_h * fresnel * std::pow(n_dot_h, params.shininess);
  if (value < 0.0) value = 0.0;
  if (value > 1.0) value = 1.0;
  return value;
}

}  // namespace hlsynth::testkit

namespace hlsynth::testkit {
namespace {

// Draws in [lo, hi] until `ok` accepts the value.
template <typename Pred>
float draw_until(std::mt19937_64& rng, double lo, double hi, Pred ok) {
  for (;;) {
    const float v = static_cast<float>(uniform(rng, lo, hi));
    if (ok(v)) return v;
  }
}

}  // namespace

HighlightInstance highlight_instance(std::mt19937_64& rng, int width, int height,
                                     double margin) {
  HighlightInstance inst{ScalarMap(width, height), ScalarMap(width, height)};
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      inst.target(x, y) = static_cast<float>(uniform(rng, 0.0, 1.0));
      inst.pred(x, y) = draw_until(rng, 0.05, 0.95, [&](float v) {
        if (std::abs(v - inst.target(x, y)) < margin) return false;
        if (x > 0 && std::abs(v - inst.pred(x - 1, y)) < margin) return false;
        if (y > 0 && std::abs(v - inst.pred(x, y - 1)) < margin) return false;
        return true;
      });
    }
  }
  return inst;
}

SeamInstance seam_instance(std::mt19937_64& rng, int width, int height, double margin) {
  SeamInstance inst{LinearImage(width, height), LinearImage(width, height),
                    BinaryMask(width, height, 0)};
  BinaryMask hole(width, height, 0);
  const double cx = uniform(rng, 0.3, 0.7) * width;
  const double cy = uniform(rng, 0.3, 0.7) * height;
  const double r = uniform(rng, 0.15, 0.3) * std::min(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      hole(x, y) = (x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r;
    }
  }
  if (count_set(hole) == 0) hole(width / 2, height / 2) = 1;
  inst.ring = seam_ring(hole, 1);

  // Offsets d = pred - input, kept away from 0 and from their right/down
  // neighbors' offsets (the gradient-difference kinks).
  Image<float, 3> offset(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < 3; ++c) {
        offset(x, y, c) = draw_until(rng, -0.1, 0.1, [&](float v) {
          if (std::abs(v) < margin) return false;
          if (x > 0 && std::abs(v - offset(x - 1, y, c)) < margin) return false;
          if (y > 0 && std::abs(v - offset(x, y - 1, c)) < margin) return false;
          return true;
        });
        inst.input(x, y, c) = static_cast<float>(uniform(rng, 0.2, 0.8));
        inst.pred(x, y, c) = inst.input(x, y, c) + offset(x, y, c);
      }
    }
  }
  // Recompute exact float offsets: pred - input may round differently than
  // the drawn offsets, so re-check the margins on realized values.
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < 3; ++c) {
        const double d = static_cast<double>(inst.pred(x, y, c)) - inst.input(x, y, c);
        if (std::abs(d) < 0.5 * margin) {
          throw Error("seam_instance: offset collapsed below margin");
        }
      }
    }
  }
  return inst;
}

LinearImage spec_instance(std::mt19937_64& rng, int width, int height, double tau_m,
                          double margin) {
  LinearImage img(width, height);
  bool any_bright = false;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (;;) {
        const bool bright = !any_bright || uniform(rng, 0.0, 1.0) < 0.5;
        const double lo = bright ? tau_m - 0.05 : 0.0;
        for (int c = 0; c < 3; ++c) img(x, y, c) = static_cast<float>(uniform(rng, lo, 1.0));
        const double b = (static_cast<double>(img(x, y, 0)) + img(x, y, 1) + img(x, y, 2)) / 3.0;
        if (std::abs(b - tau_m) < margin) continue;
        any_bright = any_bright || b > tau_m;
        break;
      }
    }
  }
  return img;
}

ReconstructionInstance reconstruction_instance(std::mt19937_64& rng, int width,
                                               int height, double margin) {
  ReconstructionInstance inst{LinearImage(width, height), LinearImage(width, height),
                              BinaryMask(width, height, 0)};
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      inst.mask(x, y) = uniform(rng, 0.0, 1.0) < 0.75;
      for (int c = 0; c < 3; ++c) {
        inst.ref(x, y, c) = static_cast<float>(uniform(rng, 0.0, 1.0));
        inst.pred(x, y, c) = draw_until(rng, 0.0, 1.0, [&](float v) {
          return std::abs(v - inst.ref(x, y, c)) >= margin;
        });
      }
    }
  }
  inst.mask(0, 0) = 1;
  return inst;
}

}  // namespace hlsynth::testkit

namespace hlsynth::testkit {

LinearImage add_bright_spots(const LinearImage& base, std::mt19937_64& rng, int count) {
  LinearImage out = base;
  const int w = base.width();
  const int h = base.height();
  for (int k = 0; k < count; ++k) {
    const int side = 2 + static_cast<int>(rng() % 6);
    const int x0 = static_cast<int>(rng() % static_cast<std::uint64_t>(w));
    const int y0 = static_cast<int>(rng() % static_cast<std::uint64_t>(h));
    const float level = static_cast<float>(uniform(rng, 0.96, 1.0));
    for (int y = y0; y < std::min(h, y0 + side); ++y) {
      for (int x = x0; x < std::min(w, x0 + side); ++x) {
        for (int c = 0; c < 3; ++c) out(x, y, c) = level;
      }
    }
  }
  return out;
}

}  // namespace hlsynth::testkit
