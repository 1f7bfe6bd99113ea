#pragma once

#include <Eigen/Core>
#include <vector>

#include "hlsynth/image.hpp"

namespace hlsynth {

using Vec3 = Eigen::Vector3d;

/// Dense per-pixel field of arbitrary values, row-major.
template <typename T>
class Field {
 public:
  Field() = default;
  Field(int width, int height, const T& fill = T{})
      : width_(width), height_(height),
        data_(static_cast<std::size_t>(width) * height, fill) {}

  int width() const { return width_; }
  int height() const { return height_; }
  T& operator()(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  const T& operator()(int x, int y) const {
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }
  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using VectorField = Field<Vec3>;

/// Zero-skew pinhole intrinsics in pixels.
struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;

  /// Throws unless fx, fy > 0 and the principal point lies inside the frame.
  void validate(int width, int height) const;
  /// K^-1 (u, v, 1): the ray through pixel (u, v) with unit z.
  Vec3 ray(double u, double v) const {
    return {(u - cx) / fx, (v - cy) / fy, 1.0};
  }
};

struct GeometryBuffers {
  ScalarMap depth;
  VectorField normals;
  VectorField points;
  BinaryMask valid;
  CameraIntrinsics intrinsics;

  int width() const { return depth.width(); }
  int height() const { return depth.height(); }
};

enum class ViewConvention {
  kTowardCamera,  // v = -X / |X|, surface to camera
  kAwayFromCamera,  // v =  X / |X|, camera to surface
};

struct DirectionField {
  VectorField view;
  VectorField light;
  VectorField half;
  BinaryMask valid;
};

/// Camera-space points X = D(u,v) K^-1 (u,v,1). Fills depth, points, valid;
/// normals are left empty. Throws on non-positive or non-finite depth at a
/// valid pixel. An empty `valid` mask means every pixel is valid.
GeometryBuffers backproject(const ScalarMap& depth, const CameraIntrinsics& K,
                            const BinaryMask& valid = {});

/// Normals from the cross product of central-difference tangents of the
/// back-projected points, flipped to face the camera. Falls back to
/// one-sided differences at borders and next to invalid pixels; pixels with
/// no usable tangent or a degenerate cross product become invalid.
/// Returns the normals and the updated validity mask.
struct NormalEstimate {
  VectorField normals;
  BinaryMask valid;
};
NormalEstimate normals_from_depth(const GeometryBuffers& geom);
NormalEstimate normals_from_depth(const ScalarMap& depth,
                                  const CameraIntrinsics& K);

DirectionField direction_field(const GeometryBuffers& geom, const Vec3& light,
                               ViewConvention convention =
                                   ViewConvention::kTowardCamera);

/// Builds complete buffers: back-projection plus the given normals or, when
/// `normals` is empty, depth-gradient normals. Given normals are renormalized;
/// zero-length ones invalidate their pixel.
GeometryBuffers make_geometry(const ScalarMap& depth, const CameraIntrinsics& K,
                              const VectorField& normals = {},
                              const BinaryMask& valid = {});

}  // namespace hlsynth
