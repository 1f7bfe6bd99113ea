#pragma once

#include <cstdint>

#include "hlsynth/image.hpp"

namespace hlsynth {

enum class LuminanceMode {
  kChannelMean,  // (R + G + B) / 3
  kRec709,       // 0.2126 R + 0.7152 G + 0.0722 B
};

/// sRGB EOTF for a normalized encoded value in [0,1].
double srgb_decode(double encoded);
/// Inverse of srgb_decode.
double srgb_encode(double linear);

LinearImage srgb_to_linear(const EncodedImage& img);

/// Quantizes to the nearest code of the given bit depth after clamping.
EncodedImage linear_to_srgb(const LinearImage& img, int bit_depth = 8);

inline float luminance(float r, float g, float b,
                       LuminanceMode mode = LuminanceMode::kChannelMean) {
  // Summing in double keeps the mean of a gray pixel equal to its level.
  if (mode == LuminanceMode::kRec709) {
    return static_cast<float>(0.2126 * r + 0.7152 * g + 0.0722 * b);
  }
  return static_cast<float>((static_cast<double>(r) + g + b) / 3.0);
}

ScalarMap luminance(const LinearImage& img,
                    LuminanceMode mode = LuminanceMode::kChannelMean);

ScalarMap clamp01(ScalarMap map);
LinearImage clamp01(LinearImage img);

}  // namespace hlsynth
