#include "hlsynth/color.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace hlsynth {

std::size_t count_set(const BinaryMask& mask) {
  return static_cast<std::size_t>(
      std::count_if(mask.values().begin(), mask.values().end(),
                    [](std::uint8_t v) { return v != 0; }));
}

void require_unit_range(const LinearImage& img, const char* what) {
  for (float v : img.values()) {
    if (!std::isfinite(v) || v < 0.0f || v > 1.0f) {
      throw Error(std::string(what) + ": channel value outside [0,1]");
    }
  }
}

double srgb_decode(double encoded) {
  if (encoded <= 0.04045) return encoded / 12.92;
  return std::pow((encoded + 0.055) / 1.055, 2.4);
}

double srgb_encode(double linear) {
  if (linear <= 0.0031308) return 12.92 * linear;
  return 1.055 * std::pow(linear, 1.0 / 2.4) - 0.055;
}

LinearImage srgb_to_linear(const EncodedImage& img) {
  if (img.bit_depth != 8 && img.bit_depth != 16) {
    throw Error("srgb_to_linear: unsupported bit depth " +
                std::to_string(img.bit_depth));
  }
  const std::uint32_t max_code = img.max_code();
  std::vector<float> lut(max_code + 1);
  for (std::uint32_t code = 0; code <= max_code; ++code) {
    lut[code] = static_cast<float>(
        srgb_decode(static_cast<double>(code) / max_code));
  }
  LinearImage out(img.width, img.height);
  auto dst = out.values();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] = lut[std::min<std::uint32_t>(img.codes[i], max_code)];
  }
  return out;
}

EncodedImage linear_to_srgb(const LinearImage& img, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) {
    throw Error("linear_to_srgb: unsupported bit depth " +
                std::to_string(bit_depth));
  }
  EncodedImage out;
  out.width = img.width();
  out.height = img.height();
  out.bit_depth = bit_depth;
  const double max_code = out.max_code();
  out.codes.resize(img.values().size());
  auto src = img.values();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double lin = std::clamp(static_cast<double>(src[i]), 0.0, 1.0);
    out.codes[i] =
        static_cast<std::uint16_t>(std::lround(srgb_encode(lin) * max_code));
  }
  return out;
}

ScalarMap luminance(const LinearImage& img, LuminanceMode mode) {
  ScalarMap out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      out(x, y) = luminance(img(x, y, 0), img(x, y, 1), img(x, y, 2), mode);
    }
  }
  return out;
}

ScalarMap clamp01(ScalarMap map) {
  for (float& v : map.values()) v = std::clamp(v, 0.0f, 1.0f);
  return map;
}

LinearImage clamp01(LinearImage img) {
  for (float& v : img.values()) v = std::clamp(v, 0.0f, 1.0f);
  return img;
}

}  // namespace hlsynth
