#pragma once

#include <optional>

#include "hlsynth/color.hpp"
#include "hlsynth/image.hpp"

namespace hlsynth {

/// Identifier written next to every LSR value. The ratio below is our own
/// definition: lower is better and it ignores uniform global dimming.
inline constexpr const char* kLsrDefinition = "lsr_standin_v1";
inline constexpr double kLsrDelta = 1e-6;

struct MetricReport {
  std::optional<double> mse_m;  // empty when no evaluation mask is available
  double psnr = 0.0;            // +inf for identical images
  double ssim = 0.0;
  std::optional<double> lsr;    // empty without a highlighted input
  double mask_coverage = 0.0;
};

/// Mean of (pred - ref)^2 over the mask pixels and channels.
/// Throws on an empty mask.
double mse_masked(const LinearImage& pred, const LinearImage& ref,
                  const BinaryMask& mask);

double mse(const LinearImage& pred, const LinearImage& ref);

/// 10 log10(1 / MSE) with a unit dynamic range; +inf when MSE is 0.
double psnr(const LinearImage& pred, const LinearImage& ref);

/// Canonical windowed SSIM. Throws for images under 11x11.
double ssim(const LinearImage& pred, const LinearImage& ref);

/// Luminance suppression ratio: the highlight region's luminance excess over
/// the background, relative to the background level, in the output divided by
/// the same quantity in the input:
///   out = max(0, E_hl[Y_out] - E_bg[Y_out]) / max(delta, E_bg[Y_out])
///   in  = (E_hl[Y_in] - E_bg[Y_in]) / max(delta, E_bg[Y_in])
///   lsr = out / max(delta, in)
/// with Y the channel mean and E_hl / E_bg means over the mask and its
/// complement. Scaling the output by a constant leaves it unchanged. Throws if
/// either region is empty or the input shows no highlight excess.
double lsr(const LinearImage& input, const LinearImage& output,
           const BinaryMask& hl_mask);

}  // namespace hlsynth
