#pragma once

#include "hlsynth/image.hpp"

namespace hlsynth {

// Gaussian window 11x11, sigma 1.5, K1 = 0.01, K2 = 0.03, dynamic range 1.
inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimC1 = 0.01 * 0.01;
inline constexpr double kSsimC2 = 0.03 * 0.03;

/// Standard SSIM over all window positions fully inside the image, averaged
/// over the map and the three channels. Throws for images under 11x11.
double ssim_valid(const LinearImage& a, const LinearImage& b);

/// SSIM map averaged over the pixels of `mask`. Each local window uses the
/// Gaussian weights restricted to in-frame mask pixels and renormalized, so
/// pixels outside the mask never influence the result. Works at any size.
/// Returns 1 for an empty mask.
double ssim_masked(const LinearImage& a, const LinearImage& b,
                   const BinaryMask& mask);

}  // namespace hlsynth
