#pragma once

#include "hlsynth/color.hpp"
#include "hlsynth/image.hpp"

namespace hlsynth {

/// One byte per patch on a ceil(H/p) x ceil(W/p) grid.
using PatchMask = Image<std::uint8_t, 1>;

struct MaskThresholds {
  double tau_l = 0.95;         // dataset-highlight luminance cutoff
  double pixel_thresh = 0.05;  // synthetic H -> binary synthetic highlight
  double patch_thresh = 0.10;  // pooled patch intensity -> patch selection
  int patch_size = 16;
  LuminanceMode luminance = LuminanceMode::kChannelMean;

  void validate() const;
};

struct MaskSet {
  BinaryMask dataset_hl;
  BinaryMask synthetic_hl;
  BinaryMask m_sup;   // trustworthy pixels: not a dataset highlight
  BinaryMask m_hole;  // synthetic or dataset highlight
  PatchMask patch_sup;
  PatchMask patch_hole;
  PatchMask patch_train;  // patch_hole and patch_sup
  int patch_size = 16;
};

/// clamp01(I + K_H * H) per channel, which is the additive alpha blend
/// (1 - H) I + H (I + K_H) collapsed algebraically.
LinearImage composite(const LinearImage& clean, const ScalarMap& highlight,
                      double k_h);

/// Pixels whose luminance strictly exceeds tau_l.
BinaryMask detect_dataset_highlights(
    const LinearImage& img, double tau_l,
    LuminanceMode mode = LuminanceMode::kChannelMean);

/// Area-exact p x p average pooling with zero padding on ragged edges.
Image<double, 1> average_pool(const ScalarMap& map, int patch_size);

MaskSet build_masks(const ScalarMap& synth_highlight,
                    const BinaryMask& dataset_hl,
                    const MaskThresholds& thresholds);

}  // namespace hlsynth
