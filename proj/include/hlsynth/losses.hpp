#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>

#include "hlsynth/image.hpp"
#include "hlsynth/loss_report.hpp"

namespace hlsynth {

/// Training-time loss weights. Highlight and decoder weights default to the
/// published values; lambda_g and seam_radius are our own defaults.
struct LossWeights {
  double w_dice = 0.2;
  double w_l1 = 0.7;
  double w_tv = 0.1;
  double w_seam = 0.25;
  double w_spec = 0.25;
  double w_rgb = 0.5;
  double lambda_g = 1.0;
  double tau_m = 0.85;
  double eps = 1e-6;
  double dice_smooth = 1.0;
  int seam_radius = 1;

  void validate() const;
};

/// Soft Dice + L1 + total variation of the prediction.
/// Terms: "dice", "l1", "tv". Gradient with respect to `pred`.
LossReport highlight_loss(const ScalarMap& pred, const ScalarMap& target,
                          const LossWeights& weights = {});

/// Masked-mean L1 + (1 - masked-mean SSIM). Without a mask every pixel
/// counts. Terms: "l1", "ssim" (the SSIM value). The gradient covers the L1
/// term only. An empty mask yields a zero loss.
LossReport reconstruction_loss(const LinearImage& pred, const LinearImage& ref,
                               const std::optional<BinaryMask>& sup_mask = std::nullopt);

/// dilate(mask) minus mask, dilating with a (2r+1)^2 square.
BinaryMask seam_ring(const BinaryMask& hole, int radius);

/// Ring-averaged |pred - input| plus lambda_g times the ring-averaged
/// |grad pred - grad input| with forward differences. Each term is
/// normalized by the ring size on its own. Terms: "color", "gradient".
LossReport seam_loss(const LinearImage& pred, const LinearImage& input,
                     const BinaryMask& ring, double lambda_g);

/// Charbonnier penalty on brightness above tau_m, averaged over the bright set.
/// Terms: "spec", "bright_pixels".
LossReport spec_penalty(const LinearImage& pred, double tau_m, double eps);

/// w_seam * seam + w_spec * spec + w_rgb * rgb for the decoder fine-tune
/// stage. The seam ring is derived from `hole`; `sup` masks the RGB term.
/// Terms: "seam", "spec", "rgb". The gradient excludes the SSIM part.
LossReport decoder_loss(const LinearImage& pred, const LinearImage& input,
                        const LinearImage& ref, const BinaryMask& hole,
                        const BinaryMask& sup, const LossWeights& weights = {});

struct FdCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  std::size_t checked = 0;
};

/// Compares `analytic` against central differences of `evaluate`, perturbing
/// params[i] in place by +/- step. The quotient divides by the step actually
/// realized in float storage. Relative error is |a - n| / max(|a|, |n|, 1e-6).
/// Indices for which `skip` returns true are left out.
FdCheckResult fd_check(std::span<float> params, std::span<const double> analytic,
                       const std::function<double()>& evaluate, double step,
                       const std::function<bool(std::size_t)>& skip = {});

}  // namespace hlsynth
