#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <vector>

#include "hlsynth/compositing.hpp"
#include "hlsynth/loss_report.hpp"

namespace hlsynth {

/// hp x wp grid of dim-channel tokens, row-major over patches.
class TokenField {
 public:
  TokenField() = default;
  TokenField(int hp, int wp, int dim, float fill = 0.0f);

  int hp() const { return hp_; }
  int wp() const { return wp_; }
  int dim() const { return dim_; }
  int count() const { return hp_ * wp_; }

  std::span<float> token(int i) {
    return {data_.data() + static_cast<std::size_t>(i) * dim_,
            static_cast<std::size_t>(dim_)};
  }
  std::span<const float> token(int i) const {
    return {data_.data() + static_cast<std::size_t>(i) * dim_,
            static_cast<std::size_t>(dim_)};
  }
  std::span<float> token(int row, int col) { return token(row * wp_ + col); }
  std::span<const float> token(int row, int col) const {
    return token(row * wp_ + col);
  }
  std::span<float> values() { return data_; }
  std::span<const float> values() const { return data_; }

  bool same_shape(const TokenField& o) const {
    return hp_ == o.hp_ && wp_ == o.wp_ && dim_ == o.dim_;
  }
  friend bool operator==(const TokenField&, const TokenField&) = default;

 private:
  int hp_ = 0;
  int wp_ = 0;
  int dim_ = 0;
  std::vector<float> data_;
};

/// Tokens plus the patch mask P (nonzero = to inpaint). The mask is a
/// wp-wide, hp-tall PatchMask so it lines up with the compositing patch grids.
struct TokenGrid {
  TokenField tokens;
  PatchMask mask;

  void validate() const;
};

struct InpainterConfig {
  int dim = 64;
  int depth = 6;
  int heads = 4;
  int ffn_multiplier = 4;
  int neighborhood = 3;  // odd window for the local mean prior
  double lambda = 0.5;   // mask-token vs local-mean blend
  double alpha = 0.25;   // L1 vs cosine weight in the inpainting loss
  std::uint64_t seed = 0;

  void validate() const;
};

struct TransformerLayer {
  Eigen::VectorXf ln1_gamma, ln1_beta;
  Eigen::MatrixXf wq, wk, wv, wo;  // dim x dim, applied as x * W
  Eigen::VectorXf bq, bk, bv, bo;
  Eigen::VectorXf ln2_gamma, ln2_beta;
  Eigen::MatrixXf w1;  // dim x hidden
  Eigen::VectorXf b1;
  Eigen::MatrixXf w2;  // hidden x dim
  Eigen::VectorXf b2;
};

/// Deterministic random initialization; there is no training.
struct InpainterWeights {
  InpainterConfig config;
  std::vector<float> mask_token;
  std::vector<TransformerLayer> layers;

  static InpainterWeights init(const InpainterConfig& config);
};

/// Mean of visible tokens in the k x k window around each patch (center
/// excluded), falling back to the global visible mean, then to zero.
TokenField local_mean_prior(const TokenGrid& grid, int window);

/// 2D sinusoidal encoding: the first dim/2 channels encode the row, the rest
/// the column, each as interleaved (sin, cos) pairs over geometric
/// frequencies 10000^(-2i/(dim/2)).
TokenField positional_encoding(int hp, int wp, int dim);

/// P [lambda f_mask + (1 - lambda) F_mean] + (1 - P) F + E_pos.
TokenField build_seed(const TokenGrid& grid, const TokenField& local_mean,
                      const TokenField& pos, std::span<const float> mask_token,
                      double lambda);

/// Pre-norm transformer stack over the flattened token sequence.
TokenField vit_forward(const TokenField& seed, const InpainterWeights& weights);

/// P refined + (1 - P) raw.
TokenField merge_completed(const TokenGrid& raw, const TokenField& refined);

/// Mean over selected patches of alpha |F* - F|_1 + (1 - alpha)(1 - cos(F*, F)).
/// `gradient` is with respect to `pred`.
LossReport inpainting_loss(const TokenField& pred, const TokenField& target,
                           const PatchMask& patch_train, double alpha);

struct InpaintResult {
  TokenField local_mean;
  TokenField positional;
  TokenField seed;
  TokenField refined;
  TokenField completed;
};

/// prior -> seed -> transformer -> merge. With use_positional false, the
/// positional term is left out of the seed.
InpaintResult run_inpainter(const TokenGrid& grid,
                            const InpainterWeights& weights,
                            bool use_positional = true);

}  // namespace hlsynth
