#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "hlsynth/losses.hpp"
#include "hlsynth/tokens.hpp"

using namespace hlsynth;

namespace {

TokenGrid random_grid(std::mt19937_64& rng, int hp, int wp, int dim, double p_masked) {
  TokenGrid g{TokenField(hp, wp, dim), PatchMask(wp, hp, 0)};
  std::normal_distribution<float> n(0.0f, 1.0f);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (float& v : g.tokens.values()) v = n(rng);
  for (auto& m : g.mask.values()) m = u(rng) < p_masked;
  return g;
}

InpainterConfig small_config(std::uint64_t seed = 3) {
  InpainterConfig c;
  c.dim = 16;
  c.depth = 2;
  c.heads = 4;
  c.seed = seed;
  return c;
}

}  // namespace

TEST(LocalMean, IdenticalNeighbors) {
  TokenGrid g{TokenField(3, 3, 4, 0.75f), PatchMask(3, 3, 0)};
  g.mask(1, 1) = 1;
  g.tokens.token(1, 1)[0] = 100.0f;
  const TokenField m = local_mean_prior(g, 3);
  for (int c = 0; c < 4; ++c) EXPECT_FLOAT_EQ(m.token(1, 1)[c], 0.75f);
}

TEST(LocalMean, HandComputedThreeByThree) {
  TokenGrid g{TokenField(3, 3, 2), PatchMask(3, 3, 0)};
  for (int i = 0; i < 9; ++i) {
    g.tokens.token(i)[0] = static_cast<float>(i);
    g.tokens.token(i)[1] = static_cast<float>(i * i);
  }
  g.mask(1, 1) = 1;  // center
  g.mask(2, 0) = 1;  // top-right corner, also hidden
  const TokenField m = local_mean_prior(g, 3);
  // Visible neighbors of the center: indices 0,1,3,5,6,7,8.
  const double n = 7.0;
  EXPECT_NEAR(m.token(1, 1)[0], (0 + 1 + 3 + 5 + 6 + 7 + 8) / n, 1e-6);
  EXPECT_NEAR(m.token(1, 1)[1], (0 + 1 + 9 + 25 + 36 + 49 + 64) / n, 1e-5);
}

TEST(LocalMean, FallbackChain) {
  // Isolated hole surrounded by holes: global visible mean.
  TokenGrid g{TokenField(1, 5, 1), PatchMask(5, 1, 1)};
  for (int i = 0; i < 5; ++i) g.tokens.token(i)[0] = static_cast<float>(i);
  g.mask(4, 0) = 0;
  g.mask(3, 0) = 0;
  EXPECT_FLOAT_EQ(local_mean_prior(g, 3).token(0)[0], 3.5f);

  TokenGrid all{TokenField(3, 3, 4, 2.0f), PatchMask(3, 3, 1)};
  const TokenField zero = local_mean_prior(all, 3);
  for (float v : zero.values()) EXPECT_EQ(v, 0.0f);
}

TEST(LocalMean, EvenWindowThrows) {
  TokenGrid g{TokenField(3, 3, 4), PatchMask(3, 3, 0)};
  EXPECT_THROW(local_mean_prior(g, 2), Error);
  EXPECT_THROW(local_mean_prior(g, 1), Error);
}

TEST(PositionalEncoding, OriginSinesZeroCosinesOne) {
  const TokenField e = positional_encoding(4, 4, 16);
  const auto t = e.token(0, 0);
  for (int c = 0; c < 16; c += 2) {
    EXPECT_EQ(t[c], 0.0f);
    EXPECT_EQ(t[c + 1], 1.0f);
  }
}

TEST(PositionalEncoding, RowAndColumnHalves) {
  const TokenField e = positional_encoding(5, 7, 8);
  // Row half depends on the row only, column half on the column only.
  for (int c = 0; c < 4; ++c) EXPECT_EQ(e.token(2, 0)[c], e.token(2, 6)[c]);
  for (int c = 4; c < 8; ++c) EXPECT_EQ(e.token(0, 3)[c], e.token(4, 3)[c]);
  EXPECT_NEAR(e.token(2, 0)[0], std::sin(2.0), 1e-6);
  EXPECT_NEAR(e.token(2, 0)[2], std::sin(2.0 / 100.0), 1e-6);
  EXPECT_NEAR(e.token(0, 3)[5], std::cos(3.0), 1e-6);
}

TEST(PositionalEncoding, DistinctOnEightByEight) {
  const TokenField e = positional_encoding(8, 8, 32);
  EXPECT_EQ(e, positional_encoding(8, 8, 32));
  for (int i = 0; i < 64; ++i) {
    for (int j = i + 1; j < 64; ++j) {
      float linf = 0.0f;
      for (int c = 0; c < 32; ++c) linf = std::max(linf, std::abs(e.token(i)[c] - e.token(j)[c]));
      EXPECT_GT(linf, 1e-6f) << i << " " << j;
    }
  }
}

TEST(PositionalEncoding, DimMustBeMultipleOfFour) {
  EXPECT_THROW(positional_encoding(2, 2, 6), Error);
}

TEST(Seed, LambdaEndpointsAndVisible) {
  std::mt19937_64 rng(1);
  const TokenGrid g = random_grid(rng, 4, 5, 8, 0.5);
  const TokenField mean = local_mean_prior(g, 3);
  const TokenField pos = positional_encoding(4, 5, 8);
  std::vector<float> f_mask(8);
  for (int c = 0; c < 8; ++c) f_mask[c] = 0.1f * c - 0.3f;
  const TokenField s1 = build_seed(g, mean, pos, f_mask, 1.0);
  const TokenField s0 = build_seed(g, mean, pos, f_mask, 0.0);
  const TokenField sh = build_seed(g, mean, pos, f_mask, 0.5);
  for (int i = 0; i < 20; ++i) {
    for (int c = 0; c < 8; ++c) {
      const float e = pos.token(i)[c];
      if (g.mask.values()[i]) {
        EXPECT_EQ(s1.token(i)[c], f_mask[c] + e);
        EXPECT_EQ(s0.token(i)[c], mean.token(i)[c] + e);
        EXPECT_NEAR(sh.token(i)[c], 0.5f * (s0.token(i)[c] + s1.token(i)[c]), 1e-6);
      } else {
        const float want = g.tokens.token(i)[c] + e;
        EXPECT_EQ(s1.token(i)[c], want);
        EXPECT_EQ(s0.token(i)[c], want);
      }
    }
  }
  EXPECT_THROW(build_seed(g, mean, pos, f_mask, 1.5), Error);
  EXPECT_THROW(build_seed(g, mean, positional_encoding(4, 4, 8), f_mask, 0.5), Error);
}

TEST(Vit, ShapeAndDeterminism) {
  const InpainterWeights w = InpainterWeights::init(small_config());
  std::mt19937_64 rng(2);
  for (auto [hp, wp] : {std::pair{1, 1}, {2, 5}, {6, 3}}) {
    const TokenGrid g = random_grid(rng, hp, wp, 16, 0.0);
    const TokenField a = vit_forward(g.tokens, w);
    EXPECT_TRUE(a.same_shape(g.tokens));
    EXPECT_EQ(a, vit_forward(g.tokens, w));
    for (float v : a.values()) EXPECT_TRUE(std::isfinite(v));
  }
  EXPECT_THROW(vit_forward(TokenField(2, 2, 8), w), Error);
}

TEST(Vit, WeightsReproducibleFromSeed) {
  const InpainterWeights a = InpainterWeights::init(small_config(9));
  const InpainterWeights b = InpainterWeights::init(small_config(9));
  const InpainterWeights c = InpainterWeights::init(small_config(10));
  EXPECT_EQ(a.mask_token, b.mask_token);
  EXPECT_TRUE(a.layers[0].wq == b.layers[0].wq);
  EXPECT_FALSE(a.layers[0].wq == c.layers[0].wq);
}

TEST(Vit, PermutationEquivariant) {
  for (const InpainterConfig& cfg : {small_config(), InpainterConfig{}}) {
    const InpainterWeights w = InpainterWeights::init(cfg);
    std::mt19937_64 rng(4);
    for (int t = 0; t < 5; ++t) {
      const TokenGrid g = random_grid(rng, 4, 4, cfg.dim, 0.0);
      std::vector<int> perm(16);
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      TokenField permuted(4, 4, cfg.dim);
      for (int i = 0; i < 16; ++i) {
        std::copy_n(g.tokens.token(perm[i]).begin(), cfg.dim, permuted.token(i).begin());
      }
      const TokenField a = vit_forward(g.tokens, w);
      const TokenField b = vit_forward(permuted, w);
      for (int i = 0; i < 16; ++i) {
        for (int c = 0; c < cfg.dim; ++c) EXPECT_NEAR(b.token(i)[c], a.token(perm[i])[c], 1e-5);
      }
    }
  }
}

TEST(Config, Validation) {
  InpainterConfig c;
  EXPECT_NO_THROW(c.validate());
  c.heads = 5;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.neighborhood = 4;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.depth = 0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.lambda = -0.1;
  EXPECT_THROW(c.validate(), Error);
}

TEST(Merge, Examples) {
  TokenGrid raw{TokenField(2, 2, 1), PatchMask(2, 2, 0)};
  TokenField refined(2, 2, 1);
  for (int i = 0; i < 4; ++i) {
    raw.tokens.token(i)[0] = static_cast<float>(i);
    refined.token(i)[0] = 10.0f + i;
  }
  EXPECT_EQ(merge_completed(raw, refined), raw.tokens);
  raw.mask = PatchMask(2, 2, 1);
  EXPECT_EQ(merge_completed(raw, refined), refined);
  raw.mask(0, 0) = raw.mask(1, 1) = 0;  // checkerboard
  const TokenField m = merge_completed(raw, refined);
  EXPECT_EQ(m.token(0)[0], 0.0f);
  EXPECT_EQ(m.token(1)[0], 11.0f);
  EXPECT_EQ(m.token(2)[0], 12.0f);
  EXPECT_EQ(m.token(3)[0], 3.0f);
}

TEST(Pipeline, VisibleTokensPassThroughAndDeterminism) {
  const InpainterWeights w = InpainterWeights::init(small_config());
  std::mt19937_64 rng(5);
  for (int t = 0; t < 10; ++t) {
    const TokenGrid g = random_grid(rng, 3 + t % 4, 4 + t % 3, 16, 0.4);
    const InpaintResult a = run_inpainter(g, w);
    const InpaintResult b = run_inpainter(g, w);
    EXPECT_EQ(a.completed, b.completed);
    EXPECT_EQ(a.seed, b.seed);
    for (int i = 0; i < g.tokens.count(); ++i) {
      if (g.mask.values()[i]) continue;
      for (int c = 0; c < 16; ++c) EXPECT_EQ(a.completed.token(i)[c], g.tokens.token(i)[c]);
    }
  }
}

TEST(InpaintingLoss, Examples) {
  std::mt19937_64 rng(6);
  const TokenGrid g = random_grid(rng, 3, 3, 8, 0.0);
  const PatchMask all(3, 3, 1);
  EXPECT_NEAR(inpainting_loss(g.tokens, g.tokens, all, 0.25).total, 0.0, 1e-7);

  TokenField t(1, 2, 3), p(1, 2, 3);
  t.token(0)[0] = 1.0f;
  t.token(1)[2] = 1.0f;
  p.token(0)[0] = -1.0f;
  p.token(1)[2] = -1.0f;
  EXPECT_NEAR(inpainting_loss(p, t, PatchMask(2, 1, 1), 0.0).total, 2.0, 1e-7);

  const LossReport empty = inpainting_loss(p, t, PatchMask(2, 1, 0), 0.5);
  EXPECT_EQ(empty.total, 0.0);
  for (double v : empty.gradient) EXPECT_EQ(v, 0.0);
}

TEST(InpaintingLoss, BoundsAndGradient) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 20; ++t) {
    const TokenGrid target = random_grid(rng, 3, 3, 8, 0.0);
    TokenGrid pred = random_grid(rng, 3, 3, 8, 0.0);
    for (std::size_t i = 0; i < pred.tokens.values().size(); ++i) {
      float& v = pred.tokens.values()[i];
      const float tv = target.tokens.values()[i];
      if (std::abs(v - tv) < 1e-2f) v = tv + 0.05f;
    }
    PatchMask train(3, 3, 0);
    for (auto& m : train.values()) m = rng() % 2;
    train(0, 0) = 1;
    const double alpha = (rng() % 1000) / 999.0;
    const LossReport r = inpainting_loss(pred.tokens, target.tokens, train, alpha);
    EXPECT_GE(r.total, 0.0);
    EXPECT_GE(r.terms.at("cosine"), 0.0);
    EXPECT_LE(r.terms.at("cosine"), 2.0);
    const FdCheckResult fd = fd_check(pred.tokens.values(), r.gradient, [&] {
      return inpainting_loss(pred.tokens, target.tokens, train, alpha).total;
    }, 1e-3);
    EXPECT_LT(fd.max_rel_error, 1e-4);
  }
}
