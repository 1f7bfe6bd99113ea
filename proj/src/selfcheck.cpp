#include "hlsynth/selfcheck.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "hlsynth/color.hpp"
#include "hlsynth/losses.hpp"
#include "hlsynth/pipeline.hpp"
#include "hlsynth/testkit.hpp"
#include "hlsynth/tokens.hpp"

namespace hlsynth {
namespace {

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t salt) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(salt), static_cast<std::uint32_t>(salt >> 32)};
  return std::mt19937_64(seq);
}

CheckResult below(std::string name, double value, double threshold, std::string detail = {}) {
  return {std::move(name), value < threshold, value, threshold, std::move(detail)};
}

CheckResult zero_violations(std::string name, std::size_t count, std::string detail = {}) {
  return {std::move(name), count == 0, static_cast<double>(count), 0.0, std::move(detail)};
}

SynthesisPair batch_sample(std::uint64_t seed, int i) {
  auto rng = stream(seed, 0x5A3D0000u + static_cast<std::uint64_t>(i));
  const testkit::AnalyticScene scene = testkit::random_scene(rng, 64, 48);
  const LinearImage clean = testkit::add_bright_spots(scene.albedo, rng, 3);
  SamplingRanges ranges;
  ranges.seed = seed;
  MaskThresholds thresholds;
  thresholds.patch_size = 8;
  return synthesize_one(clean, scene.geometry, sample_params(ranges, i), thresholds);
}

TokenGrid random_grid(std::mt19937_64& rng, int hp, int wp, int dim, double p_masked) {
  TokenGrid grid{TokenField(hp, wp, dim), PatchMask(wp, hp, 0)};
  std::normal_distribution<float> normal(0.0f, 1.0f);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (float& v : grid.tokens.values()) v = normal(rng);
  for (auto& m : grid.mask.values()) m = u(rng) < p_masked;
  return grid;
}

template <typename Fn>
CheckResult fd_suite(std::string name, const SelfcheckOptions& opt, std::uint64_t salt,
                     Fn one_instance) {
  auto rng = stream(opt.seed, salt);
  double worst = 0.0;
  std::size_t coords = 0;
  for (int k = 0; k < opt.fd_instances; ++k) {
    const FdCheckResult r = one_instance(rng);
    worst = std::max(worst, r.max_rel_error);
    coords += r.checked;
  }
  std::ostringstream detail;
  detail << opt.fd_instances << " instances, " << coords << " coordinates";
  return below(std::move(name), worst, 1e-4, detail.str());
}

}  // namespace

CheckResult check_oracle_agreement(const SelfcheckOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  auto rng = stream(opt.seed, 0x0AC1E);
  SamplingRanges ranges;
  ranges.seed = opt.seed;
  double worst = 0.0;
  int lit = 0;
  for (int t = 0; t < opt.oracle_triples; ++t) {
    const testkit::AnalyticScene scene = testkit::random_scene(rng, 48, 48);
    const ShadingParams params = sample_params(ranges, static_cast<std::uint64_t>(t));
    const ScalarMap h = blinn_phong_highlight(
        direction_field(scene.geometry, params.light, ViewConvention::kTowardCamera),
        scene.geometry, params);

    // Half the triples look at the brightest pixel so the lobe itself is
    // compared, not only its dark tail.
    std::vector<int> covered;
    for (int i = 0; i < static_cast<int>(h.pixel_count()); ++i) {
      if (scene.geometry.valid.values()[i]) covered.push_back(i);
    }
    int idx = covered[rng() % covered.size()];
    if (t % 2 == 0) {
      const auto vals = h.values();
      idx = static_cast<int>(std::max_element(vals.begin(), vals.end()) - vals.begin());
    }
    const int px = idx % h.width();
    const int py = idx / h.width();
    const double oracle = testkit::brute_force_highlight(scene, params, px, py);
    worst = std::max(worst, std::abs(oracle - h(px, py)));
    if (oracle > 1e-3) ++lit;
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ostringstream detail;
  detail << opt.oracle_triples << " triples (" << lit << " with H > 1e-3) in " << secs << " s";
  CheckResult r = below("oracle_agreement", worst, 1e-6, detail.str());
  r.passed = r.passed && secs < 10.0;
  return r;
}

CheckResult check_fresnel_fixed_points() {
  const float normal = static_cast<float>(fresnel_schlick(1.0, 0.04));
  const float grazing = static_cast<float>(fresnel_schlick(0.0, 0.04));
  const double err = std::max(std::abs(normal - 0.04f), std::abs(grazing - 1.0f));
  return {"fresnel_fixed_points", normal == 0.04f && grazing == 1.0f, err, 0.0,
          "R(1, 0.04) and R(0, 0.04) in f32"};
}

CheckResult check_fd_highlight(const SelfcheckOptions& opt) {
  return fd_suite("fd_highlight_loss", opt, 0xF0001, [](std::mt19937_64& rng) {
    auto inst = testkit::highlight_instance(rng, 6, 6);
    const LossReport rep = highlight_loss(inst.pred, inst.target);
    return fd_check(inst.pred.values(), rep.gradient,
                    [&] { return highlight_loss(inst.pred, inst.target).total; }, 1e-4);
  });
}

CheckResult check_fd_seam(const SelfcheckOptions& opt) {
  return fd_suite("fd_seam_loss", opt, 0xF0002, [](std::mt19937_64& rng) {
    auto inst = testkit::seam_instance(rng, 8, 8);
    const LossReport rep = seam_loss(inst.pred, inst.input, inst.ring, 1.0);
    return fd_check(inst.pred.values(), rep.gradient,
                    [&] { return seam_loss(inst.pred, inst.input, inst.ring, 1.0).total; },
                    1e-4);
  });
}

CheckResult check_fd_spec(const SelfcheckOptions& opt) {
  return fd_suite("fd_spec_penalty", opt, 0xF0003, [](std::mt19937_64& rng) {
    LinearImage img = testkit::spec_instance(rng, 5, 5, 0.85);
    const LossReport rep = spec_penalty(img, 0.85, 1e-6);
    return fd_check(img.values(), rep.gradient,
                    [&] { return spec_penalty(img, 0.85, 1e-6).total; }, 1e-4);
  });
}

CheckResult check_fd_reconstruction(const SelfcheckOptions& opt) {
  return fd_suite("fd_reconstruction_l1", opt, 0xF0004, [](std::mt19937_64& rng) {
    auto inst = testkit::reconstruction_instance(rng, 6, 6);
    const LossReport rep = reconstruction_loss(inst.pred, inst.ref, inst.mask);
    return fd_check(inst.pred.values(), rep.gradient, [&] {
      return reconstruction_loss(inst.pred, inst.ref, inst.mask).terms.at("l1");
    }, 1e-4);
  });
}

CheckResult check_fd_inpainting(const SelfcheckOptions& opt) {
  return fd_suite("fd_inpainting_loss", opt, 0xF0005, [](std::mt19937_64& rng) {
    TokenGrid target = random_grid(rng, 3, 3, 8, 0.0);
    TokenGrid pred = random_grid(rng, 3, 3, 8, 0.0);
    // Keep every |pred - target| clear of the L1 kink.
    for (std::size_t i = 0; i < pred.tokens.values().size(); ++i) {
      float& p = pred.tokens.values()[i];
      const float t = target.tokens.values()[i];
      if (std::abs(p - t) < 1e-2f) p = t + (p >= t ? 0.05f : -0.05f);
    }
    PatchMask train(3, 3, 0);
    for (auto& m : train.values()) m = rng() % 2;
    train(1, 1) = 1;
    const double alpha = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const LossReport rep = inpainting_loss(pred.tokens, target.tokens, train, alpha);
    return fd_check(pred.tokens.values(), rep.gradient, [&] {
      return inpainting_loss(pred.tokens, target.tokens, train, alpha).total;
    }, 1e-3);
  });
}

CheckResult check_composite_batch(const SelfcheckOptions& opt) {
  std::size_t violations = 0;
  // H == 0 must leave the image untouched, bit for bit.
  auto rng = stream(opt.seed, 0xC0);
  const LinearImage base =
      testkit::add_bright_spots(testkit::random_scene(rng, 32, 32).albedo, rng, 4);
  if (!(composite(base, ScalarMap(32, 32, 0.0f), 0.7) == base)) ++violations;

  for (int i = 0; i < opt.batch_samples; ++i) {
    const SynthesisPair pair = batch_sample(opt.seed, i);
    const float k = static_cast<float>(pair.params.k_h);
    for (int y = 0; y < pair.clean.height(); ++y) {
      for (int x = 0; x < pair.clean.width(); ++x) {
        for (int c = 0; c < 3; ++c) {
          const float want = std::clamp(pair.clean(x, y, c) + k * pair.highlight(x, y), 0.0f, 1.0f);
          if (pair.highlighted(x, y, c) != want) ++violations;
        }
      }
    }
  }
  return zero_violations("composite_identities", violations,
                         std::to_string(opt.batch_samples) + " samples");
}

CheckResult check_mask_algebra(const SelfcheckOptions& opt) {
  std::size_t violations = 0;
  std::size_t dataset_pixels = 0;
  for (int i = 0; i < opt.batch_samples; ++i) {
    const MaskSet m = batch_sample(opt.seed, i).masks;
    for (std::size_t p = 0; p < m.dataset_hl.pixel_count(); ++p) {
      const bool d = m.dataset_hl.values()[p];
      const bool s = m.synthetic_hl.values()[p];
      dataset_pixels += d;
      if (static_cast<bool>(m.m_sup.values()[p]) == d) ++violations;
      if (static_cast<bool>(m.m_hole.values()[p]) != (d || s)) ++violations;
    }
    for (std::size_t p = 0; p < m.patch_train.pixel_count(); ++p) {
      const bool want = m.patch_hole.values()[p] && m.patch_sup.values()[p];
      if (static_cast<bool>(m.patch_train.values()[p]) != want) ++violations;
    }
  }
  return zero_violations("mask_algebra", violations,
                         std::to_string(opt.batch_samples) + " samples, " +
                             std::to_string(dataset_pixels) + " dataset-highlight pixels");
}

CheckResult check_render_determinism(const SelfcheckOptions& opt) {
  std::size_t mismatches = 0;
  for (int i = 0; i < std::min(opt.batch_samples, 5); ++i) {
    const SynthesisPair a = batch_sample(opt.seed, i);
    const SynthesisPair b = batch_sample(opt.seed, i);
    mismatches += !(a.highlight == b.highlight);
    mismatches += !(a.highlighted == b.highlighted);
    mismatches += !(a.masks.m_hole == b.masks.m_hole);
    mismatches += !(a.masks.patch_train == b.masks.patch_train);
  }
  return zero_violations("render_determinism", mismatches);
}

CheckResult check_token_pipeline(const SelfcheckOptions& opt) {
  auto rng = stream(opt.seed, 0x70CE);
  InpainterConfig cfg;
  cfg.dim = 16;
  cfg.depth = 2;
  cfg.heads = 4;
  cfg.seed = opt.seed;
  const InpainterWeights weights = InpainterWeights::init(cfg);
  std::size_t violations = 0;

  // Pass-through and determinism.
  const TokenGrid grid = random_grid(rng, 5, 6, cfg.dim, 0.4);
  const InpaintResult a = run_inpainter(grid, weights);
  const InpaintResult b = run_inpainter(grid, weights);
  if (!(a.completed == b.completed)) ++violations;
  for (int i = 0; i < grid.tokens.count(); ++i) {
    if (grid.mask.values()[i]) continue;
    const auto raw = grid.tokens.token(i);
    const auto out = a.completed.token(i);
    if (!std::equal(raw.begin(), raw.end(), out.begin())) ++violations;
  }

  // Lambda endpoints on masked patches.
  const auto& f_mask = weights.mask_token;
  const TokenField s1 = build_seed(grid, a.local_mean, a.positional, f_mask, 1.0);
  const TokenField s0 = build_seed(grid, a.local_mean, a.positional, f_mask, 0.0);
  for (int i = 0; i < grid.tokens.count(); ++i) {
    if (!grid.mask.values()[i]) continue;
    for (int c = 0; c < cfg.dim; ++c) {
      const float e = a.positional.token(i)[c];
      if (s1.token(i)[c] != f_mask[c] + e) ++violations;
      if (s0.token(i)[c] != a.local_mean.token(i)[c] + e) ++violations;
    }
  }

  // Permutation equivariance of the transformer on a 4x4 grid.
  const TokenGrid small = random_grid(rng, 4, 4, cfg.dim, 0.0);
  std::vector<int> perm(16);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  TokenField permuted(4, 4, cfg.dim);
  for (int i = 0; i < 16; ++i) {
    const auto src = small.tokens.token(perm[i]);
    std::copy(src.begin(), src.end(), permuted.token(i).begin());
  }
  const TokenField out = vit_forward(small.tokens, weights);
  const TokenField out_perm = vit_forward(permuted, weights);
  double worst = 0.0;
  for (int i = 0; i < 16; ++i) {
    for (int c = 0; c < cfg.dim; ++c) {
      worst = std::max(worst, static_cast<double>(
                                  std::abs(out_perm.token(i)[c] - out.token(perm[i])[c])));
    }
  }
  CheckResult r{"token_pipeline", violations == 0 && worst < 1e-5, worst, 1e-5, {}};
  r.detail = std::to_string(violations) + " exactness violations; value is the permutation error";
  return r;
}

std::vector<CheckResult> run_selfcheck(const SelfcheckOptions& opt) {
  return {
      check_oracle_agreement(opt),  check_fresnel_fixed_points(),
      check_fd_highlight(opt),      check_fd_seam(opt),
      check_fd_spec(opt),           check_fd_reconstruction(opt),
      check_fd_inpainting(opt),     check_composite_batch(opt),
      check_mask_algebra(opt),      check_render_determinism(opt),
      check_token_pipeline(opt),
  };
}

Json to_json(const std::vector<CheckResult>& results) {
  Json checks = Json::array();
  bool all = true;
  for (const auto& r : results) {
    all = all && r.passed;
    checks.push_back({{"name", r.name},
                      {"passed", r.passed},
                      {"value", r.value},
                      {"threshold", r.threshold},
                      {"detail", r.detail}});
  }
  return {{"passed", all}, {"checks", checks}};
}

}  // namespace hlsynth
