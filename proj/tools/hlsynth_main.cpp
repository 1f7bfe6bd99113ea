// hlsynth command-line front end.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>

#include "hlsynth/color.hpp"
#include "hlsynth/config.hpp"
#include "hlsynth/io.hpp"
#include "hlsynth/metrics.hpp"
#include "hlsynth/pipeline.hpp"
#include "hlsynth/selfcheck.hpp"
#include "hlsynth/tokens.hpp"

namespace fs = std::filesystem;
using namespace hlsynth;

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  int workers = 1;
  std::string config_path;

  Config config() const {
    Config c = config_path.empty() ? Config{} : load_config(config_path);
    if (seed) {
      c.sampling.seed = *seed;
      c.inpainter.seed = *seed;
    }
    c.validate();
    return c;
  }
};

Json number_or_inf(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

// --- render -----------------------------------------------------------------

struct RenderArgs {
  std::string rgb, depth, normals, out, stem = "render";
  std::vector<double> intrinsics;
  double kh = 0.0, shininess = 0.0, r0 = kDefaultR0;
  std::vector<double> light;
};

int cmd_render(const Globals& g, const RenderArgs& a) {
  const Config cfg = g.config();
  SceneInput in;
  in.id = a.stem;
  in.rgb = a.rgb;
  in.depth = a.depth;
  if (!a.normals.empty()) in.normals = a.normals;
  if (!a.intrinsics.empty()) {
    in.intrinsics = CameraIntrinsics{a.intrinsics[0], a.intrinsics[1], a.intrinsics[2],
                                     a.intrinsics[3]};
  }
  const LoadedScene scene = load_scene(in, cfg);
  ShadingParams p;
  p.r0 = a.r0;
  p.k_h = a.kh;
  p.shininess = a.shininess;
  p.light = Vec3(a.light[0], a.light[1], a.light[2]);
  const SynthesisPair pair = synthesize_one(scene.clean, scene.geometry, p, cfg.masks, cfg.view);
  fs::create_directories(a.out);
  const auto files = write_sample(pair, a.out, a.stem, cfg.png_bit_depth);
  write_json(fs::path(a.out) / (a.stem + ".json"),
             {{"tool", kToolName},
              {"version", kToolVersion},
              {"params", to_json(p)},
              {"files", files},
              {"stats", mask_stats(pair.masks)}});
  return 0;
}

// --- masks ------------------------------------------------------------------

int cmd_masks(const Globals& g, const std::string& rgb, const std::string& highlight,
              const std::string& out) {
  const Config cfg = g.config();
  const LinearImage clean = srgb_to_linear(io::read_png(rgb));
  const ScalarMap h = io::scalar_map_from_tensor(io::read_tensor(highlight));
  const MaskSet m = build_masks(
      h, detect_dataset_highlights(clean, cfg.masks.tau_l, cfg.masks.luminance), cfg.masks);
  const fs::path dir(out);
  fs::create_directories(dir);
  io::write_mask_png(dir / "dataset_hl.png", m.dataset_hl);
  io::write_mask_png(dir / "synthetic_hl.png", m.synthetic_hl);
  io::write_mask_png(dir / "m_sup.png", m.m_sup);
  io::write_mask_png(dir / "m_hole.png", m.m_hole);
  io::write_tensor(dir / "patches.urtd", patch_tensor(m));
  write_json(dir / "masks.json", mask_stats(m));
  return 0;
}

// --- inpaint-demo -----------------------------------------------------------

struct InpaintArgs {
  std::string tokens, mask, out;
  int hp = 8, wp = 8;
  double mask_fraction = 0.3;
};

int cmd_inpaint(const Globals& g, const InpaintArgs& a) {
  const Config cfg = g.config();
  const InpainterWeights weights = InpainterWeights::init(cfg.inpainter);
  const int dim = cfg.inpainter.dim;
  std::mt19937_64 rng(cfg.inpainter.seed ^ 0xD3E0ull);

  TokenGrid grid;
  if (!a.tokens.empty()) {
    const io::Tensor t = io::read_tensor(a.tokens);
    if (t.dims.size() != 3 || static_cast<int>(t.dims[2]) != dim) {
      throw Error("tokens tensor must be hp x wp x " + std::to_string(dim));
    }
    grid.tokens = TokenField(static_cast<int>(t.dims[0]), static_cast<int>(t.dims[1]), dim);
    std::copy(t.data.begin(), t.data.end(), grid.tokens.values().begin());
  } else {
    grid.tokens = TokenField(a.hp, a.wp, dim);
    std::normal_distribution<float> normal(0.0f, 1.0f);
    for (float& v : grid.tokens.values()) v = normal(rng);
  }
  grid.mask = PatchMask(grid.tokens.wp(), grid.tokens.hp(), 0);
  if (!a.mask.empty()) {
    const ScalarMap m = io::scalar_map_from_tensor(io::read_tensor(a.mask));
    if (m.width() != grid.mask.width() || m.height() != grid.mask.height()) {
      throw Error("mask tensor must be hp x wp");
    }
    for (std::size_t i = 0; i < m.pixel_count(); ++i) grid.mask.values()[i] = m.values()[i] > 0.5f;
  } else {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto& v : grid.mask.values()) v = u(rng) < a.mask_fraction;
  }

  const InpaintResult r = run_inpainter(grid, weights);
  const LossReport loss =
      inpainting_loss(r.completed, grid.tokens, grid.mask, cfg.inpainter.alpha);

  auto field_tensor = [](const TokenField& f) {
    io::Tensor t;
    t.dims = {static_cast<std::uint32_t>(f.hp()), static_cast<std::uint32_t>(f.wp()),
              static_cast<std::uint32_t>(f.dim())};
    t.data.assign(f.values().begin(), f.values().end());
    return t;
  };
  const fs::path dir(a.out);
  fs::create_directories(dir);
  io::write_tensor(dir / "f_seed.urtd", field_tensor(r.seed));
  io::write_tensor(dir / "f_comp.urtd", field_tensor(r.completed));
  Json report = to_json(loss);
  report.erase("gradient");
  report["masked_patches"] = count_set(grid.mask);
  write_json(dir / "loss.json", report);
  std::cout << "loss " << loss.total << '\n';
  return 0;
}

// --- eval -------------------------------------------------------------------

struct EvalArgs {
  std::string pred, ref, mask, input, out;
};

int cmd_eval(const EvalArgs& a) {
  std::vector<fs::path> names;
  for (const auto& e : fs::directory_iterator(a.pred)) {
    if (e.is_regular_file() && e.path().extension() == ".png") names.push_back(e.path().filename());
  }
  std::sort(names.begin(), names.end());
  if (names.empty()) throw Error("eval: no PNG files in " + a.pred);

  Json per_image = Json::array();
  double sum_psnr = 0.0, sum_ssim = 0.0, sum_mse = 0.0, sum_lsr = 0.0;
  int n_mse = 0, n_lsr = 0, failures = 0;
  bool psnr_inf = false;
  for (const auto& name : names) {
    Json rec{{"image", name.string()}};
    try {
      const LinearImage pred = srgb_to_linear(io::read_png(fs::path(a.pred) / name));
      const LinearImage ref = srgb_to_linear(io::read_png(fs::path(a.ref) / name));
      const double p = psnr(pred, ref);
      const double s = ssim(pred, ref);
      rec["psnr"] = number_or_inf(p);
      rec["ssim"] = s;
      std::optional<BinaryMask> mask;
      if (!a.mask.empty()) {
        mask = io::read_mask_png(fs::path(a.mask) / name);
        rec["mask_coverage"] =
            static_cast<double>(count_set(*mask)) / static_cast<double>(mask->pixel_count());
        if (count_set(*mask) > 0) {
          const double m = mse_masked(pred, ref, *mask);
          rec["mse_m"] = m;
          sum_mse += m;
          ++n_mse;
        }
      }
      if (!a.input.empty() && mask) {
        const LinearImage input = srgb_to_linear(io::read_png(fs::path(a.input) / name));
        try {
          const double l = lsr(input, pred, *mask);
          rec["lsr"] = l;
          sum_lsr += l;
          ++n_lsr;
        } catch (const std::exception& e) {
          rec["lsr"] = nullptr;
          rec["lsr_error"] = e.what();
        }
      }
      psnr_inf = psnr_inf || std::isinf(p);
      sum_psnr += std::isinf(p) ? 0.0 : p;
      sum_ssim += s;
    } catch (const std::exception& e) {
      rec["error"] = e.what();
      ++failures;
    }
    per_image.push_back(std::move(rec));
  }
  const int ok = static_cast<int>(names.size()) - failures;
  Json mean;
  if (ok > 0) {
    mean["psnr"] = psnr_inf ? Json("inf") : Json(sum_psnr / ok);
    mean["ssim"] = sum_ssim / ok;
  }
  if (n_mse > 0) mean["mse_m"] = sum_mse / n_mse;
  if (n_lsr > 0) mean["lsr"] = sum_lsr / n_lsr;
  write_json(a.out, {{"tool", kToolName},
                     {"version", kToolVersion},
                     {"lsr_definition", kLsrDefinition},
                     {"images", per_image},
                     {"mean", mean},
                     {"failures", failures}});
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic specular highlight generation and evaluation"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Override the RNG seed");
  app.add_option("--workers", g.workers, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--config", g.config_path, "JSON config file")->check(CLI::ExistingFile);

  RenderArgs ra;
  auto* render = app.add_subcommand("render", "Render one highlight with explicit parameters");
  render->add_option("--rgb", ra.rgb, "sRGB PNG")->required()->check(CLI::ExistingFile);
  render->add_option("--depth", ra.depth, "Depth PFM")->required()->check(CLI::ExistingFile);
  render->add_option("--normals", ra.normals, "HxWx3 normals tensor")->check(CLI::ExistingFile);
  render->add_option("--intrinsics", ra.intrinsics, "fx fy cx cy")->expected(4);
  render->add_option("--kh", ra.kh, "Highlight intensity K_H")->required();
  render->add_option("--shininess", ra.shininess, "Shininess exponent S")->required();
  render->add_option("--light", ra.light, "Light position x y z (camera frame)")
      ->required()
      ->expected(3);
  render->add_option("--r0", ra.r0, "Fresnel reflectance at normal incidence");
  render->add_option("--stem", ra.stem, "Output file prefix");
  render->add_option("--out", ra.out, "Output directory")->required();

  std::string job_path, dataset_out;
  auto* dataset = app.add_subcommand("dataset", "Batch synthesis from a job file");
  dataset->add_option("--job", job_path, "Job JSON")->required()->check(CLI::ExistingFile);
  dataset->add_option("--out", dataset_out, "Override the job's output directory");

  std::string m_rgb, m_h, m_out;
  auto* masks = app.add_subcommand("masks", "Masks from an image and a highlight map");
  masks->add_option("--rgb", m_rgb, "sRGB PNG")->required()->check(CLI::ExistingFile);
  masks->add_option("--highlight", m_h, "H tensor")->required()->check(CLI::ExistingFile);
  masks->add_option("--out", m_out, "Output directory")->required();

  InpaintArgs ia;
  auto* inpaint = app.add_subcommand("inpaint-demo", "Run the token inpainting chain");
  inpaint->add_option("--tokens", ia.tokens, "hp x wp x dim tensor")->check(CLI::ExistingFile);
  inpaint->add_option("--mask", ia.mask, "hp x wp tensor, nonzero = inpaint")
      ->check(CLI::ExistingFile);
  inpaint->add_option("--hp", ia.hp, "Grid rows for a random grid")->check(CLI::PositiveNumber);
  inpaint->add_option("--wp", ia.wp, "Grid columns for a random grid")->check(CLI::PositiveNumber);
  inpaint->add_option("--mask-fraction", ia.mask_fraction, "Masked share of a random grid")
      ->check(CLI::Range(0.0, 1.0));
  inpaint->add_option("--out", ia.out, "Output directory")->required();

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Score predictions against references");
  eval->add_option("--pred", ea.pred, "Predictions (PNG)")->required()->check(CLI::ExistingDirectory);
  eval->add_option("--ref", ea.ref, "References (PNG)")->required()->check(CLI::ExistingDirectory);
  eval->add_option("--mask", ea.mask, "Evaluation masks (PNG)")->check(CLI::ExistingDirectory);
  eval->add_option("--input", ea.input, "Highlighted inputs, enables LSR")
      ->check(CLI::ExistingDirectory);
  eval->add_option("--out", ea.out, "Report JSON")->required();

  std::string sc_out;
  bool sc_quick = false;
  auto* selfcheck = app.add_subcommand("selfcheck", "Oracle, gradient and determinism checks");
  selfcheck->add_option("--out", sc_out, "Also write the summary here");
  selfcheck->add_flag("--quick", sc_quick, "Smaller instance counts");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*render) return cmd_render(g, ra);
    if (*dataset) {
      SynthesisJob job = load_job(job_path, g.config());
      if (g.seed) {
        job.config.sampling.seed = *g.seed;
        job.config.inpainter.seed = *g.seed;
      }
      if (!dataset_out.empty()) job.output_dir = dataset_out;
      const DatasetResult r = run_dataset(job, g.workers);
      std::cout << job.inputs.size() * job.draws_per_image - r.failures << " samples written, "
                << r.failures << " failed\n";
      return r.failures == 0 ? 0 : 1;
    }
    if (*masks) return cmd_masks(g, m_rgb, m_h, m_out);
    if (*inpaint) return cmd_inpaint(g, ia);
    if (*eval) return cmd_eval(ea);
    if (*selfcheck) {
      SelfcheckOptions opt;
      opt.seed = g.seed.value_or(0);
      if (sc_quick) {
        opt.oracle_triples = 100;
        opt.fd_instances = 4;
        opt.batch_samples = 8;
      }
      const Json summary = to_json(run_selfcheck(opt));
      std::cout << summary.dump(2) << '\n';
      if (!sc_out.empty()) write_json(sc_out, summary);
      return summary.at("passed").get<bool>() ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
