#include "hlsynth/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "hlsynth/color.hpp"
#include "hlsynth/io.hpp"

namespace hlsynth {
namespace {

namespace fs = std::filesystem;

VectorField normals_from_tensor(const io::Tensor& t, int width, int height) {
  if (t.dims.size() != 3 || t.dims[2] != 3 || static_cast<int>(t.dims[0]) != height ||
      static_cast<int>(t.dims[1]) != width) {
    throw Error("normals tensor must be HxWx3 matching the depth map");
  }
  VectorField n(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
      n(x, y) = Vec3(t.data[i], t.data[i + 1], t.data[i + 2]);
    }
  }
  return n;
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

SynthesisPair synthesize_one(const LinearImage& clean, const GeometryBuffers& geom,
                             const ShadingParams& params,
                             const MaskThresholds& thresholds, ViewConvention view) {
  params.validate();
  require_same_shape(clean, geom.depth, "synthesize_one");
  if (count_set(geom.valid) == 0) throw Error("synthesize_one: geometry has no valid pixel");

  SynthesisPair pair;
  pair.clean = clean;
  pair.params = params;
  const DirectionField dirs = direction_field(geom, params.light, view);
  pair.highlight = blinn_phong_highlight(dirs, geom, params);
  pair.highlighted = composite(clean, pair.highlight, params.k_h);
  const BinaryMask dataset_hl =
      detect_dataset_highlights(clean, thresholds.tau_l, thresholds.luminance);
  pair.masks = build_masks(pair.highlight, dataset_hl, thresholds);
  return pair;
}

void SynthesisJob::validate() const {
  if (inputs.empty()) throw Error("job: no inputs");
  if (draws_per_image < 1) throw Error("job: draws_per_image must be >= 1");
  if (output_dir.empty()) throw Error("job: output_dir is required");
  for (const auto& in : inputs) {
    if (!fs::exists(in.rgb)) throw Error("job: missing file " + in.rgb.string());
    if (!fs::exists(in.depth)) throw Error("job: missing file " + in.depth.string());
    if (in.normals && !fs::exists(*in.normals)) {
      throw Error("job: missing file " + in.normals->string());
    }
  }
  config.validate();
}

SynthesisJob load_job(const fs::path& path, const Config& base) {
  const Json j = read_json(path);
  const fs::path dir = path.parent_path();
  SynthesisJob job;
  job.config = base;
  if (j.contains("config")) job.config = config_from_json(j.at("config"), base);
  if (j.contains("seed")) job.config.sampling.seed = j.at("seed").get<std::uint64_t>();
  job.draws_per_image = j.value("draws_per_image", 1);
  if (j.contains("output_dir")) {
    job.output_dir = resolve(dir, j.at("output_dir").get<std::string>());
  }
  std::size_t index = 0;
  for (const Json& e : j.at("inputs")) {
    SceneInput in;
    in.id = e.value("id", "img" + std::to_string(index));
    in.rgb = resolve(dir, e.at("rgb").get<std::string>());
    in.depth = resolve(dir, e.at("depth").get<std::string>());
    if (e.contains("normals")) in.normals = resolve(dir, e.at("normals").get<std::string>());
    if (e.contains("intrinsics")) in.intrinsics = intrinsics_from_json(e.at("intrinsics"));
    job.inputs.push_back(std::move(in));
    ++index;
  }
  return job;
}

LoadedScene load_scene(const SceneInput& input, const Config& config) {
  LoadedScene scene;
  scene.clean = srgb_to_linear(io::read_png(input.rgb));
  const ScalarMap depth = io::read_pfm(input.depth);
  require_same_shape(scene.clean, depth, "load_scene");
  const auto K = input.intrinsics ? input.intrinsics : config.intrinsics;
  if (!K) throw Error("no intrinsics for input '" + input.id + "'");
  BinaryMask valid(depth.width(), depth.height(), 0);
  for (std::size_t i = 0; i < depth.pixel_count(); ++i) {
    const float d = depth.values()[i];
    valid.values()[i] = std::isfinite(d) && d > 0.0f;
  }
  VectorField normals;
  if (input.normals) {
    normals = normals_from_tensor(io::read_tensor(*input.normals), depth.width(),
                                  depth.height());
  }
  scene.geometry = make_geometry(depth, *K, normals, valid);
  return scene;
}

std::map<std::string, std::string> write_sample(const SynthesisPair& pair,
                                                const fs::path& dir,
                                                const std::string& stem,
                                                int png_bit_depth) {
  std::map<std::string, std::string> files{
      {"highlighted_png", stem + "_highlighted.png"},
      {"highlighted", stem + "_highlighted.urtd"},
      {"highlight", stem + "_highlight.urtd"},
      {"dataset_hl", stem + "_dataset_hl.png"},
      {"synthetic_hl", stem + "_synthetic_hl.png"},
      {"m_sup", stem + "_m_sup.png"},
      {"m_hole", stem + "_m_hole.png"},
      {"patches", stem + "_patches.urtd"},
  };
  io::write_png(dir / files["highlighted_png"], linear_to_srgb(pair.highlighted, png_bit_depth));
  io::write_tensor(dir / files["highlighted"], io::to_tensor(pair.highlighted));
  io::write_tensor(dir / files["highlight"], io::to_tensor(pair.highlight));
  io::write_mask_png(dir / files["dataset_hl"], pair.masks.dataset_hl);
  io::write_mask_png(dir / files["synthetic_hl"], pair.masks.synthetic_hl);
  io::write_mask_png(dir / files["m_sup"], pair.masks.m_sup);
  io::write_mask_png(dir / files["m_hole"], pair.masks.m_hole);
  io::write_tensor(dir / files["patches"], patch_tensor(pair.masks));
  return files;
}

io::Tensor patch_tensor(const MaskSet& m) {
  io::Tensor t;
  const int gw = m.patch_hole.width();
  const int gh = m.patch_hole.height();
  t.dims = {static_cast<std::uint32_t>(gh), static_cast<std::uint32_t>(gw), 3};
  t.data.reserve(static_cast<std::size_t>(gw) * gh * 3);
  for (int y = 0; y < gh; ++y) {
    for (int x = 0; x < gw; ++x) {
      t.data.push_back(m.patch_hole(x, y) ? 1.0f : 0.0f);
      t.data.push_back(m.patch_sup(x, y) ? 1.0f : 0.0f);
      t.data.push_back(m.patch_train(x, y) ? 1.0f : 0.0f);
    }
  }
  return t;
}

Json mask_stats(const MaskSet& m) {
  return {
      {"dataset_hl_pixels", count_set(m.dataset_hl)},
      {"synthetic_hl_pixels", count_set(m.synthetic_hl)},
      {"hole_pixels", count_set(m.m_hole)},
      {"sup_pixels", count_set(m.m_sup)},
      {"patch_grid", {m.patch_hole.height(), m.patch_hole.width()}},
      {"patch_size", m.patch_size},
      {"hole_patches", count_set(m.patch_hole)},
      {"sup_patches", count_set(m.patch_sup)},
      {"train_patches", count_set(m.patch_train)},
  };
}

DatasetResult run_dataset(const SynthesisJob& job, int workers) {
  job.validate();
  if (workers < 1) throw Error("run_dataset: workers must be >= 1");
  fs::create_directories(job.output_dir);

  const std::size_t n_images = job.inputs.size();
  const std::size_t draws = static_cast<std::size_t>(job.draws_per_image);
  std::vector<Json> records(n_images * draws);
  std::vector<double> seconds(n_images, 0.0);
  std::atomic<std::size_t> next{0};

  auto work = [&]() {
    for (std::size_t i = next++; i < n_images; i = next++) {
      const auto start = std::chrono::steady_clock::now();
      const SceneInput& input = job.inputs[i];
      std::optional<LoadedScene> scene;
      std::string load_error;
      try {
        scene = load_scene(input, job.config);
      } catch (const std::exception& e) {
        load_error = e.what();
      }
      for (std::size_t k = 0; k < draws; ++k) {
        const std::uint64_t global = i * draws + k;
        Json rec{{"input_id", input.id},
                 {"image_index", i},
                 {"draw_index", k},
                 {"global_draw", global}};
        try {
          if (!scene) throw Error(load_error);
          const ShadingParams params = sample_params(job.config.sampling, global);
          rec["params"] = to_json(params);
          const SynthesisPair pair = synthesize_one(scene->clean, scene->geometry, params,
                                                    job.config.masks, job.config.view);
          std::ostringstream stem;
          stem << input.id << "_d" << k;
          rec["files"] = write_sample(pair, job.output_dir, stem.str(),
                                      job.config.png_bit_depth);
          rec["stats"] = mask_stats(pair.masks);
          rec["status"] = "ok";
        } catch (const std::exception& e) {
          rec["status"] = "error";
          rec["error"] = e.what();
        }
        records[i * draws + k] = std::move(rec);
      }
      seconds[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
  };

  {
    std::vector<std::jthread> pool;
    const int n_threads = static_cast<int>(std::min<std::size_t>(workers, n_images));
    for (int t = 1; t < n_threads; ++t) pool.emplace_back(work);
    work();
  }

  DatasetResult result;
  Json records_json = Json::array();
  for (auto& r : records) {
    if (r.value("status", "") != "ok") ++result.failures;
    records_json.push_back(std::move(r));
  }
  result.manifest = {
      {"tool", kToolName},
      {"version", kToolVersion},
      {"config", to_json(job.config)},
      {"draws_per_image", job.draws_per_image},
      {"records", std::move(records_json)},
      {"failures", result.failures},
  };
  write_json(job.output_dir / "manifest.json", result.manifest);

  std::ofstream timing(job.output_dir / "timing.log", std::ios::trunc);
  for (std::size_t i = 0; i < n_images; ++i) {
    timing << job.inputs[i].id << ' ' << seconds[i] << " s\n";
  }
  return result;
}

}  // namespace hlsynth
