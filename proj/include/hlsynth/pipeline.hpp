#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hlsynth/compositing.hpp"
#include "hlsynth/config.hpp"
#include "hlsynth/geometry.hpp"
#include "hlsynth/io.hpp"
#include "hlsynth/shading.hpp"

namespace hlsynth {

inline constexpr const char* kToolName = "hlsynth";
inline constexpr const char* kToolVersion = "0.1.0";

struct SynthesisPair {
  LinearImage clean;
  LinearImage highlighted;  // clamp01(clean + K_H * highlight)
  ScalarMap highlight;      // H in [0,1]
  MaskSet masks;
  ShadingParams params;
};

/// direction field -> specular lobe -> composite -> dataset highlights -> masks.
/// Throws if no pixel of `geom` is valid or shapes disagree.
SynthesisPair synthesize_one(const LinearImage& clean, const GeometryBuffers& geom,
                             const ShadingParams& params,
                             const MaskThresholds& thresholds,
                             ViewConvention view = ViewConvention::kTowardCamera);

struct SceneInput {
  std::string id;
  std::filesystem::path rgb;
  std::filesystem::path depth;
  std::optional<std::filesystem::path> normals;
  std::optional<CameraIntrinsics> intrinsics;
};

struct SynthesisJob {
  std::vector<SceneInput> inputs;
  int draws_per_image = 1;
  std::filesystem::path output_dir;
  Config config;

  void validate() const;
};

/// Paths inside the job file resolve relative to the job file's directory.
SynthesisJob load_job(const std::filesystem::path& path, const Config& base = {});

/// Decoded RGB plus geometry. Pixels with non-finite or non-positive depth
/// are invalid; normals come from the tensor file or from the depth map.
struct LoadedScene {
  LinearImage clean;
  GeometryBuffers geometry;
};
LoadedScene load_scene(const SceneInput& input, const Config& config);

/// Writes one sample's artifacts as <stem>_*.{png,urtd} into `dir` and
/// returns the file names keyed by role.
std::map<std::string, std::string> write_sample(const SynthesisPair& pair,
                                                const std::filesystem::path& dir,
                                                const std::string& stem,
                                                int png_bit_depth);

Json mask_stats(const MaskSet& masks);

/// Patch grids as an hp x wp x 3 tensor: hole, sup, train.
io::Tensor patch_tensor(const MaskSet& masks);

struct DatasetResult {
  Json manifest;
  std::size_t failures = 0;
};

/// Renders draws_per_image samples per input with `workers` threads. Sample
/// (i, k) uses sample_params(seed, i * draws_per_image + k), so the output is
/// independent of scheduling. Writes manifest.json (deterministic) and
/// timing.log (wall-clock) into the output directory.
DatasetResult run_dataset(const SynthesisJob& job, int workers = 1);

}  // namespace hlsynth
