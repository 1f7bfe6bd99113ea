#pragma once

#include <filesystem>
#include <optional>

#include <json.hpp>

#include "hlsynth/compositing.hpp"
#include "hlsynth/geometry.hpp"
#include "hlsynth/losses.hpp"
#include "hlsynth/shading.hpp"
#include "hlsynth/tokens.hpp"

namespace hlsynth {

using Json = nlohmann::json;

/// Every tunable in one place. Missing JSON keys keep these defaults.
struct Config {
  SamplingRanges sampling;
  MaskThresholds masks;
  ViewConvention view = ViewConvention::kTowardCamera;
  InpainterConfig inpainter;
  LossWeights losses;
  int png_bit_depth = 8;
  std::optional<CameraIntrinsics> intrinsics;

  void validate() const;
};

Json to_json(const Config& c);
/// Overlays `j` on top of `base`; unknown keys are rejected.
Config config_from_json(const Json& j, Config base = {});
Config load_config(const std::filesystem::path& path);

Json to_json(const ShadingParams& p);
ShadingParams shading_params_from_json(const Json& j);
Json to_json(const CameraIntrinsics& k);
CameraIntrinsics intrinsics_from_json(const Json& j);
Json to_json(const LossReport& r);

Json read_json(const std::filesystem::path& path);
/// Stable formatting: 2-space indent, trailing newline.
void write_json(const std::filesystem::path& path, const Json& j);

}  // namespace hlsynth
