#include "hlsynth/config.hpp"

#include <fstream>
#include <set>

namespace hlsynth {
namespace {

void reject_unknown(const Json& j, const std::set<std::string>& known,
                    const std::string& section) {
  if (!j.is_object()) throw Error("config: section '" + section + "' must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) {
      throw Error("config: unknown key '" + key + "' in section '" + section + "'");
    }
  }
}

template <typename T>
void read_if(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

Range range_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 2) throw Error("config: range must be [lo, hi]");
  return {j[0].get<double>(), j[1].get<double>()};
}

Vec3 vec3_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 3) throw Error("config: expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Json vec3_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

const char* view_name(ViewConvention v) {
  return v == ViewConvention::kAwayFromCamera ? "away_from_camera" : "toward_camera";
}

ViewConvention view_from_name(const std::string& s) {
  if (s == "toward_camera") return ViewConvention::kTowardCamera;
  if (s == "away_from_camera") return ViewConvention::kAwayFromCamera;
  throw Error("config: view_convention must be 'toward_camera' or 'away_from_camera'");
}

const char* luminance_name(LuminanceMode m) {
  return m == LuminanceMode::kRec709 ? "rec709" : "channel_mean";
}

LuminanceMode luminance_from_name(const std::string& s) {
  if (s == "channel_mean") return LuminanceMode::kChannelMean;
  if (s == "rec709") return LuminanceMode::kRec709;
  throw Error("config: luminance must be 'channel_mean' or 'rec709'");
}

}  // namespace

void Config::validate() const {
  sampling.validate();
  masks.validate();
  inpainter.validate();
  losses.validate();
  if (png_bit_depth != 8 && png_bit_depth != 16) {
    throw Error("config: png_bit_depth must be 8 or 16");
  }
}

Json to_json(const Config& c) {
  Json j;
  j["seed"] = c.sampling.seed;
  j["shading"] = {
      {"r0", c.sampling.r0},
      {"k_h_range", {c.sampling.k_h.lo, c.sampling.k_h.hi}},
      {"shininess_range", {c.sampling.shininess.lo, c.sampling.shininess.hi}},
      {"light_box", {{"min", vec3_json(c.sampling.light_min)},
                     {"max", vec3_json(c.sampling.light_max)}}},
      {"view_convention", view_name(c.view)},
  };
  j["masks"] = {
      {"tau_l", c.masks.tau_l},
      {"pixel_thresh", c.masks.pixel_thresh},
      {"patch_thresh", c.masks.patch_thresh},
      {"patch_size", c.masks.patch_size},
      {"luminance", luminance_name(c.masks.luminance)},
  };
  j["inpainter"] = {
      {"dim", c.inpainter.dim},
      {"depth", c.inpainter.depth},
      {"heads", c.inpainter.heads},
      {"ffn_multiplier", c.inpainter.ffn_multiplier},
      {"neighborhood", c.inpainter.neighborhood},
      {"lambda", c.inpainter.lambda},
      {"alpha", c.inpainter.alpha},
      {"seed", c.inpainter.seed},
  };
  j["losses"] = {
      {"w_dice", c.losses.w_dice}, {"w_l1", c.losses.w_l1},
      {"w_tv", c.losses.w_tv},     {"w_seam", c.losses.w_seam},
      {"w_spec", c.losses.w_spec}, {"w_rgb", c.losses.w_rgb},
      {"lambda_g", c.losses.lambda_g}, {"tau_m", c.losses.tau_m},
      {"eps", c.losses.eps},       {"dice_smooth", c.losses.dice_smooth},
      {"seam_radius", c.losses.seam_radius},
  };
  j["png_bit_depth"] = c.png_bit_depth;
  if (c.intrinsics) j["intrinsics"] = to_json(*c.intrinsics);
  return j;
}

Config config_from_json(const Json& j, Config c) {
  reject_unknown(j, {"seed", "shading", "masks", "inpainter", "losses",
                     "png_bit_depth", "intrinsics"},
                 "root");
  read_if(j, "seed", c.sampling.seed);
  read_if(j, "png_bit_depth", c.png_bit_depth);
  if (j.contains("intrinsics")) c.intrinsics = intrinsics_from_json(j.at("intrinsics"));
  if (j.contains("shading")) {
    const Json& s = j.at("shading");
    reject_unknown(s, {"r0", "k_h_range", "shininess_range", "light_box",
                       "view_convention"},
                   "shading");
    read_if(s, "r0", c.sampling.r0);
    if (s.contains("k_h_range")) c.sampling.k_h = range_from_json(s.at("k_h_range"));
    if (s.contains("shininess_range")) {
      c.sampling.shininess = range_from_json(s.at("shininess_range"));
    }
    if (s.contains("light_box")) {
      const Json& b = s.at("light_box");
      reject_unknown(b, {"min", "max"}, "shading.light_box");
      if (b.contains("min")) c.sampling.light_min = vec3_from_json(b.at("min"));
      if (b.contains("max")) c.sampling.light_max = vec3_from_json(b.at("max"));
    }
    if (s.contains("view_convention")) {
      c.view = view_from_name(s.at("view_convention").get<std::string>());
    }
  }
  if (j.contains("masks")) {
    const Json& m = j.at("masks");
    reject_unknown(m, {"tau_l", "pixel_thresh", "patch_thresh", "patch_size", "luminance"},
                   "masks");
    read_if(m, "tau_l", c.masks.tau_l);
    read_if(m, "pixel_thresh", c.masks.pixel_thresh);
    read_if(m, "patch_thresh", c.masks.patch_thresh);
    read_if(m, "patch_size", c.masks.patch_size);
    if (m.contains("luminance")) {
      c.masks.luminance = luminance_from_name(m.at("luminance").get<std::string>());
    }
  }
  if (j.contains("inpainter")) {
    const Json& t = j.at("inpainter");
    reject_unknown(t, {"dim", "depth", "heads", "ffn_multiplier", "neighborhood",
                       "lambda", "alpha", "seed"},
                   "inpainter");
    read_if(t, "dim", c.inpainter.dim);
    read_if(t, "depth", c.inpainter.depth);
    read_if(t, "heads", c.inpainter.heads);
    read_if(t, "ffn_multiplier", c.inpainter.ffn_multiplier);
    read_if(t, "neighborhood", c.inpainter.neighborhood);
    read_if(t, "lambda", c.inpainter.lambda);
    read_if(t, "alpha", c.inpainter.alpha);
    read_if(t, "seed", c.inpainter.seed);
  }
  if (j.contains("losses")) {
    const Json& l = j.at("losses");
    reject_unknown(l, {"w_dice", "w_l1", "w_tv", "w_seam", "w_spec", "w_rgb",
                       "lambda_g", "tau_m", "eps", "dice_smooth", "seam_radius"},
                   "losses");
    read_if(l, "w_dice", c.losses.w_dice);
    read_if(l, "w_l1", c.losses.w_l1);
    read_if(l, "w_tv", c.losses.w_tv);
    read_if(l, "w_seam", c.losses.w_seam);
    read_if(l, "w_spec", c.losses.w_spec);
    read_if(l, "w_rgb", c.losses.w_rgb);
    read_if(l, "lambda_g", c.losses.lambda_g);
    read_if(l, "tau_m", c.losses.tau_m);
    read_if(l, "eps", c.losses.eps);
    read_if(l, "dice_smooth", c.losses.dice_smooth);
    read_if(l, "seam_radius", c.losses.seam_radius);
  }
  c.validate();
  return c;
}

Config load_config(const std::filesystem::path& path) {
  return config_from_json(read_json(path));
}

Json to_json(const ShadingParams& p) {
  return {{"r0", p.r0}, {"k_h", p.k_h}, {"shininess", p.shininess},
          {"light", vec3_json(p.light)}};
}

ShadingParams shading_params_from_json(const Json& j) {
  ShadingParams p;
  p.r0 = j.value("r0", kDefaultR0);
  p.k_h = j.at("k_h").get<double>();
  p.shininess = j.at("shininess").get<double>();
  p.light = vec3_from_json(j.at("light"));
  p.validate();
  return p;
}

Json to_json(const CameraIntrinsics& k) {
  return {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}};
}

CameraIntrinsics intrinsics_from_json(const Json& j) {
  reject_unknown(j, {"fx", "fy", "cx", "cy"}, "intrinsics");
  CameraIntrinsics k;
  k.fx = j.at("fx").get<double>();
  k.fy = j.at("fy").get<double>();
  k.cx = j.at("cx").get<double>();
  k.cy = j.at("cy").get<double>();
  return k;
}

Json to_json(const LossReport& r) {
  Json terms = Json::object();
  for (const auto& [name, value] : r.terms) terms[name] = value;
  return {{"total", r.total}, {"terms", terms}};
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace hlsynth
