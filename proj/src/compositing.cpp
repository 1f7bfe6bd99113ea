#include "hlsynth/compositing.hpp"

#include <algorithm>
#include <cmath>

namespace hlsynth {

void MaskThresholds::validate() const {
  if (!(tau_l > 0.0 && tau_l <= 1.0)) throw Error("tau_L must lie in (0,1]");
  if (!(pixel_thresh >= 0.0 && pixel_thresh <= 1.0)) {
    throw Error("pixel threshold must lie in [0,1]");
  }
  if (!(patch_thresh >= 0.0 && patch_thresh <= 1.0)) {
    throw Error("patch threshold must lie in [0,1]");
  }
  if (patch_size < 1) throw Error("patch size must be >= 1");
}

LinearImage composite(const LinearImage& clean, const ScalarMap& highlight,
                      double k_h) {
  require_same_shape(clean, highlight, "composite");
  const float k = static_cast<float>(k_h);
  LinearImage out(clean.width(), clean.height());
  for (int y = 0; y < clean.height(); ++y) {
    for (int x = 0; x < clean.width(); ++x) {
      const float add = k * highlight(x, y);
      for (int c = 0; c < 3; ++c) {
        out(x, y, c) = std::clamp(clean(x, y, c) + add, 0.0f, 1.0f);
      }
    }
  }
  return out;
}

BinaryMask detect_dataset_highlights(const LinearImage& img, double tau_l,
                                     LuminanceMode mode) {
  if (!(tau_l > 0.0 && tau_l <= 1.0)) throw Error("tau_L must lie in (0,1]");
  BinaryMask mask(img.width(), img.height(), 0);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const float lum = luminance(img(x, y, 0), img(x, y, 1), img(x, y, 2), mode);
      mask(x, y) = lum > tau_l ? 1 : 0;
    }
  }
  return mask;
}

Image<double, 1> average_pool(const ScalarMap& map, int patch_size) {
  if (patch_size < 1) throw Error("patch size must be >= 1");
  const int gw = (map.width() + patch_size - 1) / patch_size;
  const int gh = (map.height() + patch_size - 1) / patch_size;
  Image<double, 1> pooled(gw, gh, 0.0);
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      pooled(x / patch_size, y / patch_size) += map(x, y);
    }
  }
  const double area = static_cast<double>(patch_size) * patch_size;
  for (double& v : pooled.values()) v /= area;
  return pooled;
}

MaskSet build_masks(const ScalarMap& synth_highlight,
                    const BinaryMask& dataset_hl,
                    const MaskThresholds& t) {
  t.validate();
  require_same_shape(synth_highlight, dataset_hl, "build_masks");
  const int w = synth_highlight.width();
  const int h = synth_highlight.height();

  MaskSet m;
  m.patch_size = t.patch_size;
  m.dataset_hl = dataset_hl;
  m.synthetic_hl = BinaryMask(w, h, 0);
  m.m_sup = BinaryMask(w, h, 0);
  m.m_hole = BinaryMask(w, h, 0);
  // Continuous maps for pooling: the hole map covers both highlight kinds.
  ScalarMap hole_intensity(w, h);
  ScalarMap dataset_indicator(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const bool dataset = dataset_hl(x, y) != 0;
      const bool synthetic = synth_highlight(x, y) > t.pixel_thresh;
      m.synthetic_hl(x, y) = synthetic;
      m.m_hole(x, y) = synthetic || dataset;
      m.m_sup(x, y) = !dataset;
      dataset_indicator(x, y) = dataset ? 1.0f : 0.0f;
      hole_intensity(x, y) = dataset ? 1.0f : synth_highlight(x, y);
    }
  }

  const auto hole_pool = average_pool(hole_intensity, t.patch_size);
  const auto dataset_pool = average_pool(dataset_indicator, t.patch_size);
  const int gw = hole_pool.width();
  const int gh = hole_pool.height();
  m.patch_hole = PatchMask(gw, gh, 0);
  m.patch_sup = PatchMask(gw, gh, 0);
  m.patch_train = PatchMask(gw, gh, 0);
  for (int y = 0; y < gh; ++y) {
    for (int x = 0; x < gw; ++x) {
      const bool hole = hole_pool(x, y) > t.patch_thresh;
      const bool sup = !(dataset_pool(x, y) > t.patch_thresh);
      m.patch_hole(x, y) = hole;
      m.patch_sup(x, y) = sup;
      m.patch_train(x, y) = hole && sup;
    }
  }
  return m;
}

}  // namespace hlsynth
