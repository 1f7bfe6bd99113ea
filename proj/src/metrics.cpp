#include "hlsynth/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hlsynth/ssim.hpp"

namespace hlsynth {
namespace {

struct RegionMeans {
  double inside = 0.0;
  double outside = 0.0;
  std::size_t n_inside = 0;
  std::size_t n_outside = 0;
};

RegionMeans region_luminance(const LinearImage& img, const BinaryMask& mask) {
  RegionMeans m;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const double lum = luminance(img(x, y, 0), img(x, y, 1), img(x, y, 2));
      if (mask(x, y)) {
        m.inside += lum;
        ++m.n_inside;
      } else {
        m.outside += lum;
        ++m.n_outside;
      }
    }
  }
  if (m.n_inside) m.inside /= static_cast<double>(m.n_inside);
  if (m.n_outside) m.outside /= static_cast<double>(m.n_outside);
  return m;
}

}  // namespace

double mse_masked(const LinearImage& pred, const LinearImage& ref,
                  const BinaryMask& mask) {
  require_same_shape(pred, ref, "mse_masked");
  require_same_shape(pred, mask, "mse_masked");
  double sum = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < pred.height(); ++y) {
    for (int x = 0; x < pred.width(); ++x) {
      if (!mask(x, y)) continue;
      for (int c = 0; c < 3; ++c) {
        const double d = static_cast<double>(pred(x, y, c)) - ref(x, y, c);
        sum += d * d;
      }
      n += 3;
    }
  }
  if (n == 0) throw Error("mse_masked: empty mask, metric undefined");
  return sum / static_cast<double>(n);
}

double mse(const LinearImage& pred, const LinearImage& ref) {
  return mse_masked(pred, ref, BinaryMask(pred.width(), pred.height(), 1));
}

double psnr(const LinearImage& pred, const LinearImage& ref) {
  const double err = mse(pred, ref);
  if (err == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / err);
}

double ssim(const LinearImage& pred, const LinearImage& ref) {
  return ssim_valid(pred, ref);
}

double lsr(const LinearImage& input, const LinearImage& output,
           const BinaryMask& hl_mask) {
  require_same_shape(input, output, "lsr");
  require_same_shape(input, hl_mask, "lsr");
  const RegionMeans in = region_luminance(input, hl_mask);
  if (in.n_inside == 0 || in.n_outside == 0) {
    throw Error("lsr: highlight mask and its complement must both be non-empty");
  }
  if (!(in.inside - in.outside > 0.0)) {
    throw Error("lsr: input highlight region is not brighter than the background");
  }
  const double in_excess = (in.inside - in.outside) / std::max(kLsrDelta, in.outside);
  const RegionMeans out = region_luminance(output, hl_mask);
  const double out_excess =
      std::max(0.0, out.inside - out.outside) / std::max(kLsrDelta, out.outside);
  return out_excess / std::max(kLsrDelta, in_excess);
}

}  // namespace hlsynth
