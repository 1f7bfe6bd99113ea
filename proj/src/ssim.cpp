#include "hlsynth/ssim.hpp"

#include <array>
#include <cmath>
#include <vector>

namespace hlsynth {
namespace {

constexpr int kRadius = kSsimWindow / 2;

std::array<double, kSsimWindow> gaussian_kernel() {
  std::array<double, kSsimWindow> k{};
  double sum = 0.0;
  for (int i = 0; i < kSsimWindow; ++i) {
    const double d = i - kRadius;
    k[i] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

double ssim_from_moments(double mx, double my, double xx, double yy, double xy) {
  const double vx = xx - mx * mx;
  const double vy = yy - my * my;
  const double cov = xy - mx * my;
  return ((2.0 * mx * my + kSsimC1) * (2.0 * cov + kSsimC2)) /
         ((mx * mx + my * my + kSsimC1) * (vx + vy + kSsimC2));
}

// Horizontal then vertical pass, keeping only fully covered positions.
std::vector<double> filter_valid(const std::vector<double>& src, int w, int h,
                                 const std::array<double, kSsimWindow>& k) {
  const int ow = w - 2 * kRadius;
  const int oh = h - 2 * kRadius;
  std::vector<double> tmp(static_cast<std::size_t>(ow) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < kSsimWindow; ++i) s += k[i] * src[y * w + x + i];
      tmp[y * ow + x] = s;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(ow) * oh);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < kSsimWindow; ++i) s += k[i] * tmp[(y + i) * ow + x];
      out[y * ow + x] = s;
    }
  }
  return out;
}

}  // namespace

double ssim_valid(const LinearImage& a, const LinearImage& b) {
  require_same_shape(a, b, "ssim");
  const int w = a.width();
  const int h = a.height();
  if (w < kSsimWindow || h < kSsimWindow) {
    throw Error("ssim: image smaller than the 11x11 window");
  }
  const auto k = gaussian_kernel();
  const std::size_t n = a.pixel_count();
  double total = 0.0;
  std::size_t count = 0;
  std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
  for (int c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = a.values()[3 * i + c];
      y[i] = b.values()[3 * i + c];
      xx[i] = x[i] * x[i];
      yy[i] = y[i] * y[i];
      xy[i] = x[i] * y[i];
    }
    const auto mx = filter_valid(x, w, h, k);
    const auto my = filter_valid(y, w, h, k);
    const auto mxx = filter_valid(xx, w, h, k);
    const auto myy = filter_valid(yy, w, h, k);
    const auto mxy = filter_valid(xy, w, h, k);
    for (std::size_t i = 0; i < mx.size(); ++i) {
      total += ssim_from_moments(mx[i], my[i], mxx[i], myy[i], mxy[i]);
    }
    count += mx.size();
  }
  return total / static_cast<double>(count);
}

double ssim_masked(const LinearImage& a, const LinearImage& b,
                   const BinaryMask& mask) {
  require_same_shape(a, b, "ssim");
  require_same_shape(a, mask, "ssim");
  const auto k = gaussian_kernel();
  const int w = a.width();
  const int h = a.height();
  double total = 0.0;
  std::size_t count = 0;
  for (int cy = 0; cy < h; ++cy) {
    for (int cx = 0; cx < w; ++cx) {
      if (!mask(cx, cy)) continue;
      for (int c = 0; c < 3; ++c) {
        double sw = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
        for (int dy = -kRadius; dy <= kRadius; ++dy) {
          const int y = cy + dy;
          if (y < 0 || y >= h) continue;
          for (int dx = -kRadius; dx <= kRadius; ++dx) {
            const int x = cx + dx;
            if (x < 0 || x >= w || !mask(x, y)) continue;
            const double wt = k[dy + kRadius] * k[dx + kRadius];
            const double xv = a(x, y, c);
            const double yv = b(x, y, c);
            sw += wt;
            sx += wt * xv;
            sy += wt * yv;
            sxx += wt * xv * xv;
            syy += wt * yv * yv;
            sxy += wt * xv * yv;
          }
        }
        total += ssim_from_moments(sx / sw, sy / sw, sxx / sw, syy / sw, sxy / sw);
        ++count;
      }
    }
  }
  return count == 0 ? 1.0 : total / static_cast<double>(count);
}

}  // namespace hlsynth
