#include "hlsynth/losses.hpp"

#include <algorithm>
#include <cmath>

#include "hlsynth/ssim.hpp"

namespace hlsynth {
namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

void LossWeights::validate() const {
  for (double v : {w_dice, w_l1, w_tv, w_seam, w_spec, w_rgb, lambda_g, dice_smooth}) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw Error("loss weights must be >= 0");
  }
  if (!(eps > 0.0)) throw Error("loss eps must be > 0");
  if (!(tau_m > 0.0 && tau_m < 1.0)) throw Error("tau_m must lie in (0,1)");
  if (seam_radius < 1) throw Error("seam radius must be >= 1");
}

LossReport highlight_loss(const ScalarMap& pred, const ScalarMap& target,
                          const LossWeights& weights) {
  require_same_shape(pred, target, "highlight_loss");
  weights.validate();
  const int w = pred.width();
  const int h = pred.height();
  const auto p = pred.values();
  const auto t = target.values();
  const std::size_t n = p.size();
  const double s = weights.dice_smooth;

  double inter = 0.0, sum_p = 0.0, sum_t = 0.0, l1 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    inter += static_cast<double>(p[i]) * t[i];
    sum_p += p[i];
    sum_t += t[i];
    l1 += std::abs(static_cast<double>(p[i]) - t[i]);
  }
  const double num = 2.0 * inter + s;
  const double den = sum_p + sum_t + s;
  const double dice = den > 0.0 ? 1.0 - num / den : 0.0;
  l1 /= static_cast<double>(n);

  const std::size_t nx = static_cast<std::size_t>(w - 1) * h;
  const std::size_t ny = static_cast<std::size_t>(w) * (h - 1);
  LossReport r;
  r.gradient.assign(n, 0.0);
  double tv_x = 0.0, tv_y = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (x + 1 < w) {
        const double d = static_cast<double>(pred(x + 1, y)) - pred(x, y);
        tv_x += std::abs(d);
        const double g = weights.w_tv * sign(d) / static_cast<double>(nx);
        r.gradient[pred.index(x + 1, y)] += g;
        r.gradient[pred.index(x, y)] -= g;
      }
      if (y + 1 < h) {
        const double d = static_cast<double>(pred(x, y + 1)) - pred(x, y);
        tv_y += std::abs(d);
        const double g = weights.w_tv * sign(d) / static_cast<double>(ny);
        r.gradient[pred.index(x, y + 1)] += g;
        r.gradient[pred.index(x, y)] -= g;
      }
    }
  }
  const double tv = (nx ? tv_x / nx : 0.0) + (ny ? tv_y / ny : 0.0);

  for (std::size_t i = 0; i < n; ++i) {
    const double d_dice = den > 0.0 ? -(2.0 * t[i] * den - num) / (den * den) : 0.0;
    const double d_l1 = sign(static_cast<double>(p[i]) - t[i]) / static_cast<double>(n);
    r.gradient[i] += weights.w_dice * d_dice + weights.w_l1 * d_l1;
  }
  r.terms = {{"dice", dice}, {"l1", l1}, {"tv", tv}};
  r.total = weights.w_dice * dice + weights.w_l1 * l1 + weights.w_tv * tv;
  return r;
}

LossReport reconstruction_loss(const LinearImage& pred, const LinearImage& ref,
                               const std::optional<BinaryMask>& sup_mask) {
  require_same_shape(pred, ref, "reconstruction_loss");
  const BinaryMask mask =
      sup_mask ? *sup_mask : BinaryMask(pred.width(), pred.height(), 1);
  require_same_shape(pred, mask, "reconstruction_loss");
  LossReport r;
  r.gradient.assign(pred.values().size(), 0.0);
  const std::size_t selected = count_set(mask);
  if (selected == 0) {
    r.terms = {{"l1", 0.0}, {"ssim", 1.0}};
    return r;
  }
  const double inv = 1.0 / (3.0 * static_cast<double>(selected));
  double l1 = 0.0;
  for (int y = 0; y < pred.height(); ++y) {
    for (int x = 0; x < pred.width(); ++x) {
      if (!mask(x, y)) continue;
      for (int c = 0; c < 3; ++c) {
        const double d = static_cast<double>(pred(x, y, c)) - ref(x, y, c);
        l1 += std::abs(d);
        r.gradient[pred.index(x, y, c)] = sign(d) * inv;
      }
    }
  }
  l1 *= inv;
  const double ssim = ssim_masked(pred, ref, mask);
  r.terms = {{"l1", l1}, {"ssim", ssim}};
  r.total = l1 + (1.0 - ssim);
  return r;
}

BinaryMask seam_ring(const BinaryMask& hole, int radius) {
  if (radius < 1) throw Error("seam_ring: radius must be >= 1");
  const int w = hole.width();
  const int h = hole.height();
  // Separable square dilation: rows, then columns.
  BinaryMask rows(w, h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!hole(x, y)) continue;
      for (int xx = std::max(0, x - radius); xx <= std::min(w - 1, x + radius); ++xx) {
        rows(xx, y) = 1;
      }
    }
  }
  BinaryMask ring(w, h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!rows(x, y)) continue;
      for (int yy = std::max(0, y - radius); yy <= std::min(h - 1, y + radius); ++yy) {
        ring(x, yy) = 1;
      }
    }
  }
  for (std::size_t i = 0; i < ring.pixel_count(); ++i) {
    if (hole.values()[i]) ring.values()[i] = 0;
  }
  return ring;
}

LossReport seam_loss(const LinearImage& pred, const LinearImage& input,
                     const BinaryMask& ring, double lambda_g) {
  require_same_shape(pred, input, "seam_loss");
  require_same_shape(pred, ring, "seam_loss");
  if (!(lambda_g >= 0.0)) throw Error("seam_loss: lambda_g must be >= 0");
  LossReport r;
  r.gradient.assign(pred.values().size(), 0.0);
  const std::size_t n = count_set(ring);
  if (n == 0) {
    r.terms = {{"color", 0.0}, {"gradient", 0.0}};
    return r;
  }
  const int w = pred.width();
  const int h = pred.height();
  const double inv = 1.0 / (3.0 * static_cast<double>(n));
  double color = 0.0, grad = 0.0;
  auto diff = [&](int x, int y, int c) {
    return static_cast<double>(pred(x, y, c)) - input(x, y, c);
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!ring(x, y)) continue;
      for (int c = 0; c < 3; ++c) {
        const double d = diff(x, y, c);
        color += std::abs(d);
        r.gradient[pred.index(x, y, c)] += sign(d) * inv;
        if (x + 1 < w) {
          const double g = diff(x + 1, y, c) - d;
          grad += std::abs(g);
          const double s = lambda_g * sign(g) * inv;
          r.gradient[pred.index(x + 1, y, c)] += s;
          r.gradient[pred.index(x, y, c)] -= s;
        }
        if (y + 1 < h) {
          const double g = diff(x, y + 1, c) - d;
          grad += std::abs(g);
          const double s = lambda_g * sign(g) * inv;
          r.gradient[pred.index(x, y + 1, c)] += s;
          r.gradient[pred.index(x, y, c)] -= s;
        }
      }
    }
  }
  color *= inv;
  grad *= inv;
  r.terms = {{"color", color}, {"gradient", grad}};
  r.total = color + lambda_g * grad;
  return r;
}

LossReport spec_penalty(const LinearImage& pred, double tau_m, double eps) {
  if (!(tau_m > 0.0 && tau_m < 1.0)) throw Error("spec_penalty: tau_m must lie in (0,1)");
  if (!(eps > 0.0)) throw Error("spec_penalty: eps must be > 0");
  LossReport r;
  r.gradient.assign(pred.values().size(), 0.0);
  std::size_t bright = 0;
  double sum = 0.0;
  for (int y = 0; y < pred.height(); ++y) {
    for (int x = 0; x < pred.width(); ++x) {
      const double b = (static_cast<double>(pred(x, y, 0)) + pred(x, y, 1) + pred(x, y, 2)) / 3.0;
      if (!(b > tau_m)) continue;
      ++bright;
      const double d = b - tau_m;
      const double charb = std::sqrt(d * d + eps * eps);
      sum += charb;
      const double g = d / charb / 3.0;
      for (int c = 0; c < 3; ++c) r.gradient[pred.index(x, y, c)] = g;
    }
  }
  if (bright > 0) {
    const double inv = 1.0 / static_cast<double>(bright);
    sum *= inv;
    for (double& g : r.gradient) g *= inv;
  }
  r.terms = {{"spec", sum}, {"bright_pixels", static_cast<double>(bright)}};
  r.total = sum;
  return r;
}

LossReport decoder_loss(const LinearImage& pred, const LinearImage& input,
                        const LinearImage& ref, const BinaryMask& hole,
                        const BinaryMask& sup, const LossWeights& weights) {
  weights.validate();
  const LossReport seam =
      seam_loss(pred, input, seam_ring(hole, weights.seam_radius), weights.lambda_g);
  const LossReport spec = spec_penalty(pred, weights.tau_m, weights.eps);
  const LossReport rgb = reconstruction_loss(pred, ref, sup);
  LossReport r;
  r.terms = {{"seam", seam.total}, {"spec", spec.total}, {"rgb", rgb.total}};
  r.total = weights.w_seam * seam.total + weights.w_spec * spec.total +
            weights.w_rgb * rgb.total;
  r.gradient.resize(seam.gradient.size());
  for (std::size_t i = 0; i < r.gradient.size(); ++i) {
    r.gradient[i] = weights.w_seam * seam.gradient[i] +
                    weights.w_spec * spec.gradient[i] +
                    weights.w_rgb * rgb.gradient[i];
  }
  return r;
}

FdCheckResult fd_check(std::span<float> params, std::span<const double> analytic,
                       const std::function<double()>& evaluate, double step,
                       const std::function<bool(std::size_t)>& skip) {
  if (params.size() != analytic.size()) {
    throw Error("fd_check: gradient length does not match parameter count");
  }
  if (!(step > 0.0)) throw Error("fd_check: step must be > 0");
  FdCheckResult result;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (skip && skip(i)) continue;
    const float original = params[i];
    const float hi = static_cast<float>(original + step);
    const float lo = static_cast<float>(original - step);
    params[i] = hi;
    const double f_hi = evaluate();
    params[i] = lo;
    const double f_lo = evaluate();
    params[i] = original;
    const double numeric = (f_hi - f_lo) / (static_cast<double>(hi) - lo);
    const double a = analytic[i];
    const double err = std::abs(a - numeric) /
                       std::max({std::abs(a), std::abs(numeric), 1e-6});
    ++result.checked;
    if (err > result.max_rel_error) {
      result.max_rel_error = err;
      result.worst_index = i;
    }
  }
  return result;
}

}  // namespace hlsynth
