#include "hlsynth/tokens.hpp"

#include <cmath>
#include <random>
#include <string>

namespace hlsynth {
namespace {

using RowMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kCosineEps = 1e-8;
constexpr float kLayerNormEps = 1e-5f;

class UniformSource {
 public:
  explicit UniformSource(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32), 0x746f6b6eu};
    gen_.seed(seq);
  }

  // Uniform in [-bound, bound).
  float next(double bound) {
    const double u = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    return static_cast<float>((2.0 * u - 1.0) * bound);
  }

 private:
  std::mt19937_64 gen_;
};

Eigen::MatrixXf xavier(UniformSource& rng, int rows, int cols) {
  const double bound = std::sqrt(6.0 / (rows + cols));
  Eigen::MatrixXf m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = rng.next(bound);
  }
  return m;
}

void require_shape(const TokenField& a, const TokenField& b, const char* what) {
  if (!a.same_shape(b)) throw Error(std::string(what) + ": token shape mismatch");
}

void require_mask(const TokenField& f, const PatchMask& m, const char* what) {
  if (m.width() != f.wp() || m.height() != f.hp()) {
    throw Error(std::string(what) + ": patch mask does not match token grid");
  }
}

bool masked(const PatchMask& m, int i) { return m.values()[i] != 0; }

RowMatrix layer_norm(const RowMatrix& x, const Eigen::VectorXf& gamma,
                     const Eigen::VectorXf& beta) {
  RowMatrix out(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    double mean = 0.0;
    for (Eigen::Index c = 0; c < x.cols(); ++c) mean += x(r, c);
    mean /= static_cast<double>(x.cols());
    double var = 0.0;
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      const double d = x(r, c) - mean;
      var += d * d;
    }
    var /= static_cast<double>(x.cols());
    const float inv = static_cast<float>(1.0 / std::sqrt(var + kLayerNormEps));
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      out(r, c) = (x(r, c) - static_cast<float>(mean)) * inv * gamma[c] + beta[c];
    }
  }
  return out;
}

float gelu(float x) {
  constexpr float k = 0.7978845608028654f;  // sqrt(2/pi)
  return 0.5f * x * (1.0f + std::tanh(k * (x + 0.044715f * x * x * x)));
}

RowMatrix attention(const RowMatrix& y, const TransformerLayer& layer, int heads) {
  const int n = static_cast<int>(y.rows());
  const int dim = static_cast<int>(y.cols());
  const int head_dim = dim / heads;
  const RowMatrix q = (y * layer.wq).rowwise() + layer.bq.transpose();
  const RowMatrix k = (y * layer.wk).rowwise() + layer.bk.transpose();
  const RowMatrix v = (y * layer.wv).rowwise() + layer.bv.transpose();
  const float scale = 1.0f / std::sqrt(static_cast<float>(head_dim));

  RowMatrix mixed(n, dim);
  for (int h = 0; h < heads; ++h) {
    const auto qh = q.middleCols(h * head_dim, head_dim);
    const auto kh = k.middleCols(h * head_dim, head_dim);
    const auto vh = v.middleCols(h * head_dim, head_dim);
    RowMatrix scores = (qh * kh.transpose()) * scale;
    for (int r = 0; r < n; ++r) {
      const float peak = scores.row(r).maxCoeff();
      scores.row(r) = (scores.row(r).array() - peak).exp();
      scores.row(r) /= scores.row(r).sum();
    }
    mixed.middleCols(h * head_dim, head_dim) = scores * vh;
  }
  return (mixed * layer.wo).rowwise() + layer.bo.transpose();
}

}  // namespace

TokenField::TokenField(int hp, int wp, int dim, float fill)
    : hp_(hp), wp_(wp), dim_(dim) {
  if (hp < 1 || wp < 1 || dim < 1) throw Error("token grid dimensions must be positive");
  data_.assign(static_cast<std::size_t>(hp) * wp * dim, fill);
}

void TokenGrid::validate() const {
  require_mask(tokens, mask, "token grid");
  for (float v : tokens.values()) {
    if (!std::isfinite(v)) throw Error("token grid holds a non-finite value");
  }
}

void InpainterConfig::validate() const {
  if (dim < 1 || heads < 1 || dim % heads != 0) {
    throw Error("inpainter: dim must be a positive multiple of heads");
  }
  if (dim % 4 != 0) throw Error("inpainter: dim must be divisible by 4");
  if (depth < 1) throw Error("inpainter: depth must be >= 1");
  if (ffn_multiplier < 1) throw Error("inpainter: ffn multiplier must be >= 1");
  if (neighborhood < 3 || neighborhood % 2 == 0) {
    throw Error("inpainter: neighborhood must be odd and >= 3");
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw Error("inpainter: lambda must lie in [0,1]");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error("inpainter: alpha must lie in [0,1]");
}

InpainterWeights InpainterWeights::init(const InpainterConfig& config) {
  config.validate();
  UniformSource rng(config.seed);
  InpainterWeights w;
  w.config = config;
  const int dim = config.dim;
  const int hidden = dim * config.ffn_multiplier;
  w.mask_token.resize(dim);
  for (float& v : w.mask_token) v = rng.next(0.02 * std::sqrt(3.0));
  for (int i = 0; i < config.depth; ++i) {
    TransformerLayer l;
    l.ln1_gamma = Eigen::VectorXf::Ones(dim);
    l.ln1_beta = Eigen::VectorXf::Zero(dim);
    l.wq = xavier(rng, dim, dim);
    l.wk = xavier(rng, dim, dim);
    l.wv = xavier(rng, dim, dim);
    l.wo = xavier(rng, dim, dim);
    l.bq = l.bk = l.bv = l.bo = Eigen::VectorXf::Zero(dim);
    l.ln2_gamma = Eigen::VectorXf::Ones(dim);
    l.ln2_beta = Eigen::VectorXf::Zero(dim);
    l.w1 = xavier(rng, dim, hidden);
    l.b1 = Eigen::VectorXf::Zero(hidden);
    l.w2 = xavier(rng, hidden, dim);
    l.b2 = Eigen::VectorXf::Zero(dim);
    w.layers.push_back(std::move(l));
  }
  return w;
}

TokenField local_mean_prior(const TokenGrid& grid, int window) {
  if (window < 3 || window % 2 == 0) throw Error("local mean window must be odd and >= 3");
  grid.validate();
  const TokenField& f = grid.tokens;
  const int dim = f.dim();
  const int half = window / 2;

  std::vector<double> global(dim, 0.0);
  int visible = 0;
  for (int i = 0; i < f.count(); ++i) {
    if (masked(grid.mask, i)) continue;
    ++visible;
    for (int c = 0; c < dim; ++c) global[c] += f.token(i)[c];
  }

  TokenField out(f.hp(), f.wp(), dim, 0.0f);
  std::vector<double> acc(dim);
  for (int r = 0; r < f.hp(); ++r) {
    for (int col = 0; col < f.wp(); ++col) {
      std::fill(acc.begin(), acc.end(), 0.0);
      int n = 0;
      for (int dr = -half; dr <= half; ++dr) {
        for (int dc = -half; dc <= half; ++dc) {
          const int rr = r + dr;
          const int cc = col + dc;
          if ((dr == 0 && dc == 0) || rr < 0 || cc < 0 || rr >= f.hp() ||
              cc >= f.wp() || grid.mask(cc, rr)) {
            continue;
          }
          ++n;
          const auto t = f.token(rr, cc);
          for (int c = 0; c < dim; ++c) acc[c] += t[c];
        }
      }
      auto dst = out.token(r, col);
      if (n > 0) {
        for (int c = 0; c < dim; ++c) dst[c] = static_cast<float>(acc[c] / n);
      } else if (visible > 0) {
        for (int c = 0; c < dim; ++c) dst[c] = static_cast<float>(global[c] / visible);
      }
    }
  }
  return out;
}

TokenField positional_encoding(int hp, int wp, int dim) {
  if (dim < 4 || dim % 4 != 0) {
    throw Error("positional encoding: dim must be a positive multiple of 4");
  }
  const int half = dim / 2;
  TokenField out(hp, wp, dim);
  for (int r = 0; r < hp; ++r) {
    for (int c = 0; c < wp; ++c) {
      auto t = out.token(r, c);
      for (int i = 0; i < half / 2; ++i) {
        const double freq = std::pow(10000.0, -2.0 * i / half);
        t[2 * i] = static_cast<float>(std::sin(r * freq));
        t[2 * i + 1] = static_cast<float>(std::cos(r * freq));
        t[half + 2 * i] = static_cast<float>(std::sin(c * freq));
        t[half + 2 * i + 1] = static_cast<float>(std::cos(c * freq));
      }
    }
  }
  return out;
}

TokenField build_seed(const TokenGrid& grid, const TokenField& local_mean,
                      const TokenField& pos, std::span<const float> mask_token,
                      double lambda) {
  grid.validate();
  require_shape(grid.tokens, local_mean, "build_seed");
  require_shape(grid.tokens, pos, "build_seed");
  if (static_cast<int>(mask_token.size()) != grid.tokens.dim()) {
    throw Error("build_seed: mask token length does not match dim");
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw Error("build_seed: lambda must lie in [0,1]");
  const float lam = static_cast<float>(lambda);
  const int dim = grid.tokens.dim();
  TokenField out(grid.tokens.hp(), grid.tokens.wp(), dim);
  for (int i = 0; i < out.count(); ++i) {
    auto dst = out.token(i);
    const auto e = pos.token(i);
    if (masked(grid.mask, i)) {
      const auto m = local_mean.token(i);
      for (int c = 0; c < dim; ++c) {
        dst[c] = (lam * mask_token[c] + (1.0f - lam) * m[c]) + e[c];
      }
    } else {
      const auto f = grid.tokens.token(i);
      for (int c = 0; c < dim; ++c) dst[c] = f[c] + e[c];
    }
  }
  return out;
}

TokenField vit_forward(const TokenField& seed, const InpainterWeights& weights) {
  const int dim = weights.config.dim;
  if (seed.dim() != dim) throw Error("vit_forward: token dim does not match weights");
  const int n = seed.count();
  RowMatrix x = Eigen::Map<const RowMatrix>(seed.values().data(), n, dim);
  for (std::size_t li = 0; li < weights.layers.size(); ++li) {
    const auto& layer = weights.layers[li];
    x += attention(layer_norm(x, layer.ln1_gamma, layer.ln1_beta), layer,
                   weights.config.heads);
    RowMatrix hidden = (layer_norm(x, layer.ln2_gamma, layer.ln2_beta) * layer.w1)
                           .rowwise() + layer.b1.transpose();
    hidden = hidden.unaryExpr(&gelu);
    x += (hidden * layer.w2).rowwise() + layer.b2.transpose();
    if (!x.allFinite()) {
      throw Error("vit_forward: non-finite activation after layer " +
                  std::to_string(li));
    }
  }
  TokenField out(seed.hp(), seed.wp(), dim);
  Eigen::Map<RowMatrix>(out.values().data(), n, dim) = x;
  return out;
}

TokenField merge_completed(const TokenGrid& raw, const TokenField& refined) {
  raw.validate();
  require_shape(raw.tokens, refined, "merge_completed");
  TokenField out = raw.tokens;
  for (int i = 0; i < out.count(); ++i) {
    if (!masked(raw.mask, i)) continue;
    const auto src = refined.token(i);
    std::copy(src.begin(), src.end(), out.token(i).begin());
  }
  return out;
}

LossReport inpainting_loss(const TokenField& pred, const TokenField& target,
                           const PatchMask& patch_train, double alpha) {
  require_shape(pred, target, "inpainting_loss");
  require_mask(pred, patch_train, "inpainting_loss");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error("inpainting_loss: alpha must lie in [0,1]");
  const int dim = pred.dim();
  LossReport report;
  report.gradient.assign(pred.values().size(), 0.0);
  int selected = 0;
  for (int i = 0; i < pred.count(); ++i) selected += masked(patch_train, i);
  double l1_sum = 0.0;
  double cos_sum = 0.0;
  if (selected > 0) {
    const double inv = 1.0 / selected;
    for (int i = 0; i < pred.count(); ++i) {
      if (!masked(patch_train, i)) continue;
      const auto p = pred.token(i);
      const auto t = target.token(i);
      double l1 = 0.0, dot = 0.0, pp = 0.0, tt = 0.0;
      for (int c = 0; c < dim; ++c) {
        const double pv = p[c], tv = t[c];
        l1 += std::abs(pv - tv);
        dot += pv * tv;
        pp += pv * pv;
        tt += tv * tv;
      }
      const double pn = std::sqrt(pp);
      const double tn = std::sqrt(tt);
      const double denom = pn * tn + kCosineEps;
      const double cos = dot / denom;
      l1_sum += l1;
      cos_sum += 1.0 - cos;

      double* g = report.gradient.data() + static_cast<std::size_t>(i) * dim;
      for (int c = 0; c < dim; ++c) {
        const double diff = static_cast<double>(p[c]) - t[c];
        const double sign = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
        double dcos = t[c] / denom;
        if (pn > 0.0) dcos -= dot * tn * (p[c] / pn) / (denom * denom);
        g[c] = inv * (alpha * sign - (1.0 - alpha) * dcos);
      }
    }
    l1_sum *= inv;
    cos_sum *= inv;
  }
  report.terms["l1"] = l1_sum;
  report.terms["cosine"] = cos_sum;
  report.total = alpha * l1_sum + (1.0 - alpha) * cos_sum;
  return report;
}

InpaintResult run_inpainter(const TokenGrid& grid,
                            const InpainterWeights& weights,
                            bool use_positional) {
  const auto& cfg = weights.config;
  grid.validate();
  if (grid.tokens.dim() != cfg.dim) {
    throw Error("run_inpainter: token dim does not match config");
  }
  InpaintResult r;
  r.local_mean = local_mean_prior(grid, cfg.neighborhood);
  r.positional = use_positional
                     ? positional_encoding(grid.tokens.hp(), grid.tokens.wp(), cfg.dim)
                     : TokenField(grid.tokens.hp(), grid.tokens.wp(), cfg.dim, 0.0f);
  r.seed = build_seed(grid, r.local_mean, r.positional, weights.mask_token, cfg.lambda);
  r.refined = vit_forward(r.seed, weights);
  r.completed = merge_completed(grid, r.refined);
  return r;
}

}  // namespace hlsynth
