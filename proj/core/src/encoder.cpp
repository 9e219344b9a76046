#include "pixdepth/encoder.hpp"

#include <cmath>
#include <stdexcept>

namespace pixdepth {

void validate(const EncoderConfig& cfg) {
  if (cfg.stage_channels.empty())
    throw std::invalid_argument("encoder config: at least one stage required");
  if ((1 << cfg.stage_channels.size()) != cfg.stride)
    throw std::invalid_argument("encoder config: stride must equal 2^stages (got stride " +
                                std::to_string(cfg.stride) + " with " +
                                std::to_string(cfg.stage_channels.size()) + " stages)");
  if (cfg.input_size % cfg.stride != 0)
    throw std::invalid_argument("encoder config: input_size not divisible by stride");
  if (cfg.projector_hidden < 1 || cfg.projector_out < 1)
    throw std::invalid_argument("encoder config: projector channels must be >= 1");
  for (int c : cfg.stage_channels)
    if (c < 1) throw std::invalid_argument("encoder config: stage channels must be >= 1");
}

PixelEncoder::PixelEncoder(const EncoderConfig& cfg, std::uint64_t init_seed)
    : cfg_(cfg),
      proj_conv1_("proj.conv1", cfg.stage_channels.empty() ? 1 : cfg.stage_channels.back(),
                  cfg.projector_hidden, 1, 1, 0, false),
      proj_bn_("proj.bn", cfg.projector_hidden),
      proj_conv2_("proj.conv2", cfg.projector_hidden, cfg.projector_out, 1, 1, 0, true) {
  validate(cfg_);
  int in_ch = 3;
  for (std::size_t i = 0; i < cfg_.stage_channels.size(); ++i) {
    const int out_ch = cfg_.stage_channels[i];
    const std::string base = "stage" + std::to_string(i);
    stage_conv_.emplace_back(base + ".conv", in_ch, out_ch, 3, 2, 1, false);
    stage_bn_.emplace_back(base + ".bn", out_ch);
    in_ch = out_ch;
  }
  Rng rng(mix_seed({init_seed, 0x9c0de11eULL}));
  for (auto& conv : stage_conv_) conv.init(rng);
  proj_conv1_.init(rng);
  proj_conv2_.init(rng);
}

void PixelEncoder::forward(const Tensor& images, bool training, Tensor& projected,
                           Tensor* backbone, EncoderCache* cache) {
  if (images.ndim() != 4 || images.dim(1) != 3)
    throw std::invalid_argument("encoder forward: expected N x 3 x S x S input");
  if (images.dim(2) % cfg_.stride != 0 || images.dim(3) % cfg_.stride != 0)
    throw std::invalid_argument("encoder forward: input extent not divisible by stride");

  const std::size_t stages = stage_conv_.size();
  if (cache) {
    cache->stage_in.resize(stages);
    cache->conv_out.resize(stages);
    cache->relu_out.resize(stages);
    cache->bn.resize(stages);
  }

  Tensor x = images;
  for (std::size_t i = 0; i < stages; ++i) {
    if (cache) cache->stage_in[i] = x;
    Tensor conv_out, bn_out;
    stage_conv_[i].forward(x, conv_out, ws_);
    stage_bn_[i].forward(conv_out, bn_out, training, cache ? &cache->bn[i] : nullptr);
    Tensor relu_out;
    relu_forward(bn_out, relu_out);
    if (cache) {
      cache->conv_out[i] = std::move(conv_out);
      cache->relu_out[i] = relu_out;
    }
    x = std::move(relu_out);
  }

  if (backbone) *backbone = x;
  if (cache) cache->proj_in = x;

  Tensor p1, p1bn, p1relu;
  proj_conv1_.forward(x, p1, ws_);
  proj_bn_.forward(p1, p1bn, training, cache ? &cache->proj_bn : nullptr);
  relu_forward(p1bn, p1relu);
  if (cache) {
    cache->proj_conv1 = std::move(p1);
    cache->proj_relu = p1relu;
  }
  proj_conv2_.forward(p1relu, projected, ws_);
}

void PixelEncoder::backward(const Tensor& dprojected, const EncoderCache& cache) {
  Tensor d_relu;
  proj_conv2_.backward(cache.proj_relu, dprojected, &d_relu, ws_);
  Tensor d_p1bn;
  relu_backward(cache.proj_relu, d_relu, d_p1bn);
  Tensor d_p1;
  proj_bn_.backward(d_p1bn, cache.proj_bn, d_p1);
  Tensor dx;
  proj_conv1_.backward(cache.proj_in, d_p1, &dx, ws_);

  for (int i = static_cast<int>(stage_conv_.size()) - 1; i >= 0; --i) {
    const auto ui = static_cast<std::size_t>(i);
    Tensor d_bn_out;
    relu_backward(cache.relu_out[ui], dx, d_bn_out);
    Tensor d_conv_out;
    stage_bn_[ui].backward(d_bn_out, cache.bn[ui], d_conv_out);
    // Input gradient is not needed below the first stage.
    Tensor d_in;
    stage_conv_[ui].backward(cache.stage_in[ui], d_conv_out, i > 0 ? &d_in : nullptr, ws_);
    if (i > 0) dx = std::move(d_in);
  }
}

void PixelEncoder::zero_grad() {
  for (ArrayRef& a : arrays())
    if (a.grad) a.grad->fill(0.0);
}

std::vector<ArrayRef> PixelEncoder::arrays() {
  std::vector<ArrayRef> out;
  for (std::size_t i = 0; i < stage_conv_.size(); ++i) {
    stage_conv_[i].collect(out);
    stage_bn_[i].collect(out);
  }
  proj_conv1_.collect(out);
  proj_bn_.collect(out);
  proj_conv2_.collect(out);
  return out;
}

PredictorHead::PredictorHead(int channels, int hidden, std::uint64_t init_seed)
    : conv1_("pred.conv1", channels, hidden, 1, 1, 0, false),
      bn_("pred.bn", hidden),
      conv2_("pred.conv2", hidden, channels, 1, 1, 0, true) {
  Rng rng(mix_seed({init_seed, 0x9ed1c70eULL}));
  conv1_.init(rng);
  conv2_.init(rng);
}

void PredictorHead::forward(const Tensor& projected, bool training, Tensor& out,
                            EncoderCache* cache) {
  if (cache) cache->proj_in = projected;
  Tensor h, hbn, hrelu;
  conv1_.forward(projected, h, ws_);
  bn_.forward(h, hbn, training, cache ? &cache->proj_bn : nullptr);
  relu_forward(hbn, hrelu);
  if (cache) {
    cache->proj_conv1 = std::move(h);
    cache->proj_relu = hrelu;
  }
  conv2_.forward(hrelu, out, ws_);
}

void PredictorHead::backward(const Tensor& dout, const EncoderCache& cache, Tensor& dprojected) {
  Tensor d_relu;
  conv2_.backward(cache.proj_relu, dout, &d_relu, ws_);
  Tensor d_bn;
  relu_backward(cache.proj_relu, d_relu, d_bn);
  Tensor d_h;
  bn_.backward(d_bn, cache.proj_bn, d_h);
  conv1_.backward(cache.proj_in, d_h, &dprojected, ws_);
}

std::vector<ArrayRef> PredictorHead::arrays() {
  std::vector<ArrayRef> out;
  conv1_.collect(out);
  bn_.collect(out);
  conv2_.collect(out);
  return out;
}

void ema_update(std::vector<ArrayRef>& online, std::vector<ArrayRef>& target, double m) {
  if (m < 0.0 || m > 1.0) throw std::invalid_argument("ema_update: momentum outside [0,1]");
  if (online.size() != target.size())
    throw std::invalid_argument("ema_update: array sets differ in size");
  for (std::size_t i = 0; i < online.size(); ++i) {
    const ArrayRef& o = online[i];
    ArrayRef& t = target[i];
    if (o.name != t.name || !o.value->same_shape(*t.value))
      throw std::invalid_argument("ema_update: structural mismatch at array '" + o.name + "'");
    if (m == 1.0) continue;
    if (m == 0.0) {
      *t.value = *o.value;
      continue;
    }
    const double* ov = o.value->data();
    double* tv = t.value->data();
    const long n = o.value->numel();
    for (long j = 0; j < n; ++j) tv[j] = ov[j] + m * (tv[j] - ov[j]);
  }
}

void copy_arrays(std::vector<ArrayRef>& src, std::vector<ArrayRef>& dst) {
  if (src.size() != dst.size()) throw std::invalid_argument("copy_arrays: size mismatch");
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (src[i].name != dst[i].name)
      throw std::invalid_argument("copy_arrays: name mismatch at '" + src[i].name + "'");
    *dst[i].value = *src[i].value;
  }
}

FeatureMap slice_feature_map(const Tensor& batch, long n) {
  const long c = batch.dim(1), h = batch.dim(2), w = batch.dim(3);
  FeatureMap f(static_cast<int>(c), static_cast<int>(h), static_cast<int>(w));
  for (long ch = 0; ch < c; ++ch)
    for (long p = 0; p < h * w; ++p)
      f.at(static_cast<int>(ch), static_cast<int>(p)) = batch.data()[((n * c + ch) * h * w) + p];
  return f;
}

void scatter_feature_grad(const FeatureMap& grad, Tensor& batch, long n) {
  const long c = batch.dim(1), h = batch.dim(2), w = batch.dim(3);
  if (grad.channels != c || grad.pixels() != h * w)
    throw std::invalid_argument("scatter_feature_grad: shape mismatch");
  for (long ch = 0; ch < c; ++ch)
    for (long p = 0; p < h * w; ++p)
      batch.data()[((n * c + ch) * h * w) + p] = grad.at(static_cast<int>(ch), static_cast<int>(p));
}

}  // namespace pixdepth
