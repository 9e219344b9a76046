#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "pixdepth/loss.hpp"
#include "pixdepth/nn.hpp"
#include "pixdepth/tensor.hpp"

namespace pixdepth {

struct EncoderConfig {
  int input_size = 56;
  std::vector<int> stage_channels = {16, 32, 64};
  int stride = 8;            // total downsampling, must equal 2^stages
  int projector_hidden = 64;
  int projector_out = 24;
  bool predictor = false;    // extra online-branch head, off by default
};

void validate(const EncoderConfig& cfg);

// Forward-pass state kept for the backward pass of one batch.
struct EncoderCache {
  std::vector<Tensor> stage_in;   // input to each stage conv
  std::vector<Tensor> conv_out;
  std::vector<Tensor> relu_out;
  std::vector<BnCache> bn;
  Tensor proj_in;                 // backbone output (= last relu_out)
  Tensor proj_conv1, proj_relu;
  BnCache proj_bn;
};

// Small stride-8 convnet (conv3x3/s2 + BN + ReLU per stage) followed by a
// two-layer 1x1 pixel projector. Deterministic given weights and inputs.
class PixelEncoder {
 public:
  PixelEncoder(const EncoderConfig& cfg, std::uint64_t init_seed);

  // images: N x 3 x S x S. Returns projected features N x C x g x g and
  // optionally the pre-projector backbone activations. training selects
  // batch-statistics BN plus gradient caching.
  void forward(const Tensor& images, bool training, Tensor& projected,
               Tensor* backbone = nullptr, EncoderCache* cache = nullptr);

  // Accumulates parameter gradients from d(loss)/d(projected).
  void backward(const Tensor& dprojected, const EncoderCache& cache);

  void zero_grad();
  std::vector<ArrayRef> arrays();  // every named array, trainable or not

  const EncoderConfig& config() const { return cfg_; }
  int feature_grid(int input_extent) const { return input_extent / cfg_.stride; }

 private:
  EncoderConfig cfg_;
  std::vector<Conv2d> stage_conv_;
  std::vector<BatchNorm2d> stage_bn_;
  Conv2d proj_conv1_;
  BatchNorm2d proj_bn_;
  Conv2d proj_conv2_;
  Workspace ws_;
};

// Optional online-branch prediction head (1x1 conv -> BN -> ReLU -> 1x1
// conv) applied on top of the projector when EncoderConfig::predictor is
// set. The target branch never has one, so it lives outside PixelEncoder.
class PredictorHead {
 public:
  PredictorHead(int channels, int hidden, std::uint64_t init_seed);

  void forward(const Tensor& projected, bool training, Tensor& out, EncoderCache* cache = nullptr);
  void backward(const Tensor& dout, const EncoderCache& cache, Tensor& dprojected);
  std::vector<ArrayRef> arrays();

 private:
  Conv2d conv1_;
  BatchNorm2d bn_;
  Conv2d conv2_;
  Workspace ws_;
};

// target <- online + m * (target - online), element-wise over every array.
// m = 1 leaves the target untouched, m = 0 copies the online weights.
void ema_update(std::vector<ArrayRef>& online, std::vector<ArrayRef>& target, double m);

// Copies every array value (initial target synchronization).
void copy_arrays(std::vector<ArrayRef>& src, std::vector<ArrayRef>& dst);

// Extracts image n of a batch (N x C x g x g) as a FeatureMap.
FeatureMap slice_feature_map(const Tensor& batch, long n);
// Writes a FeatureMap-shaped gradient back into batch slot n.
void scatter_feature_grad(const FeatureMap& grad, Tensor& batch, long n);

}  // namespace pixdepth
