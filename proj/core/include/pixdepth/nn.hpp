#pragma once

#include <string>
#include <vector>

#include "pixdepth/rng.hpp"
#include "pixdepth/tensor.hpp"

namespace pixdepth {

// Named view of a model array. Trainable arrays carry a gradient buffer;
// running statistics are registered with trainable = false so they still
// take part in EMA updates and checkpoints.
struct ArrayRef {
  std::string name;
  Tensor* value = nullptr;
  Tensor* grad = nullptr;
  bool trainable = false;
  bool no_decay = false;
};

struct Workspace {
  Tensor col;   // im2col buffer, K x (N*Ho*Wo)
  Tensor dcol;
};

// 3x3 / 1x1 convolution over NCHW batches via batch-wide im2col and a
// single GEMM per call.
class Conv2d {
 public:
  Conv2d(std::string name, int in_ch, int out_ch, int ksize, int stride, int pad, bool with_bias);

  void init(Rng& rng);  // He-normal weights, zero bias
  int out_extent(int in_extent) const { return (in_extent + 2 * pad_ - ksize_) / stride_ + 1; }

  void forward(const Tensor& x, Tensor& y, Workspace& ws) const;
  // Accumulates weight/bias gradients; writes input gradient when dx != null.
  void backward(const Tensor& x, const Tensor& dy, Tensor* dx, Workspace& ws);

  void collect(std::vector<ArrayRef>& out);
  long col_elems(int n, int in_extent) const;

  int in_ch() const { return in_ch_; }
  int out_ch() const { return out_ch_; }

 private:
  void im2col(const Tensor& x, Workspace& ws) const;

  std::string name_;
  int in_ch_, out_ch_, ksize_, stride_, pad_;
  bool with_bias_;
  Tensor weight_, weight_grad_;  // (out_ch, in_ch, k, k)
  Tensor bias_, bias_grad_;      // (out_ch)
};

struct BnCache {
  Tensor xhat;              // same shape as input
  std::vector<double> invstd;
};

class BatchNorm2d {
 public:
  BatchNorm2d(std::string name, int channels, double eps = 1e-5, double momentum = 0.1);

  // training: batch statistics are used for normalization and folded into
  // the running estimates; eval: running statistics only.
  void forward(const Tensor& x, Tensor& y, bool training, BnCache* cache);
  void backward(const Tensor& dy, const BnCache& cache, Tensor& dx);

  void collect(std::vector<ArrayRef>& out);
  int channels() const { return channels_; }

 private:
  std::string name_;
  int channels_;
  double eps_, momentum_;
  Tensor gamma_, gamma_grad_, beta_, beta_grad_;
  Tensor running_mean_, running_var_;
};

void relu_forward(const Tensor& x, Tensor& y);
// Uses the forward output as the activity mask.
void relu_backward(const Tensor& y, const Tensor& dy, Tensor& dx);

// Pixel-center bilinear upsampling of NCHW tensors, plus its adjoint.
void upsample_bilinear_forward(const Tensor& x, Tensor& y);
void upsample_bilinear_backward(const Tensor& dy, Tensor& dx);

}  // namespace pixdepth
