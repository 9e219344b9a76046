#pragma once

#include <vector>

#include "pixdepth/nn.hpp"

namespace pixdepth {

struct LrSchedule {
  double base_lr = 0.05;
  long warmup_steps = 0;
  long total_steps = 1;
};

// Linear warm-up to base_lr over warmup_steps, then cosine annealing to
// exactly zero at the final step.
double lr_at(long step, const LrSchedule& schedule);

class SgdMomentum {
 public:
  SgdMomentum(double momentum, double weight_decay) : momentum_(momentum), weight_decay_(weight_decay) {}

  // v <- mu * v + (g + wd * w);  w <- w - lr * v. Arrays flagged no_decay
  // (BN affine parameters, biases) skip the decay term.
  void step(std::vector<ArrayRef>& params, double lr);

 private:
  double momentum_, weight_decay_;
  std::vector<Tensor> velocity_;

  std::vector<ArrayRef> velocity_refs(std::vector<ArrayRef>& params);

 public:
  // Exposed so checkpoints can carry optimizer state.
  std::vector<Tensor>& velocity() { return velocity_; }
  void ensure_buffers(const std::vector<ArrayRef>& params);
};

class Adam {
 public:
  Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(std::vector<ArrayRef>& params, double lr_scale = 1.0);

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<Tensor> m_, v_;
};

// Global gradient-norm clipping; no-op when max_norm <= 0.
void clip_grad_norm(std::vector<ArrayRef>& params, double max_norm);

}  // namespace pixdepth
