#include "pixdepth/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace pixdepth {

double lr_at(long step, const LrSchedule& schedule) {
  if (step < 0) throw std::invalid_argument("lr_at: negative step");
  if (schedule.total_steps < 1 || schedule.warmup_steps < 0 ||
      schedule.warmup_steps >= schedule.total_steps)
    throw std::invalid_argument("lr_at: warm-up must be shorter than the total schedule");

  if (step < schedule.warmup_steps)
    return schedule.base_lr * static_cast<double>(step + 1) /
           static_cast<double>(schedule.warmup_steps);

  const long span = schedule.total_steps - 1 - schedule.warmup_steps;
  const double progress =
      span > 0 ? static_cast<double>(step - schedule.warmup_steps) / static_cast<double>(span)
               : 1.0;
  constexpr double kPi = 3.141592653589793238462643383279502884;
  return schedule.base_lr * 0.5 * (1.0 + std::cos(kPi * progress));
}

void SgdMomentum::ensure_buffers(const std::vector<ArrayRef>& params) {
  if (!velocity_.empty()) return;
  for (const ArrayRef& p : params) {
    if (!p.trainable) continue;
    velocity_.emplace_back(p.value->shape());
  }
}

void SgdMomentum::step(std::vector<ArrayRef>& params, double lr) {
  ensure_buffers(params);
  std::size_t vi = 0;
  for (ArrayRef& p : params) {
    if (!p.trainable) continue;
    Tensor& v = velocity_[vi++];
    const long n = p.value->numel();
    double* w = p.value->data();
    const double* g = p.grad->data();
    double* vel = v.data();
    const double wd = p.no_decay ? 0.0 : weight_decay_;
    for (long i = 0; i < n; ++i) {
      vel[i] = momentum_ * vel[i] + g[i] + wd * w[i];
      w[i] -= lr * vel[i];
    }
  }
}

void Adam::step(std::vector<ArrayRef>& params, double lr_scale) {
  if (m_.empty()) {
    for (const ArrayRef& p : params) {
      if (!p.trainable) continue;
      m_.emplace_back(p.value->shape());
      v_.emplace_back(p.value->shape());
    }
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  std::size_t idx = 0;
  for (ArrayRef& p : params) {
    if (!p.trainable) continue;
    Tensor& m = m_[idx];
    Tensor& v = v_[idx];
    ++idx;
    const long n = p.value->numel();
    double* w = p.value->data();
    const double* g = p.grad->data();
    for (long i = 0; i < n; ++i) {
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      w[i] -= lr_ * lr_scale * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

void clip_grad_norm(std::vector<ArrayRef>& params, double max_norm) {
  if (max_norm <= 0.0) return;
  double sq = 0.0;
  for (const ArrayRef& p : params) {
    if (!p.trainable) continue;
    const double* g = p.grad->data();
    for (long i = 0; i < p.grad->numel(); ++i) sq += g[i] * g[i];
  }
  const double norm = std::sqrt(sq);
  if (norm <= max_norm) return;
  const double scale = max_norm / norm;
  for (ArrayRef& p : params) {
    if (!p.trainable) continue;
    double* g = p.grad->data();
    for (long i = 0; i < p.grad->numel(); ++i) g[i] *= scale;
  }
}

}  // namespace pixdepth
