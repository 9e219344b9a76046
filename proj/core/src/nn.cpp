#include "pixdepth/nn.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pixdepth {

using MatrixRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRM = Eigen::Map<MatrixRM>;
using ConstMapRM = Eigen::Map<const MatrixRM>;

Conv2d::Conv2d(std::string name, int in_ch, int out_ch, int ksize, int stride, int pad,
               bool with_bias)
    : name_(std::move(name)),
      in_ch_(in_ch),
      out_ch_(out_ch),
      ksize_(ksize),
      stride_(stride),
      pad_(pad),
      with_bias_(with_bias),
      weight_({out_ch, in_ch, ksize, ksize}),
      weight_grad_({out_ch, in_ch, ksize, ksize}),
      bias_({with_bias ? out_ch : 0}),
      bias_grad_({with_bias ? out_ch : 0}) {
  if (in_ch < 1 || out_ch < 1 || ksize < 1 || stride < 1 || pad < 0)
    throw std::invalid_argument("conv: bad layer geometry");
}

void Conv2d::init(Rng& rng) {
  const double stddev = std::sqrt(2.0 / (in_ch_ * ksize_ * ksize_));
  for (long i = 0; i < weight_.numel(); ++i) weight_[i] = rng.normal(0.0, stddev);
  bias_.fill(0.0);
}

long Conv2d::col_elems(int n, int in_extent) const {
  const long p = out_extent(in_extent);
  return static_cast<long>(in_ch_) * ksize_ * ksize_ * n * p * p;
}

void Conv2d::im2col(const Tensor& x, Workspace& ws) const {
  const long n = x.dim(0);
  const long h = x.dim(2), w = x.dim(3);
  const long ho = out_extent(static_cast<int>(h)), wo = out_extent(static_cast<int>(w));
  const long k2 = static_cast<long>(ksize_) * ksize_;
  const long cols = n * ho * wo;
  if (ws.col.numel() < in_ch_ * k2 * cols) ws.col = Tensor({in_ch_ * k2, cols});

  double* col = ws.col.data();
  for (long img = 0; img < n; ++img) {
    for (long c = 0; c < in_ch_; ++c) {
      const double* src = x.data() + (img * in_ch_ + c) * h * w;
      for (int kr = 0; kr < ksize_; ++kr) {
        for (int kc = 0; kc < ksize_; ++kc) {
          double* dst = col + ((c * ksize_ + kr) * ksize_ + kc) * cols + img * ho * wo;
          for (long r = 0; r < ho; ++r) {
            const long sr = r * stride_ + kr - pad_;
            if (sr < 0 || sr >= h) {
              for (long cc = 0; cc < wo; ++cc) dst[r * wo + cc] = 0.0;
              continue;
            }
            const double* row = src + sr * w;
            for (long cc = 0; cc < wo; ++cc) {
              const long sc = cc * stride_ + kc - pad_;
              dst[r * wo + cc] = (sc >= 0 && sc < w) ? row[sc] : 0.0;
            }
          }
        }
      }
    }
  }
}

void Conv2d::forward(const Tensor& x, Tensor& y, Workspace& ws) const {
  if (x.dim(1) != in_ch_) throw std::invalid_argument("conv " + name_ + ": channel mismatch");
  const long n = x.dim(0);
  const long ho = out_extent(static_cast<int>(x.dim(2)));
  const long wo = out_extent(static_cast<int>(x.dim(3)));
  if (y.ndim() != 4 || y.dim(0) != n || y.dim(1) != out_ch_ || y.dim(2) != ho || y.dim(3) != wo)
    y = Tensor({n, out_ch_, ho, wo});

  im2col(x, ws);
  const long k = static_cast<long>(in_ch_) * ksize_ * ksize_;
  const long cols = n * ho * wo;

  // out(Cout x N*P) laid out image-major needs a per-image view: the GEMM
  // result row r spans all images, so write through a temporary map per
  // image block instead; cheaper to GEMM once into a scratch then scatter.
  ConstMapRM wm(weight_.data(), out_ch_, k);
  ConstMapRM cm(ws.col.data(), k, cols);
  MatrixRM out = wm * cm;  // Cout x (N*P)

  const long p = ho * wo;
  for (long img = 0; img < n; ++img) {
    for (long oc = 0; oc < out_ch_; ++oc) {
      const double b = with_bias_ ? bias_[oc] : 0.0;
      const double* src = out.data() + oc * cols + img * p;
      double* dst = y.data() + (img * out_ch_ + oc) * p;
      for (long i = 0; i < p; ++i) dst[i] = src[i] + b;
    }
  }
}

void Conv2d::backward(const Tensor& x, const Tensor& dy, Tensor* dx, Workspace& ws) {
  const long n = x.dim(0);
  const long h = x.dim(2), w = x.dim(3);
  const long ho = out_extent(static_cast<int>(h)), wo = out_extent(static_cast<int>(w));
  const long p = ho * wo;
  const long cols = n * p;
  const long k = static_cast<long>(in_ch_) * ksize_ * ksize_;

  // Regather dy into Cout x (N*P) image-major scratch.
  MatrixRM dym(out_ch_, cols);
  for (long img = 0; img < n; ++img)
    for (long oc = 0; oc < out_ch_; ++oc) {
      const double* src = dy.data() + (img * out_ch_ + oc) * p;
      double* dst = dym.data() + oc * cols + img * p;
      for (long i = 0; i < p; ++i) dst[i] = src[i];
    }

  im2col(x, ws);  // recompute; cheaper than caching every col buffer
  ConstMapRM cm(ws.col.data(), k, cols);
  MapRM wg(weight_grad_.data(), out_ch_, k);
  wg.noalias() += dym * cm.transpose();

  if (with_bias_) {
    for (long oc = 0; oc < out_ch_; ++oc) bias_grad_[oc] += dym.row(oc).sum();
  }

  if (!dx) return;
  if (!dx->same_shape(x)) *dx = Tensor({n, in_ch_, h, w});
  dx->fill(0.0);

  if (ws.dcol.numel() < k * cols) ws.dcol = Tensor({k, cols});
  MapRM dcol(ws.dcol.data(), k, cols);
  ConstMapRM wm(weight_.data(), out_ch_, k);
  dcol.noalias() = wm.transpose() * dym;

  // col2im scatter-add.
  for (long img = 0; img < n; ++img) {
    for (long c = 0; c < in_ch_; ++c) {
      double* dst = dx->data() + (img * in_ch_ + c) * h * w;
      for (int kr = 0; kr < ksize_; ++kr) {
        for (int kc = 0; kc < ksize_; ++kc) {
          const double* src = ws.dcol.data() + ((c * ksize_ + kr) * ksize_ + kc) * cols + img * p;
          for (long r = 0; r < ho; ++r) {
            const long sr = r * stride_ + kr - pad_;
            if (sr < 0 || sr >= h) continue;
            for (long cc = 0; cc < wo; ++cc) {
              const long sc = cc * stride_ + kc - pad_;
              if (sc < 0 || sc >= w) continue;
              dst[sr * w + sc] += src[r * wo + cc];
            }
          }
        }
      }
    }
  }
}

void Conv2d::collect(std::vector<ArrayRef>& out) {
  out.push_back({name_ + ".weight", &weight_, &weight_grad_, true, false});
  if (with_bias_) out.push_back({name_ + ".bias", &bias_, &bias_grad_, true, true});
}

BatchNorm2d::BatchNorm2d(std::string name, int channels, double eps, double momentum)
    : name_(std::move(name)),
      channels_(channels),
      eps_(eps),
      momentum_(momentum),
      gamma_({channels}),
      gamma_grad_({channels}),
      beta_({channels}),
      beta_grad_({channels}),
      running_mean_({channels}),
      running_var_({channels}) {
  gamma_.fill(1.0);
  running_var_.fill(1.0);
}

void BatchNorm2d::forward(const Tensor& x, Tensor& y, bool training, BnCache* cache) {
  if (x.dim(1) != channels_) throw std::invalid_argument("bn " + name_ + ": channel mismatch");
  const long n = x.dim(0), h = x.dim(2), w = x.dim(3);
  const long hw = h * w;
  const long m = n * hw;
  if (!y.same_shape(x)) y = Tensor(x.shape());

  if (!training) {
    for (long c = 0; c < channels_; ++c) {
      const double invstd = 1.0 / std::sqrt(running_var_[c] + eps_);
      const double g = gamma_[c], b = beta_[c], mu = running_mean_[c];
      for (long img = 0; img < n; ++img) {
        const double* src = x.data() + (img * channels_ + c) * hw;
        double* dst = y.data() + (img * channels_ + c) * hw;
        for (long i = 0; i < hw; ++i) dst[i] = (src[i] - mu) * invstd * g + b;
      }
    }
    return;
  }

  if (cache) {
    if (!cache->xhat.same_shape(x)) cache->xhat = Tensor(x.shape());
    cache->invstd.assign(static_cast<std::size_t>(channels_), 0.0);
  }

  for (long c = 0; c < channels_; ++c) {
    double sum = 0.0, sq = 0.0;
    for (long img = 0; img < n; ++img) {
      const double* src = x.data() + (img * channels_ + c) * hw;
      for (long i = 0; i < hw; ++i) {
        sum += src[i];
        sq += src[i] * src[i];
      }
    }
    const double mean = sum / m;
    const double var = std::max(0.0, sq / m - mean * mean);  // biased
    const double invstd = 1.0 / std::sqrt(var + eps_);

    running_mean_[c] = (1.0 - momentum_) * running_mean_[c] + momentum_ * mean;
    const double unbiased = m > 1 ? var * m / (m - 1) : var;
    running_var_[c] = (1.0 - momentum_) * running_var_[c] + momentum_ * unbiased;

    const double g = gamma_[c], b = beta_[c];
    for (long img = 0; img < n; ++img) {
      const double* src = x.data() + (img * channels_ + c) * hw;
      double* dst = y.data() + (img * channels_ + c) * hw;
      double* xh = cache ? cache->xhat.data() + (img * channels_ + c) * hw : nullptr;
      for (long i = 0; i < hw; ++i) {
        const double nrm = (src[i] - mean) * invstd;
        if (xh) xh[i] = nrm;
        dst[i] = nrm * g + b;
      }
    }
    if (cache) cache->invstd[static_cast<std::size_t>(c)] = invstd;
  }
}

void BatchNorm2d::backward(const Tensor& dy, const BnCache& cache, Tensor& dx) {
  const long n = dy.dim(0), h = dy.dim(2), w = dy.dim(3);
  const long hw = h * w;
  const long m = n * hw;
  if (!dx.same_shape(dy)) dx = Tensor(dy.shape());

  for (long c = 0; c < channels_; ++c) {
    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    for (long img = 0; img < n; ++img) {
      const double* gy = dy.data() + (img * channels_ + c) * hw;
      const double* xh = cache.xhat.data() + (img * channels_ + c) * hw;
      for (long i = 0; i < hw; ++i) {
        sum_dy += gy[i];
        sum_dy_xhat += gy[i] * xh[i];
      }
    }
    gamma_grad_[c] += sum_dy_xhat;
    beta_grad_[c] += sum_dy;

    const double g = gamma_[c];
    const double invstd = cache.invstd[static_cast<std::size_t>(c)];
    const double k1 = g * invstd / m;
    for (long img = 0; img < n; ++img) {
      const double* gy = dy.data() + (img * channels_ + c) * hw;
      const double* xh = cache.xhat.data() + (img * channels_ + c) * hw;
      double* gx = dx.data() + (img * channels_ + c) * hw;
      for (long i = 0; i < hw; ++i)
        gx[i] = k1 * (m * gy[i] - sum_dy - xh[i] * sum_dy_xhat);
    }
  }
}

void BatchNorm2d::collect(std::vector<ArrayRef>& out) {
  out.push_back({name_ + ".gamma", &gamma_, &gamma_grad_, true, true});
  out.push_back({name_ + ".beta", &beta_, &beta_grad_, true, true});
  out.push_back({name_ + ".running_mean", &running_mean_, nullptr, false, true});
  out.push_back({name_ + ".running_var", &running_var_, nullptr, false, true});
}

void relu_forward(const Tensor& x, Tensor& y) {
  if (!y.same_shape(x)) y = Tensor(x.shape());
  for (long i = 0; i < x.numel(); ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward(const Tensor& y, const Tensor& dy, Tensor& dx) {
  if (!dx.same_shape(y)) dx = Tensor(y.shape());
  for (long i = 0; i < y.numel(); ++i) dx[i] = y[i] > 0.0 ? dy[i] : 0.0;
}

void upsample_bilinear_forward(const Tensor& x, Tensor& y) {
  const long n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const long ho = y.dim(2), wo = y.dim(3);
  if (y.dim(0) != n || y.dim(1) != c) throw std::invalid_argument("upsample: shape mismatch");
  const double sy = static_cast<double>(h) / ho;
  const double sx = static_cast<double>(w) / wo;
  for (long img = 0; img < n; ++img) {
    for (long ch = 0; ch < c; ++ch) {
      const double* src = x.data() + (img * c + ch) * h * w;
      double* dst = y.data() + (img * c + ch) * ho * wo;
      for (long r = 0; r < ho; ++r) {
        double fy = (r + 0.5) * sy - 0.5;
        fy = std::clamp(fy, 0.0, static_cast<double>(h - 1));
        const long y0 = static_cast<long>(fy);
        const long y1 = std::min(y0 + 1, h - 1);
        const double wy = fy - y0;
        for (long cc = 0; cc < wo; ++cc) {
          double fx = (cc + 0.5) * sx - 0.5;
          fx = std::clamp(fx, 0.0, static_cast<double>(w - 1));
          const long x0 = static_cast<long>(fx);
          const long x1 = std::min(x0 + 1, w - 1);
          const double wx = fx - x0;
          const double top = src[y0 * w + x0] + (src[y0 * w + x1] - src[y0 * w + x0]) * wx;
          const double bot = src[y1 * w + x0] + (src[y1 * w + x1] - src[y1 * w + x0]) * wx;
          dst[r * wo + cc] = top + (bot - top) * wy;
        }
      }
    }
  }
}

void upsample_bilinear_backward(const Tensor& dy, Tensor& dx) {
  const long n = dy.dim(0), c = dy.dim(1), ho = dy.dim(2), wo = dy.dim(3);
  const long h = dx.dim(2), w = dx.dim(3);
  dx.fill(0.0);
  const double sy = static_cast<double>(h) / ho;
  const double sx = static_cast<double>(w) / wo;
  for (long img = 0; img < n; ++img) {
    for (long ch = 0; ch < c; ++ch) {
      const double* src = dy.data() + (img * c + ch) * ho * wo;
      double* dst = dx.data() + (img * c + ch) * h * w;
      for (long r = 0; r < ho; ++r) {
        double fy = (r + 0.5) * sy - 0.5;
        fy = std::clamp(fy, 0.0, static_cast<double>(h - 1));
        const long y0 = static_cast<long>(fy);
        const long y1 = std::min(y0 + 1, h - 1);
        const double wy = fy - y0;
        for (long cc = 0; cc < wo; ++cc) {
          double fx = (cc + 0.5) * sx - 0.5;
          fx = std::clamp(fx, 0.0, static_cast<double>(w - 1));
          const long x0 = static_cast<long>(fx);
          const long x1 = std::min(x0 + 1, w - 1);
          const double wx = fx - x0;
          const double g = src[r * wo + cc];
          dst[y0 * w + x0] += g * (1 - wy) * (1 - wx);
          dst[y0 * w + x1] += g * (1 - wy) * wx;
          dst[y1 * w + x0] += g * wy * (1 - wx);
          dst[y1 * w + x1] += g * wy * wx;
        }
      }
    }
  }
}

}  // namespace pixdepth
