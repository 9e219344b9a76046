#include "pixdepth/loss.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pixdepth {
namespace {

void check_finite(const FeatureMap& f, const char* which) {
  for (double x : f.v)
    if (!std::isfinite(x))
      throw std::invalid_argument(std::string("loss: non-finite entry in feature map ") + which);
}

std::vector<double> pixel_norms(const FeatureMap& f, const char* which) {
  std::vector<double> norms(static_cast<std::size_t>(f.pixels()));
  for (int p = 0; p < f.pixels(); ++p) {
    const double* x = f.pixel_vec(p);
    double s = 0.0;
    for (int c = 0; c < f.channels; ++c) s += x[c] * x[c];
    const double n = std::sqrt(s);
    if (n == 0.0)
      throw std::invalid_argument(std::string("cosine: zero-norm pixel vector at index ") +
                                  std::to_string(p) + " of feature map " + which);
    norms[static_cast<std::size_t>(p)] = n;
  }
  return norms;
}

}  // namespace

FeatureMap FeatureMap::channel_slice(int c0, int c1) const {
  FeatureMap out(c1 - c0, h, w);
  for (int p = 0; p < pixels(); ++p) {
    const double* src = pixel_vec(p);
    double* dst = out.pixel_vec(p);
    for (int c = c0; c < c1; ++c) dst[c - c0] = src[c];
  }
  return out;
}

void validate(const ThresholdSchedule& schedule) {
  if (schedule.n < 1) throw std::invalid_argument("threshold schedule: group count must be >= 1");
  if (static_cast<int>(schedule.dist_thresholds.size()) != schedule.n ||
      static_cast<int>(schedule.depth_thresholds.size()) != schedule.n)
    throw std::invalid_argument(
        "threshold schedule: expected " + std::to_string(schedule.n) +
        " distance and depth thresholds, got " + std::to_string(schedule.dist_thresholds.size()) +
        " and " + std::to_string(schedule.depth_thresholds.size()));
  for (double t : schedule.dist_thresholds)
    if (t < 0.0 || t > 1.0)
      throw std::invalid_argument("threshold schedule: distance threshold outside [0,1]");
  for (double t : schedule.depth_thresholds)
    if (t < 0.0 || t > 1.0)
      throw std::invalid_argument("threshold schedule: depth threshold outside [0,1]");
}

Tensor cosine_matrix(const FeatureMap& feats_a, const FeatureMap& feats_b) {
  if (feats_a.channels != feats_b.channels)
    throw std::invalid_argument("cosine_matrix: channel count mismatch");
  check_finite(feats_a, "A");
  check_finite(feats_b, "B");
  const std::vector<double> na = pixel_norms(feats_a, "A");
  const std::vector<double> nb = pixel_norms(feats_b, "B");

  const int n = feats_a.pixels();
  const int m = feats_b.pixels();
  const int ch = feats_a.channels;
  Tensor cos({n, m});
  for (int i = 0; i < n; ++i) {
    const double* a = feats_a.pixel_vec(i);
    for (int j = 0; j < m; ++j) {
      const double* b = feats_b.pixel_vec(j);
      double dot = 0.0;
      for (int c = 0; c < ch; ++c) dot += a[c] * b[c];
      cos.at2(i, j) = dot / (na[static_cast<std::size_t>(i)] * nb[static_cast<std::size_t>(j)]);
    }
  }
  return cos;
}

ContrastResult contrast_from_cosines(const Tensor& cos, const BinaryMask& mask, double tau,
                                     bool with_grad) {
  if (!(tau > 0.0)) throw std::invalid_argument("contrast loss: tau must be > 0");
  const int n = static_cast<int>(cos.dim(0));
  const int m = static_cast<int>(cos.dim(1));
  if (mask.rows != n || mask.cols != m)
    throw std::invalid_argument("contrast loss: mask shape does not match the cosine matrix");

  ContrastResult res;
  if (with_grad) res.dvalue_dcos = Tensor({n, m});

  Tensor expc({n, m});
  for (long i = 0; i < expc.numel(); ++i) expc[i] = std::exp(cos[i] / tau);

  // Per-anchor positive / negative partial sums. View A anchors are rows,
  // view B anchors are columns of the same mask.
  std::vector<double> pos_a(static_cast<std::size_t>(n), 0.0), neg_a(static_cast<std::size_t>(n), 0.0);
  std::vector<double> pos_b(static_cast<std::size_t>(m), 0.0), neg_b(static_cast<std::size_t>(m), 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      const double e = expc.at2(i, j);
      if (mask.at(i, j)) {
        pos_a[static_cast<std::size_t>(i)] += e;
        pos_b[static_cast<std::size_t>(j)] += e;
      } else {
        neg_a[static_cast<std::size_t>(i)] += e;
        neg_b[static_cast<std::size_t>(j)] += e;
      }
    }
  }

  double sum_a = 0.0, sum_b = 0.0;
  for (int i = 0; i < n; ++i) {
    if (pos_a[static_cast<std::size_t>(i)] > 0.0) {
      ++res.anchors_a;
      sum_a += std::log1p(neg_a[static_cast<std::size_t>(i)] / pos_a[static_cast<std::size_t>(i)]);
    } else {
      ++res.excluded_a;
    }
  }
  for (int j = 0; j < m; ++j) {
    if (pos_b[static_cast<std::size_t>(j)] > 0.0) {
      ++res.anchors_b;
      sum_b += std::log1p(neg_b[static_cast<std::size_t>(j)] / pos_b[static_cast<std::size_t>(j)]);
    } else {
      ++res.excluded_b;
    }
  }

  if (res.anchors_a == 0 && res.anchors_b == 0) {
    res.degenerate = true;
    return res;
  }
  // A nonempty mask gives both views at least one anchor.
  res.value = 0.5 * (sum_a / res.anchors_a + sum_b / res.anchors_b);

  if (with_grad) {
    const double wa = 0.5 / res.anchors_a;
    const double wb = 0.5 / res.anchors_b;
    for (int i = 0; i < n; ++i) {
      const double pa = pos_a[static_cast<std::size_t>(i)];
      const double ta = pa + neg_a[static_cast<std::size_t>(i)];
      for (int j = 0; j < m; ++j) {
        const double pb = pos_b[static_cast<std::size_t>(j)];
        const double tb = pb + neg_b[static_cast<std::size_t>(j)];
        const double e = expc.at2(i, j);
        double g = 0.0;
        if (mask.at(i, j)) {
          if (pa > 0.0) g += wa * (1.0 / ta - 1.0 / pa) * e;
          if (pb > 0.0) g += wb * (1.0 / tb - 1.0 / pb) * e;
        } else {
          if (pa > 0.0) g += wa * e / ta;
          if (pb > 0.0) g += wb * e / tb;
        }
        res.dvalue_dcos.at2(i, j) = g / tau;
      }
    }
  }
  return res;
}

PixelLossResult pixel_contrast_loss(const FeatureMap& feats_a, const FeatureMap& feats_b,
                                    const BinaryMask& mask, double tau, bool with_grad) {
  if (mask.rows != feats_a.pixels() || mask.cols != feats_b.pixels())
    throw std::invalid_argument("pixel_contrast_loss: mask shape does not match the feature maps");

  const Tensor cos = cosine_matrix(feats_a, feats_b);
  const ContrastResult terms = contrast_from_cosines(cos, mask, tau, with_grad);

  PixelLossResult res;
  res.value = terms.value;
  res.degenerate = terms.degenerate;
  res.excluded_a = terms.excluded_a;
  res.excluded_b = terms.excluded_b;
  if (!with_grad) return res;

  res.grad_a = FeatureMap(feats_a.channels, feats_a.h, feats_a.w);
  res.grad_b = FeatureMap(feats_b.channels, feats_b.h, feats_b.w);
  if (res.degenerate) return res;

  const std::vector<double> na = pixel_norms(feats_a, "A");
  const std::vector<double> nb = pixel_norms(feats_b, "B");
  const int n = feats_a.pixels();
  const int m = feats_b.pixels();
  const int ch = feats_a.channels;

  // d cos(a,b)/da = b/(|a||b|) - cos * a/|a|^2, and symmetrically for b.
  for (int i = 0; i < n; ++i) {
    const double* a = feats_a.pixel_vec(i);
    double* ga = res.grad_a.pixel_vec(i);
    const double inv_na2 = 1.0 / (na[static_cast<std::size_t>(i)] * na[static_cast<std::size_t>(i)]);
    for (int j = 0; j < m; ++j) {
      const double g = terms.dvalue_dcos.at2(i, j);
      if (g == 0.0) continue;
      const double* b = feats_b.pixel_vec(j);
      double* gb = res.grad_b.pixel_vec(j);
      const double c = cos.at2(i, j);
      const double inv_ab = 1.0 / (na[static_cast<std::size_t>(i)] * nb[static_cast<std::size_t>(j)]);
      const double inv_nb2 = 1.0 / (nb[static_cast<std::size_t>(j)] * nb[static_cast<std::size_t>(j)]);
      for (int k = 0; k < ch; ++k) {
        ga[k] += g * (b[k] * inv_ab - c * a[k] * inv_na2);
        gb[k] += g * (a[k] * inv_ab - c * b[k] * inv_nb2);
      }
    }
  }
  return res;
}

MultiLossResult multi_threshold_loss(const FeatureMap& feats_a, const FeatureMap& feats_b,
                                     const DistanceMatrix& dist, const DepthGrid& depth_a,
                                     const DepthGrid& depth_b, const LossConfig& config,
                                     bool with_grad, const std::vector<std::uint8_t>* valid_a,
                                     const std::vector<std::uint8_t>* valid_b) {
  validate(config.schedule);
  const int n_groups = config.schedule.n;
  const int ch = feats_a.channels;
  if (feats_a.channels != feats_b.channels)
    throw std::invalid_argument("multi_threshold_loss: channel count mismatch");
  if (ch % n_groups != 0)
    throw std::invalid_argument("multi_threshold_loss: feature channels C=" + std::to_string(ch) +
                                " not divisible by group count n=" + std::to_string(n_groups));
  if (dist.rows != feats_a.pixels() || dist.cols != feats_b.pixels())
    throw std::invalid_argument("multi_threshold_loss: distance matrix shape mismatch");

  MultiLossResult res;
  if (with_grad) {
    res.grad_a = FeatureMap(feats_a.channels, feats_a.h, feats_a.w);
    res.grad_b = FeatureMap(feats_b.channels, feats_b.h, feats_b.w);
  }

  const int block = ch / n_groups;
  bool all_degenerate = true;
  double total = 0.0;
  for (int k = 0; k < n_groups; ++k) {
    BinaryMask mask = image_mask(dist, config.schedule.dist_thresholds[static_cast<std::size_t>(k)]);
    if (config.use_depth_mask) {
      mask = combine(mask, depth_mask(depth_a, depth_b,
                                      config.schedule.depth_thresholds[static_cast<std::size_t>(k)]));
    }
    if (valid_a || valid_b) {
      for (int i = 0; i < mask.rows; ++i)
        for (int j = 0; j < mask.cols; ++j) {
          const bool ok_a = !valid_a || (*valid_a)[static_cast<std::size_t>(i)] != 0;
          const bool ok_b = !valid_b || (*valid_b)[static_cast<std::size_t>(j)] != 0;
          if (!(ok_a && ok_b)) mask.at(i, j) = 0;
        }
    }
    res.positive_pairs += mask.count_ones();

    const FeatureMap fa = feats_a.channel_slice(k * block, (k + 1) * block);
    const FeatureMap fb = feats_b.channel_slice(k * block, (k + 1) * block);
    const PixelLossResult part = pixel_contrast_loss(fa, fb, mask, config.tau, with_grad);

    total += part.value;
    res.excluded_a += part.excluded_a;
    res.excluded_b += part.excluded_b;
    if (!part.degenerate) all_degenerate = false;
    if (with_grad && !part.degenerate) {
      const double scale = 1.0 / n_groups;
      for (int p = 0; p < feats_a.pixels(); ++p)
        for (int c = 0; c < block; ++c)
          res.grad_a.at(k * block + c, p) += scale * part.grad_a.at(c, p);
      for (int p = 0; p < feats_b.pixels(); ++p)
        for (int c = 0; c < block; ++c)
          res.grad_b.at(k * block + c, p) += scale * part.grad_b.at(c, p);
    }
  }
  res.value = total / n_groups;
  res.degenerate = all_degenerate;
  return res;
}

}  // namespace pixdepth
