#pragma once

#include <optional>
#include <vector>

#include "pixdepth/masks.hpp"
#include "pixdepth/tensor.hpp"
#include "pixdepth/views.hpp"

namespace pixdepth {

// Projected pixel features, logically channels x Hf x Wf. Stored pixel-major
// (each cell's channel vector contiguous) because every consumer walks
// per-pixel vectors.
struct FeatureMap {
  int channels = 0, h = 0, w = 0;
  std::vector<double> v;

  FeatureMap() = default;
  FeatureMap(int c, int h_, int w_)
      : channels(c), h(h_), w(w_), v(static_cast<std::size_t>(c) * h_ * w_, 0.0) {}

  int pixels() const { return h * w; }
  double& at(int c, int pixel) { return v[static_cast<std::size_t>(pixel) * channels + c]; }
  double at(int c, int pixel) const { return v[static_cast<std::size_t>(pixel) * channels + c]; }
  double* pixel_vec(int pixel) { return &v[static_cast<std::size_t>(pixel) * channels]; }
  const double* pixel_vec(int pixel) const { return &v[static_cast<std::size_t>(pixel) * channels]; }

  // Contiguous channel block [c0, c1), used by the multi-threshold split.
  FeatureMap channel_slice(int c0, int c1) const;
};

// n groups, each with its own (distance, depth) threshold pair.
struct ThresholdSchedule {
  int n = 3;
  std::vector<double> dist_thresholds = {0.3, 0.5, 0.7};
  std::vector<double> depth_thresholds = {0.3, 0.5, 0.7};
};

void validate(const ThresholdSchedule& schedule);

struct LossConfig {
  double tau = 0.3;
  ThresholdSchedule schedule;
  bool use_depth_mask = true;
  bool require_overlap = false;
};

// Cosine similarity between every cross-view pixel-vector pair; entry (i,j)
// is cos(x_i, x'_j). Throws naming the pixel index on a zero-norm vector.
Tensor cosine_matrix(const FeatureMap& feats_a, const FeatureMap& feats_b);

struct ContrastResult {
  double value = 0.0;
  bool degenerate = false;   // no positive pair anywhere: pair contributes 0
  int anchors_a = 0;         // view-A pixels with a nonempty positive set
  int anchors_b = 0;
  int excluded_a = 0;        // view-A pixels skipped (empty positive set)
  int excluded_b = 0;
  Tensor dvalue_dcos;        // only when requested
};

// The softmax-ratio contrast value as a function of the cosine matrix: for
// each anchor pixel with positives, -log( sum_pos e^{c/tau} /
// (sum_pos e^{c/tau} + sum_neg e^{c/tau}) ), averaged per view (rows for
// view A, columns for view B) and then across the two views.
ContrastResult contrast_from_cosines(const Tensor& cos, const BinaryMask& mask, double tau,
                                     bool with_grad);

struct PixelLossResult {
  double value = 0.0;
  bool degenerate = false;
  int excluded_a = 0;
  int excluded_b = 0;
  FeatureMap grad_a;
  FeatureMap grad_b;
};

// Pixel contrast loss over a view pair with the given positive/negative
// mask, differentiable in both feature maps.
PixelLossResult pixel_contrast_loss(const FeatureMap& feats_a, const FeatureMap& feats_b,
                                    const BinaryMask& mask, double tau, bool with_grad = true);

struct MultiLossResult {
  double value = 0.0;
  bool degenerate = false;   // every group mask empty
  long positive_pairs = 0;   // mask ones summed over groups
  int excluded_a = 0;
  int excluded_b = 0;
  FeatureMap grad_a;
  FeatureMap grad_b;
};

// Channel-split loss: block k of the features is trained with the mask built
// from (T_k, T'_k); the result is the mean of the per-block losses. Optional
// validity vectors restrict positives to cells flagged valid on both sides
// (the require_overlap switch).
MultiLossResult multi_threshold_loss(const FeatureMap& feats_a, const FeatureMap& feats_b,
                                     const DistanceMatrix& dist, const DepthGrid& depth_a,
                                     const DepthGrid& depth_b, const LossConfig& config,
                                     bool with_grad = true,
                                     const std::vector<std::uint8_t>* valid_a = nullptr,
                                     const std::vector<std::uint8_t>* valid_b = nullptr);

}  // namespace pixdepth
