#pragma once

#include <array>
#include <vector>

#include "pixdepth/image.hpp"
#include "pixdepth/rng.hpp"
#include "pixdepth/synthdata.hpp"
#include "pixdepth/tensor.hpp"

namespace pixdepth {

// Axis-aligned crop in source-image pixels; hflip mirrors the crop content
// (and therefore the feature-cell column order) horizontally.
struct CropRect {
  int x = 0, y = 0, w = 0, h = 0;
  bool hflip = false;
};

void validate_rect(const CropRect& rect, int image_h, int image_w, int grid_h, int grid_w);

struct DepthGrid {
  int h = 0, w = 0;
  std::vector<double> v;

  DepthGrid() = default;
  DepthGrid(int h_, int w_) : h(h_), w(w_), v(static_cast<std::size_t>(h_) * w_, 0.0) {}
  double& at(int r, int c) { return v[static_cast<std::size_t>(r) * w + c]; }
  double at(int r, int c) const { return v[static_cast<std::size_t>(r) * w + c]; }
};

struct DistanceMatrix {
  int rows = 0, cols = 0;
  std::vector<double> v;

  DistanceMatrix() = default;
  DistanceMatrix(int r, int c) : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, 0.0) {}
  double& at(int i, int j) { return v[static_cast<std::size_t>(i) * cols + j]; }
  double at(int i, int j) const { return v[static_cast<std::size_t>(i) * cols + j]; }

  DistanceMatrix transposed() const;
};

struct ColorJitterParams {
  double brightness = 1.0;
  double contrast = 1.0;
  double saturation = 1.0;
  bool to_grayscale = false;
};

struct AugConfig {
  double crop_scale_min = 0.3;   // area fraction of the source image
  double crop_scale_max = 1.0;
  double hflip_prob = 0.5;
  double jitter_brightness = 0.4;
  double jitter_contrast = 0.4;
  double jitter_saturation = 0.2;
  double grayscale_prob = 0.1;
  int view_size = 56;
  int feature_grid = 7;
};

struct ViewPair {
  Tensor image_a, image_b;  // 3 x S x S, CHW
  CropRect rect_a, rect_b;
  DepthGrid depth_a, depth_b;
  DistanceMatrix dist;  // N x M, N = M = feature_grid^2
};

// Feature-cell centers in source-image coordinates, row-major flattened.
// Cell (r,c) maps to (x + (c+0.5)*w/Wf, y + (r+0.5)*h/Hf); hflip mirrors the
// column index.
std::vector<std::array<double, 2>> cell_centers(const CropRect& rect, int grid_h, int grid_w);

// Euclidean distances between two center sets, normalized by the source
// image diagonal so any two in-image points map into [0,1].
DistanceMatrix pairwise_distance(const std::vector<std::array<double, 2>>& centers_a,
                                 const std::vector<std::array<double, 2>>& centers_b,
                                 double image_diag);

// Area-average pooling of an H x W normalized depth map onto the feature
// grid of a crop. Cell partitions follow the adaptive rule
// [floor(c*w/Wf), ceil((c+1)*w/Wf)), mirrored when hflip is set. Each cell
// mean is clamped to the min/max of its pixels, which keeps constant inputs
// bit-exact.
DepthGrid remap_depth(const std::vector<double>& depth_norm, int h, int w,
                      const CropRect& rect, int grid_h, int grid_w);

// Applies brightness, contrast, saturation and optional grayscale in that
// fixed order, clamping to [0,1] after each stage. Never applied to depth.
ImageF apply_color_jitter(const ImageF& img, const ColorJitterParams& params);

// Deterministic assembly of a view pair from explicit crop geometry.
ViewPair compose_view_pair(const ImageF& image, const std::vector<double>& depth_norm,
                           const CropRect& rect_a, const CropRect& rect_b,
                           const ColorJitterParams& jitter_a, const ColorJitterParams& jitter_b,
                           const AugConfig& cfg);

// Samples crop rectangles, flips and jitter from rng, then composes.
ViewPair sample_view_pair(const ImageF& image, const std::vector<double>& depth_norm,
                          const AugConfig& cfg, Rng& rng);

CropRect sample_crop(int image_h, int image_w, const AugConfig& cfg, Rng& rng);
ColorJitterParams sample_jitter(const AugConfig& cfg, Rng& rng);

Tensor image_to_chw(const ImageF& img);

}  // namespace pixdepth
