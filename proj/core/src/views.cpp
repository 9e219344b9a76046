#include "pixdepth/views.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pixdepth {

void validate_rect(const CropRect& rect, int image_h, int image_w, int grid_h, int grid_w) {
  if (rect.w <= 0 || rect.h <= 0)
    throw std::invalid_argument("crop rect: empty extent");
  if (rect.x < 0 || rect.y < 0 || rect.x + rect.w > image_w || rect.y + rect.h > image_h)
    throw std::invalid_argument("crop rect: outside the source image");
  if (rect.w < grid_w || rect.h < grid_h)
    throw std::invalid_argument("crop rect: smaller than the feature grid");
}

DistanceMatrix DistanceMatrix::transposed() const {
  DistanceMatrix t(cols, rows);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) t.at(j, i) = at(i, j);
  return t;
}

std::vector<std::array<double, 2>> cell_centers(const CropRect& rect, int grid_h, int grid_w) {
  if (grid_h <= 0 || grid_w <= 0) throw std::invalid_argument("cell_centers: empty grid");
  std::vector<std::array<double, 2>> centers;
  centers.reserve(static_cast<std::size_t>(grid_h) * grid_w);
  for (int r = 0; r < grid_h; ++r) {
    const double cy = rect.y + (r + 0.5) * rect.h / grid_h;
    for (int c = 0; c < grid_w; ++c) {
      const int cc = rect.hflip ? (grid_w - 1 - c) : c;
      const double cx = rect.x + (cc + 0.5) * rect.w / grid_w;
      centers.push_back({cx, cy});
    }
  }
  return centers;
}

DistanceMatrix pairwise_distance(const std::vector<std::array<double, 2>>& centers_a,
                                 const std::vector<std::array<double, 2>>& centers_b,
                                 double image_diag) {
  if (!(image_diag > 0.0)) throw std::invalid_argument("pairwise_distance: diagonal must be > 0");
  DistanceMatrix d(static_cast<int>(centers_a.size()), static_cast<int>(centers_b.size()));
  for (int i = 0; i < d.rows; ++i) {
    const double ax = centers_a[static_cast<std::size_t>(i)][0];
    const double ay = centers_a[static_cast<std::size_t>(i)][1];
    for (int j = 0; j < d.cols; ++j) {
      const double dx = ax - centers_b[static_cast<std::size_t>(j)][0];
      const double dy = ay - centers_b[static_cast<std::size_t>(j)][1];
      d.at(i, j) = std::sqrt(dx * dx + dy * dy) / image_diag;
    }
  }
  return d;
}

DepthGrid remap_depth(const std::vector<double>& depth_norm, int h, int w,
                      const CropRect& rect, int grid_h, int grid_w) {
  if (static_cast<std::size_t>(h) * w != depth_norm.size())
    throw std::invalid_argument("remap_depth: depth size mismatch");
  validate_rect(rect, h, w, grid_h, grid_w);

  DepthGrid grid(grid_h, grid_w);
  for (int r = 0; r < grid_h; ++r) {
    const int y0 = rect.y + static_cast<int>(std::floor(static_cast<double>(r) * rect.h / grid_h));
    const int y1 = rect.y + static_cast<int>(std::ceil(static_cast<double>(r + 1) * rect.h / grid_h));
    for (int c = 0; c < grid_w; ++c) {
      const int cc = rect.hflip ? (grid_w - 1 - c) : c;
      const int x0 = rect.x + static_cast<int>(std::floor(static_cast<double>(cc) * rect.w / grid_w));
      const int x1 = rect.x + static_cast<int>(std::ceil(static_cast<double>(cc + 1) * rect.w / grid_w));

      double sum = 0.0;
      double mn = depth_norm[static_cast<std::size_t>(y0) * w + x0];
      double mx = mn;
      long count = 0;
      for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
          const double v = depth_norm[static_cast<std::size_t>(y) * w + x];
          sum += v;
          mn = std::min(mn, v);
          mx = std::max(mx, v);
          ++count;
        }
      }
      if (count == 0) throw std::logic_error("remap_depth: empty cell");  // unreachable
      // Clamp against the cell hull so a constant region stays bit-exact.
      grid.at(r, c) = std::clamp(sum / count, mn, mx);
    }
  }
  return grid;
}

ImageF apply_color_jitter(const ImageF& img, const ColorJitterParams& params) {
  ImageF out = img;
  const std::size_t pixels = static_cast<std::size_t>(img.h) * img.w;
  auto clamp_all = [&out]() {
    for (double& x : out.v) x = std::clamp(x, 0.0, 1.0);
  };

  if (params.brightness != 1.0) {
    for (double& x : out.v) x *= params.brightness;
    clamp_all();
  }
  if (params.contrast != 1.0) {
    // Blend toward the mean gray intensity of the image.
    double mean = 0.0;
    for (std::size_t p = 0; p < pixels; ++p)
      mean += 0.299 * out.v[p * 3] + 0.587 * out.v[p * 3 + 1] + 0.114 * out.v[p * 3 + 2];
    mean /= static_cast<double>(pixels);
    for (double& x : out.v) x = mean + (x - mean) * params.contrast;
    clamp_all();
  }
  if (params.saturation != 1.0) {
    for (std::size_t p = 0; p < pixels; ++p) {
      const double gray =
          0.299 * out.v[p * 3] + 0.587 * out.v[p * 3 + 1] + 0.114 * out.v[p * 3 + 2];
      for (int k = 0; k < 3; ++k)
        out.v[p * 3 + k] = gray + (out.v[p * 3 + k] - gray) * params.saturation;
    }
    clamp_all();
  }
  if (params.to_grayscale) {
    for (std::size_t p = 0; p < pixels; ++p) {
      const double gray =
          0.299 * out.v[p * 3] + 0.587 * out.v[p * 3 + 1] + 0.114 * out.v[p * 3 + 2];
      for (int k = 0; k < 3; ++k) out.v[p * 3 + k] = gray;
    }
    clamp_all();
  }
  return out;
}

Tensor image_to_chw(const ImageF& img) {
  Tensor t({img.ch, img.h, img.w});
  for (int k = 0; k < img.ch; ++k)
    for (int r = 0; r < img.h; ++r)
      for (int c = 0; c < img.w; ++c)
        t[(static_cast<long>(k) * img.h + r) * img.w + c] = img.at(r, c, k);
  return t;
}

ViewPair compose_view_pair(const ImageF& image, const std::vector<double>& depth_norm,
                           const CropRect& rect_a, const CropRect& rect_b,
                           const ColorJitterParams& jitter_a, const ColorJitterParams& jitter_b,
                           const AugConfig& cfg) {
  const int g = cfg.feature_grid;
  validate_rect(rect_a, image.h, image.w, g, g);
  validate_rect(rect_b, image.h, image.w, g, g);
  if (static_cast<std::size_t>(image.h) * image.w != depth_norm.size())
    throw std::invalid_argument("compose_view_pair: depth size mismatch");

  ViewPair vp;
  vp.rect_a = rect_a;
  vp.rect_b = rect_b;

  const ImageF crop_a = crop_resize_bilinear(image, rect_a.x, rect_a.y, rect_a.w, rect_a.h,
                                             rect_a.hflip, cfg.view_size, cfg.view_size);
  const ImageF crop_b = crop_resize_bilinear(image, rect_b.x, rect_b.y, rect_b.w, rect_b.h,
                                             rect_b.hflip, cfg.view_size, cfg.view_size);
  vp.image_a = image_to_chw(apply_color_jitter(crop_a, jitter_a));
  vp.image_b = image_to_chw(apply_color_jitter(crop_b, jitter_b));

  vp.depth_a = remap_depth(depth_norm, image.h, image.w, rect_a, g, g);
  vp.depth_b = remap_depth(depth_norm, image.h, image.w, rect_b, g, g);

  const double diag = std::sqrt(static_cast<double>(image.w) * image.w +
                                static_cast<double>(image.h) * image.h);
  vp.dist = pairwise_distance(cell_centers(rect_a, g, g), cell_centers(rect_b, g, g), diag);
  return vp;
}

CropRect sample_crop(int image_h, int image_w, const AugConfig& cfg, Rng& rng) {
  const int short_side = std::min(image_h, image_w);
  if (short_side < cfg.feature_grid)
    throw std::invalid_argument("sample_crop: image smaller than the feature grid");
  const double scale = rng.uniform(cfg.crop_scale_min, cfg.crop_scale_max);
  int side = static_cast<int>(std::lround(short_side * std::sqrt(scale)));
  side = std::clamp(side, cfg.feature_grid, short_side);

  CropRect rect;
  rect.w = side;
  rect.h = side;
  rect.x = static_cast<int>(rng.uniform_int(0, image_w - side));
  rect.y = static_cast<int>(rng.uniform_int(0, image_h - side));
  rect.hflip = rng.bernoulli(cfg.hflip_prob);
  return rect;
}

ColorJitterParams sample_jitter(const AugConfig& cfg, Rng& rng) {
  ColorJitterParams p;
  p.brightness = rng.uniform(std::max(0.0, 1.0 - cfg.jitter_brightness), 1.0 + cfg.jitter_brightness);
  p.contrast = rng.uniform(std::max(0.0, 1.0 - cfg.jitter_contrast), 1.0 + cfg.jitter_contrast);
  p.saturation = rng.uniform(std::max(0.0, 1.0 - cfg.jitter_saturation), 1.0 + cfg.jitter_saturation);
  p.to_grayscale = rng.bernoulli(cfg.grayscale_prob);
  return p;
}

ViewPair sample_view_pair(const ImageF& image, const std::vector<double>& depth_norm,
                          const AugConfig& cfg, Rng& rng) {
  const CropRect rect_a = sample_crop(image.h, image.w, cfg, rng);
  const CropRect rect_b = sample_crop(image.h, image.w, cfg, rng);
  const ColorJitterParams jitter_a = sample_jitter(cfg, rng);
  const ColorJitterParams jitter_b = sample_jitter(cfg, rng);
  return compose_view_pair(image, depth_norm, rect_a, rect_b, jitter_a, jitter_b, cfg);
}

}  // namespace pixdepth
