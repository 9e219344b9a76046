#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pixdepth {

// Interleaved 8-bit image, row-major, ch = 1 (gray) or 3 (RGB).
struct ImageU8 {
  int h = 0, w = 0, ch = 0;
  std::vector<std::uint8_t> v;

  ImageU8() = default;
  ImageU8(int h_, int w_, int ch_) : h(h_), w(w_), ch(ch_), v(static_cast<std::size_t>(h_) * w_ * ch_, 0) {}
  std::uint8_t& at(int r, int c, int k) { return v[(static_cast<std::size_t>(r) * w + c) * ch + k]; }
  std::uint8_t at(int r, int c, int k) const { return v[(static_cast<std::size_t>(r) * w + c) * ch + k]; }
};

// Interleaved double image in [0,1].
struct ImageF {
  int h = 0, w = 0, ch = 0;
  std::vector<double> v;

  ImageF() = default;
  ImageF(int h_, int w_, int ch_) : h(h_), w(w_), ch(ch_), v(static_cast<std::size_t>(h_) * w_ * ch_, 0.0) {}
  double& at(int r, int c, int k) { return v[(static_cast<std::size_t>(r) * w + c) * ch + k]; }
  double at(int r, int c, int k) const { return v[(static_cast<std::size_t>(r) * w + c) * ch + k]; }
};

void write_png(const std::string& path, const ImageU8& img);
ImageU8 read_png(const std::string& path);

ImageF to_float_image(const ImageU8& img);
ImageU8 to_u8_image(const ImageF& img);

// Bilinear resampling with the pixel-center convention
// src_x = (dst_x + 0.5) * src_w / dst_w - 0.5, clamped at the borders.
ImageF resize_bilinear(const ImageF& src, int out_h, int out_w);

// Samples a sub-rectangle of src (optionally horizontally mirrored) to an
// out_h x out_w view; the geometry matches cell_centers in views.hpp.
ImageF crop_resize_bilinear(const ImageF& src, int x, int y, int w, int h,
                            bool hflip, int out_h, int out_w);

}  // namespace pixdepth
