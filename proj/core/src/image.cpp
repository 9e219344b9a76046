#include "pixdepth/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>

namespace pixdepth {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

void write_png(const std::string& path, const ImageU8& img) {
  if (img.ch != 1 && img.ch != 3)
    throw std::invalid_argument("write_png: only 1- or 3-channel images");
  if (img.h <= 0 || img.w <= 0)
    throw std::invalid_argument("write_png: empty image");

  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw std::runtime_error("write_png: cannot open " + path);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("write_png: png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("write_png: png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("write_png: failure while writing " + path);
  }

  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.w), static_cast<png_uint_32>(img.h), 8,
               img.ch == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_bytep> rows(static_cast<std::size_t>(img.h));
  for (int r = 0; r < img.h; ++r)
    rows[static_cast<std::size_t>(r)] =
        const_cast<png_bytep>(&img.v[static_cast<std::size_t>(r) * img.w * img.ch]);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

ImageU8 read_png(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw std::runtime_error("read_png: cannot open " + path);

  png_byte sig[8];
  if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
    throw std::runtime_error("read_png: not a PNG file: " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("read_png: png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw std::runtime_error("read_png: png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("read_png: corrupt PNG: " + path);
  }

  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  // Normalize everything to 8-bit gray or RGB.
  png_set_strip_16(png);
  png_set_packing(png);
  const png_byte color = png_get_color_type(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8)
    png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);

  ImageU8 img;
  img.h = static_cast<int>(png_get_image_height(png, info));
  img.w = static_cast<int>(png_get_image_width(png, info));
  img.ch = static_cast<int>(png_get_channels(png, info));
  if (img.ch != 1 && img.ch != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("read_png: unsupported channel count in " + path);
  }
  img.v.resize(static_cast<std::size_t>(img.h) * img.w * img.ch);
  std::vector<png_bytep> rows(static_cast<std::size_t>(img.h));
  for (int r = 0; r < img.h; ++r)
    rows[static_cast<std::size_t>(r)] = &img.v[static_cast<std::size_t>(r) * img.w * img.ch];
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

ImageF to_float_image(const ImageU8& img) {
  ImageF out(img.h, img.w, img.ch);
  for (std::size_t i = 0; i < img.v.size(); ++i) out.v[i] = img.v[i] / 255.0;
  return out;
}

ImageU8 to_u8_image(const ImageF& img) {
  ImageU8 out(img.h, img.w, img.ch);
  for (std::size_t i = 0; i < img.v.size(); ++i) {
    const double c = std::clamp(img.v[i], 0.0, 1.0);
    out.v[i] = static_cast<std::uint8_t>(std::lround(c * 255.0));
  }
  return out;
}

ImageF crop_resize_bilinear(const ImageF& src, int x, int y, int w, int h,
                            bool hflip, int out_h, int out_w) {
  if (w <= 0 || h <= 0 || out_h <= 0 || out_w <= 0)
    throw std::invalid_argument("crop_resize_bilinear: empty extent");
  if (x < 0 || y < 0 || x + w > src.w || y + h > src.h)
    throw std::invalid_argument("crop_resize_bilinear: rect outside image");

  ImageF out(out_h, out_w, src.ch);
  const double sx = static_cast<double>(w) / out_w;
  const double sy = static_cast<double>(h) / out_h;
  for (int r = 0; r < out_h; ++r) {
    double fy = (r + 0.5) * sy - 0.5;
    fy = std::clamp(fy, 0.0, static_cast<double>(h - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, h - 1);
    const double wy = fy - y0;
    for (int c = 0; c < out_w; ++c) {
      const int cc = hflip ? (out_w - 1 - c) : c;
      double fx = (cc + 0.5) * sx - 0.5;
      fx = std::clamp(fx, 0.0, static_cast<double>(w - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, w - 1);
      const double wx = fx - x0;
      for (int k = 0; k < src.ch; ++k) {
        const double v00 = src.at(y + y0, x + x0, k);
        const double v01 = src.at(y + y0, x + x1, k);
        const double v10 = src.at(y + y1, x + x0, k);
        const double v11 = src.at(y + y1, x + x1, k);
        const double top = v00 + (v01 - v00) * wx;
        const double bot = v10 + (v11 - v10) * wx;
        out.at(r, c, k) = top + (bot - top) * wy;
      }
    }
  }
  return out;
}

ImageF resize_bilinear(const ImageF& src, int out_h, int out_w) {
  return crop_resize_bilinear(src, 0, 0, src.w, src.h, false, out_h, out_w);
}

}  // namespace pixdepth
