#include "pixdepth/masks.hpp"

#include <cmath>
#include <stdexcept>

namespace pixdepth {

BinaryMask BinaryMask::transposed() const {
  BinaryMask t(cols, rows, role);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) t.at(j, i) = at(i, j);
  return t;
}

long BinaryMask::count_ones() const {
  long n = 0;
  for (std::uint8_t b : v) n += b;
  return n;
}

bool BinaryMask::all_zero() const { return count_ones() == 0; }

std::vector<double> normalize_depth(const std::vector<double>& raw) {
  if (raw.empty()) throw std::invalid_argument("normalize_depth: empty input");
  double mn = raw[0], mx = raw[0];
  for (double x : raw) {
    if (!std::isfinite(x)) throw std::invalid_argument("normalize_depth: non-finite value");
    mn = std::min(mn, x);
    mx = std::max(mx, x);
  }
  std::vector<double> out(raw.size());
  if (mx == mn) return out;  // all zeros
  const double range = mx - mn;
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = (raw[i] - mn) / range;
  return out;
}

BinaryMask image_mask(const DistanceMatrix& dist, double threshold) {
  if (threshold < 0.0 || threshold > 1.0)
    throw std::invalid_argument("image_mask: threshold outside [0,1]");
  BinaryMask m(dist.rows, dist.cols, MaskRole::kImage);
  for (std::size_t i = 0; i < dist.v.size(); ++i)
    m.v[i] = dist.v[i] <= threshold ? 1 : 0;
  return m;
}

BinaryMask depth_mask(const DepthGrid& depth_a, const DepthGrid& depth_b, double threshold) {
  if (threshold < 0.0 || threshold > 1.0)
    throw std::invalid_argument("depth_mask: threshold outside [0,1]");
  if (depth_a.h != depth_b.h || depth_a.w != depth_b.w)
    throw std::invalid_argument("depth_mask: grids differ in resolution");
  const int n = depth_a.h * depth_a.w;
  BinaryMask m(n, n, MaskRole::kDepth);
  for (int i = 0; i < n; ++i) {
    const double da = depth_a.v[static_cast<std::size_t>(i)];
    for (int j = 0; j < n; ++j) {
      const double diff = std::fabs(da - depth_b.v[static_cast<std::size_t>(j)]);
      m.at(i, j) = diff <= threshold ? 1 : 0;
    }
  }
  return m;
}

BinaryMask combine(const BinaryMask& a_image, const BinaryMask& a_depth) {
  if (a_image.rows != a_depth.rows || a_image.cols != a_depth.cols)
    throw std::invalid_argument("combine: mask shapes differ");
  BinaryMask m(a_image.rows, a_image.cols, MaskRole::kFinal);
  for (std::size_t i = 0; i < m.v.size(); ++i)
    m.v[i] = static_cast<std::uint8_t>(a_image.v[i] * a_depth.v[i]);
  return m;
}

}  // namespace pixdepth
