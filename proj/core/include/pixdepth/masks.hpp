#pragma once

#include <cstdint>
#include <vector>

#include "pixdepth/views.hpp"

namespace pixdepth {

enum class MaskRole { kImage, kDepth, kFinal };

// 0/1 assignment of positive/negative status to every cross-view cell pair.
struct BinaryMask {
  int rows = 0, cols = 0;
  MaskRole role = MaskRole::kImage;
  std::vector<std::uint8_t> v;

  BinaryMask() = default;
  BinaryMask(int r, int c, MaskRole role_)
      : rows(r), cols(c), role(role_), v(static_cast<std::size_t>(r) * c, 0) {}
  std::uint8_t& at(int i, int j) { return v[static_cast<std::size_t>(i) * cols + j]; }
  std::uint8_t at(int i, int j) const { return v[static_cast<std::size_t>(i) * cols + j]; }

  BinaryMask transposed() const;
  long count_ones() const;
  bool all_zero() const;
};

struct ThresholdPair {
  double dist = 0.5;   // T, on normalized 2D distance
  double depth = 0.3;  // T', on normalized depth difference
};

// Per-image min-max normalization to [0,1]; a constant map becomes all
// zeros so depth-uninformative images degrade to the distance-only rule.
// Throws on non-finite values.
std::vector<double> normalize_depth(const std::vector<double>& raw);

// A(i,j) = 1 iff dist(i,j) <= T (boundary inclusive).
BinaryMask image_mask(const DistanceMatrix& dist, double threshold);

// A(i,j) = 1 iff |depth_a(i) - depth_b(j)| <= T' (boundary inclusive).
BinaryMask depth_mask(const DepthGrid& depth_a, const DepthGrid& depth_b, double threshold);

// Element-wise product of the two masks; role becomes final.
BinaryMask combine(const BinaryMask& a_image, const BinaryMask& a_depth);

}  // namespace pixdepth
