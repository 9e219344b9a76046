#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pixdepth/rng.hpp"

namespace pixdepth {

enum class ShapeKind { kRectangle, kDisk };

// Parameters for one synthetic scene: colored shapes at distinct depth
// levels over a uniform background. Depth convention: smaller = nearer.
struct SceneSpec {
  int image_size = 64;
  int num_objects = 3;
  std::vector<ShapeKind> shape_set = {ShapeKind::kRectangle, ShapeKind::kDisk};
  std::vector<double> depth_levels = {0.0, 1.0 / 3.0, 2.0 / 3.0};
  double background_depth = 1.0;
  double color_noise_std = 0.02;
  std::uint64_t seed = 0;
  int min_object_size = 14;
  int max_object_size = 26;
};

void validate(const SceneSpec& spec);

// Object depth levels evenly spread so the background (at 1.0) is the
// farthest surface: k objects sit at {0, 1/k, ..., (k-1)/k}.
std::vector<double> auto_depth_levels(int num_objects);

struct Scene {
  int size = 0;                                    // square H = W = size
  std::vector<std::uint8_t> image;                 // H*W*3 interleaved RGB
  std::vector<float> depth;                        // H*W raw depth, row-major
  std::optional<std::vector<std::uint8_t>> labels; // H*W instance ids, 0 = background

  std::vector<double> depth_as_double() const;
};

// Renders back-to-front so nearer objects occlude farther ones; per-pixel
// depth/label record the nearest surface. Throws if after 100 attempts an
// object cannot be placed without covering most of an existing one.
Scene generate_scene(const SceneSpec& spec, Rng& rng);

enum class Split { kPretrain, kTrain, kVal };
std::string split_name(Split s);
Split parse_split(const std::string& s);

struct ManifestEntry {
  std::string id;
  Split split;
};

struct Manifest {
  std::vector<ManifestEntry> entries;
};

// On-disk layout:
//   dir/manifest.txt        one "<id> <split>" line per sample
//   dir/images/<id>.png     8-bit RGB
//   dir/depth/<id>.f32      "PXD1", u32 H, u32 W (LE), then H*W f32 LE row-major
//   dir/labels/<id>.png     8-bit gray instance ids (optional per sample)
Manifest write_dataset(const std::vector<Scene>& scenes,
                       const std::vector<Split>& splits,
                       const std::string& dir, bool overwrite = false);

struct DatasetEntry {
  std::string id;
  Split split;
  Scene scene;
};

struct Dataset {
  std::vector<DatasetEntry> entries;

  std::vector<const DatasetEntry*> of_split(Split s) const;
};

Dataset read_dataset(const std::string& dir);

void write_depth_file(const std::string& path, int h, int w, const std::vector<float>& values);
std::vector<float> read_depth_file(const std::string& path, int& h, int& w);

}  // namespace pixdepth
