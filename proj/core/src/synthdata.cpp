#include "pixdepth/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "pixdepth/image.hpp"

namespace fs = std::filesystem;

namespace pixdepth {
namespace {

// Base palette indexed by instance id (1-based). Per-scene jitter and
// per-pixel noise are layered on top, so ids are color-identifiable classes
// without being constant across the dataset.
constexpr double kPalette[][3] = {
    {0.85, 0.20, 0.20},  // id 1
    {0.20, 0.75, 0.25},  // id 2
    {0.20, 0.35, 0.85},  // id 3
    {0.90, 0.80, 0.15},  // id 4
    {0.80, 0.25, 0.80},  // id 5
};
constexpr int kPaletteSize = 5;
constexpr double kBackgroundColor[3] = {0.13, 0.13, 0.15};

struct PlacedObject {
  int id = 0;
  ShapeKind kind = ShapeKind::kRectangle;
  int x = 0, y = 0, w = 0, h = 0;  // bounding box
  double depth = 0.0;
  double color[3] = {0, 0, 0};

  bool covers(int r, int c) const {
    if (c < x || c >= x + w || r < y || r >= y + h) return false;
    if (kind == ShapeKind::kRectangle) return true;
    const double cx = x + 0.5 * w - 0.5;
    const double cy = y + 0.5 * h - 0.5;
    const double rx = 0.5 * w;
    const double ry = 0.5 * h;
    const double dx = (c - cx) / rx;
    const double dy = (r - cy) / ry;
    return dx * dx + dy * dy <= 1.0;
  }
};

double bbox_overlap_fraction(const PlacedObject& a, const PlacedObject& b) {
  const int ix = std::max(0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const int iy = std::max(0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const double inter = static_cast<double>(ix) * iy;
  const double smaller = static_cast<double>(std::min(a.w * a.h, b.w * b.h));
  return inter / smaller;
}

void write_u32_le(std::ofstream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32_le(std::ifstream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void validate(const SceneSpec& spec) {
  if (spec.image_size < 1) throw std::invalid_argument("scene spec: image_size must be >= 1");
  if (spec.num_objects < 0) throw std::invalid_argument("scene spec: num_objects must be >= 0");
  if (spec.background_depth < 0.0 || spec.background_depth > 1.0)
    throw std::invalid_argument("scene spec: background_depth outside [0,1]");
  for (double d : spec.depth_levels)
    if (d < 0.0 || d > 1.0) throw std::invalid_argument("scene spec: depth level outside [0,1]");
  for (std::size_t i = 0; i < spec.depth_levels.size(); ++i)
    for (std::size_t j = i + 1; j < spec.depth_levels.size(); ++j)
      if (spec.depth_levels[i] == spec.depth_levels[j])
        throw std::invalid_argument("scene spec: duplicate depth levels");
  if (spec.num_objects > static_cast<int>(spec.depth_levels.size()))
    throw std::invalid_argument("scene spec: num_objects exceeds number of depth levels");
  if (spec.num_objects > kPaletteSize)
    throw std::invalid_argument("scene spec: at most 5 objects supported");
  if (spec.num_objects > 0 && spec.shape_set.empty())
    throw std::invalid_argument("scene spec: empty shape set");
  if (spec.min_object_size < 1 || spec.max_object_size < spec.min_object_size)
    throw std::invalid_argument("scene spec: bad object size range");
  if (spec.color_noise_std < 0.0)
    throw std::invalid_argument("scene spec: negative color noise");
}

std::vector<double> auto_depth_levels(int num_objects) {
  std::vector<double> levels;
  for (int i = 0; i < num_objects; ++i)
    levels.push_back(static_cast<double>(i) / num_objects);
  return levels;
}

std::vector<double> Scene::depth_as_double() const {
  return std::vector<double>(depth.begin(), depth.end());
}

Scene generate_scene(const SceneSpec& spec, Rng& rng) {
  validate(spec);
  const int s = spec.image_size;

  Scene scene;
  scene.size = s;
  scene.image.assign(static_cast<std::size_t>(s) * s * 3, 0);
  scene.depth.assign(static_cast<std::size_t>(s) * s, static_cast<float>(spec.background_depth));
  scene.labels = std::vector<std::uint8_t>(static_cast<std::size_t>(s) * s, 0);

  // Distinct depth level per object, assignment decoupled from instance id.
  std::vector<double> levels = spec.depth_levels;
  rng.shuffle(levels.data(), static_cast<long>(levels.size()));
  levels.resize(static_cast<std::size_t>(spec.num_objects));

  std::vector<PlacedObject> objects;
  for (int i = 0; i < spec.num_objects; ++i) {
    PlacedObject obj;
    obj.id = i + 1;
    obj.depth = levels[static_cast<std::size_t>(i)];
    for (int k = 0; k < 3; ++k)
      obj.color[k] = std::clamp(kPalette[i][k] + rng.uniform(-0.08, 0.08), 0.0, 1.0);

    bool placed = false;
    for (int attempt = 0; attempt < 100; ++attempt) {
      obj.kind = spec.shape_set[static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<long>(spec.shape_set.size()) - 1))];
      obj.w = static_cast<int>(rng.uniform_int(spec.min_object_size, spec.max_object_size));
      obj.h = static_cast<int>(rng.uniform_int(spec.min_object_size, spec.max_object_size));
      if (obj.w > s || obj.h > s) continue;
      obj.x = static_cast<int>(rng.uniform_int(0, s - obj.w));
      obj.y = static_cast<int>(rng.uniform_int(0, s - obj.h));
      bool ok = true;
      for (const auto& other : objects)
        if (bbox_overlap_fraction(obj, other) > 0.5) ok = false;
      if (ok) {
        placed = true;
        break;
      }
    }
    if (!placed)
      throw std::runtime_error("generate_scene: object " + std::to_string(obj.id) +
                               " cannot fit after 100 placement attempts");
    objects.push_back(obj);
  }

  // Back-to-front paint: iterate farthest first so nearer objects overwrite.
  std::vector<const PlacedObject*> order;
  for (const auto& o : objects) order.push_back(&o);
  std::sort(order.begin(), order.end(), [](const PlacedObject* a, const PlacedObject* b) {
    return a->depth > b->depth;
  });

  std::vector<double> rgb(static_cast<std::size_t>(s) * s * 3);
  for (int r = 0; r < s; ++r)
    for (int c = 0; c < s; ++c)
      for (int k = 0; k < 3; ++k)
        rgb[(static_cast<std::size_t>(r) * s + c) * 3 + k] = kBackgroundColor[k];

  for (const PlacedObject* obj : order) {
    for (int r = obj->y; r < obj->y + obj->h; ++r) {
      for (int c = obj->x; c < obj->x + obj->w; ++c) {
        if (!obj->covers(r, c)) continue;
        const std::size_t p = static_cast<std::size_t>(r) * s + c;
        scene.depth[p] = static_cast<float>(obj->depth);
        (*scene.labels)[p] = static_cast<std::uint8_t>(obj->id);
        for (int k = 0; k < 3; ++k) rgb[p * 3 + k] = obj->color[k];
      }
    }
  }

  // Gaussian color noise on object pixels only; the empty scene stays an
  // exactly uniform background.
  if (spec.color_noise_std > 0.0) {
    for (std::size_t p = 0; p < scene.labels->size(); ++p) {
      if ((*scene.labels)[p] == 0) continue;
      for (int k = 0; k < 3; ++k)
        rgb[p * 3 + k] = std::clamp(rgb[p * 3 + k] + rng.normal(0.0, spec.color_noise_std), 0.0, 1.0);
    }
  }

  for (std::size_t i = 0; i < rgb.size(); ++i)
    scene.image[i] = static_cast<std::uint8_t>(std::lround(std::clamp(rgb[i], 0.0, 1.0) * 255.0));
  return scene;
}

std::string split_name(Split s) {
  switch (s) {
    case Split::kPretrain: return "pretrain";
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
  }
  throw std::logic_error("split_name: bad split");
}

Split parse_split(const std::string& s) {
  if (s == "pretrain") return Split::kPretrain;
  if (s == "train") return Split::kTrain;
  if (s == "val") return Split::kVal;
  throw std::runtime_error("manifest: unknown split '" + s + "'");
}

void write_depth_file(const std::string& path, int h, int w, const std::vector<float>& values) {
  if (static_cast<std::size_t>(h) * w != values.size())
    throw std::invalid_argument("write_depth_file: size mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_depth_file: cannot open " + path);
  out.write("PXD1", 4);
  write_u32_le(out, static_cast<std::uint32_t>(h));
  write_u32_le(out, static_cast<std::uint32_t>(w));
  // IEEE-754 little-endian; native on every target this builds for.
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(float)));
  if (!out) throw std::runtime_error("write_depth_file: write failed for " + path);
}

std::vector<float> read_depth_file(const std::string& path, int& h, int& w) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_depth_file: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "PXD1", 4) != 0)
    throw std::runtime_error("read_depth_file: corrupt header (bad magic) in " + path);
  h = static_cast<int>(read_u32_le(in));
  w = static_cast<int>(read_u32_le(in));
  if (!in || h <= 0 || w <= 0 || static_cast<long>(h) * w > (1L << 30))
    throw std::runtime_error("read_depth_file: corrupt header (bad dimensions) in " + path);
  std::vector<float> values(static_cast<std::size_t>(h) * w);
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(values.size() * sizeof(float)));
  if (!in) throw std::runtime_error("read_depth_file: truncated data in " + path);
  return values;
}

Manifest write_dataset(const std::vector<Scene>& scenes, const std::vector<Split>& splits,
                       const std::string& dir, bool overwrite) {
  if (scenes.size() != splits.size())
    throw std::invalid_argument("write_dataset: scenes/splits length mismatch");
  const fs::path root(dir);
  const fs::path manifest_path = root / "manifest.txt";
  if (fs::exists(manifest_path) && !overwrite)
    throw std::runtime_error("write_dataset: manifest already exists at " +
                             manifest_path.string() + " (pass overwrite to replace)");
  fs::create_directories(root / "images");
  fs::create_directories(root / "depth");
  fs::create_directories(root / "labels");

  Manifest manifest;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const Scene& scene = scenes[i];
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%06zu", i);
    const std::string id(buf);

    ImageU8 img(scene.size, scene.size, 3);
    img.v = scene.image;
    write_png((root / "images" / (id + ".png")).string(), img);
    write_depth_file((root / "depth" / (id + ".f32")).string(), scene.size, scene.size, scene.depth);
    if (scene.labels) {
      ImageU8 lab(scene.size, scene.size, 1);
      lab.v = *scene.labels;
      write_png((root / "labels" / (id + ".png")).string(), lab);
    }
    manifest.entries.push_back({id, splits[i]});
  }

  // Manifest last, through a temp file: readers never observe a manifest
  // whose sample files are still being written.
  const fs::path tmp = root / "manifest.txt.tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("write_dataset: cannot open " + tmp.string());
    for (const auto& e : manifest.entries) out << e.id << " " << split_name(e.split) << "\n";
    if (!out) throw std::runtime_error("write_dataset: manifest write failed");
  }
  fs::rename(tmp, manifest_path);
  return manifest;
}

Dataset read_dataset(const std::string& dir) {
  const fs::path root(dir);
  const fs::path manifest_path = root / "manifest.txt";
  if (!fs::exists(manifest_path))
    throw std::runtime_error("read_dataset: missing manifest.txt in " + dir);
  if (!fs::exists(root / "images"))
    throw std::runtime_error("read_dataset: missing images/ directory in " + dir);
  if (!fs::exists(root / "depth"))
    throw std::runtime_error("read_dataset: missing depth/ directory in " + dir);

  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("read_dataset: cannot open manifest.txt");

  Dataset ds;
  std::string id, split;
  while (in >> id >> split) {
    DatasetEntry entry;
    entry.id = id;
    entry.split = parse_split(split);

    const fs::path img_path = root / "images" / (id + ".png");
    if (!fs::exists(img_path))
      throw std::runtime_error("read_dataset: sample '" + id + "' missing image file");
    const ImageU8 img = read_png(img_path.string());
    if (img.ch != 3)
      throw std::runtime_error("read_dataset: sample '" + id + "' image is not RGB");

    const fs::path depth_path = root / "depth" / (id + ".f32");
    if (!fs::exists(depth_path))
      throw std::runtime_error("read_dataset: sample '" + id + "' missing depth file");
    int dh = 0, dw = 0;
    std::vector<float> depth = read_depth_file(depth_path.string(), dh, dw);
    if (dh != img.h || dw != img.w)
      throw std::runtime_error("read_dataset: sample '" + id + "' image/depth size mismatch");
    if (img.h != img.w)
      throw std::runtime_error("read_dataset: sample '" + id + "' is not square");

    entry.scene.size = img.h;
    entry.scene.image = img.v;
    entry.scene.depth = std::move(depth);

    const fs::path label_path = root / "labels" / (id + ".png");
    if (fs::exists(label_path)) {
      const ImageU8 lab = read_png(label_path.string());
      if (lab.ch != 1 || lab.h != img.h || lab.w != img.w)
        throw std::runtime_error("read_dataset: sample '" + id + "' has malformed labels");
      entry.scene.labels = lab.v;
    }
    ds.entries.push_back(std::move(entry));
  }
  return ds;
}

std::vector<const DatasetEntry*> Dataset::of_split(Split s) const {
  std::vector<const DatasetEntry*> out;
  for (const auto& e : entries)
    if (e.split == s) out.push_back(&e);
  return out;
}

}  // namespace pixdepth
