#include "pixdepth/checkpoint.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fs = std::filesystem;

namespace pixdepth {
namespace {

constexpr char kMagic[6] = {'P', 'X', 'D', 'C', '1', '\n'};

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void Checkpoint::put_arrays(const std::string& prefix, std::vector<ArrayRef> refs) {
  for (const ArrayRef& r : refs) arrays[prefix + r.name] = *r.value;
}

void Checkpoint::bind_arrays(const std::string& prefix, std::vector<ArrayRef> refs) const {
  for (ArrayRef& r : refs) {
    const std::string key = prefix + r.name;
    auto it = arrays.find(key);
    if (it == arrays.end())
      throw std::runtime_error("checkpoint: missing array '" + key + "'");
    if (!it->second.same_shape(*r.value))
      throw std::runtime_error("checkpoint: shape mismatch for array '" + key + "': stored " +
                               it->second.shape_str() + ", model expects " + r.value->shape_str());
    *r.value = it->second;
  }
}

std::string Checkpoint::config_value(const std::string& key) const {
  auto it = config.find(key);
  if (it == config.end())
    throw std::runtime_error("checkpoint: config snapshot has no key '" + key + "'");
  return it->second;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ostringstream header;
  header << "version " << ckpt.version << "\n";
  header << "step " << ckpt.step << "\n";
  header << "ema_momentum " << format_double(ckpt.ema_momentum) << "\n";
  for (const auto& [key, value] : ckpt.config) header << "config." << key << " " << value << "\n";

  std::uint64_t offset = 0;
  for (const auto& [name, tensor] : ckpt.arrays) {
    const std::uint64_t bytes = static_cast<std::uint64_t>(tensor.numel()) * sizeof(double);
    header << "array " << name << " f64 " << tensor.ndim();
    for (long d : tensor.shape()) header << " " << d;
    header << " " << offset << " " << bytes << "\n";
    offset += bytes;
  }

  const std::string head = header.str();
  const fs::path tmp = fs::path(path).concat(".tmp");
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("save_checkpoint: cannot open " + tmp.string());
    out.write(kMagic, sizeof(kMagic));
    const std::uint32_t len = static_cast<std::uint32_t>(head.size());
    unsigned char lb[4] = {static_cast<unsigned char>(len & 0xff),
                           static_cast<unsigned char>((len >> 8) & 0xff),
                           static_cast<unsigned char>((len >> 16) & 0xff),
                           static_cast<unsigned char>((len >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(lb), 4);
    out.write(head.data(), static_cast<std::streamsize>(head.size()));
    for (const auto& [name, tensor] : ckpt.arrays) {
      (void)name;
      out.write(reinterpret_cast<const char*>(tensor.data()),
                static_cast<std::streamsize>(tensor.numel() * sizeof(double)));
    }
    if (!out) throw std::runtime_error("save_checkpoint: write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);

  char magic[6];
  in.read(magic, 6);
  if (!in || std::memcmp(magic, kMagic, 6) != 0)
    throw std::runtime_error("load_checkpoint: bad magic, not a checkpoint: " + path);
  unsigned char lb[4];
  in.read(reinterpret_cast<char*>(lb), 4);
  if (!in) throw std::runtime_error("load_checkpoint: truncated header length in " + path);
  const std::uint32_t head_len = static_cast<std::uint32_t>(lb[0]) | (lb[1] << 8) |
                                 (lb[2] << 16) | (static_cast<std::uint32_t>(lb[3]) << 24);
  std::string head(head_len, '\0');
  in.read(head.data(), head_len);
  if (!in) throw std::runtime_error("load_checkpoint: truncated header in " + path);

  Checkpoint ckpt;
  ckpt.version = -1;
  struct ArraySpec {
    std::string name;
    std::vector<long> shape;
    std::uint64_t offset, bytes;
  };
  std::vector<ArraySpec> specs;

  std::istringstream hs(head);
  std::string line;
  while (std::getline(hs, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "version") {
      ls >> ckpt.version;
    } else if (tag == "step") {
      ls >> ckpt.step;
    } else if (tag == "ema_momentum") {
      ls >> ckpt.ema_momentum;
    } else if (tag == "array") {
      ArraySpec spec;
      std::string dtype;
      int ndim = 0;
      ls >> spec.name >> dtype >> ndim;
      if (dtype != "f64")
        throw std::runtime_error("load_checkpoint: unsupported dtype '" + dtype + "'");
      for (int i = 0; i < ndim; ++i) {
        long d = 0;
        ls >> d;
        spec.shape.push_back(d);
      }
      ls >> spec.offset >> spec.bytes;
      if (!ls) throw std::runtime_error("load_checkpoint: malformed array line: " + line);
      specs.push_back(std::move(spec));
    } else if (tag.rfind("config.", 0) == 0) {
      std::string value;
      std::getline(ls, value);
      if (!value.empty() && value[0] == ' ') value.erase(0, 1);
      ckpt.config[tag.substr(7)] = value;
    } else {
      throw std::runtime_error("load_checkpoint: unknown header tag '" + tag + "'");
    }
  }
  if (ckpt.version != 1)
    throw std::runtime_error("load_checkpoint: unrecognized version " +
                             std::to_string(ckpt.version) + " in " + path);

  const std::streampos data_start = in.tellg();
  for (const ArraySpec& spec : specs) {
    Tensor t(spec.shape);
    if (static_cast<std::uint64_t>(t.numel()) * sizeof(double) != spec.bytes)
      throw std::runtime_error("load_checkpoint: size mismatch for array '" + spec.name + "'");
    in.seekg(data_start + static_cast<std::streamoff>(spec.offset));
    in.read(reinterpret_cast<char*>(t.data()), static_cast<std::streamsize>(spec.bytes));
    if (!in)
      throw std::runtime_error("load_checkpoint: truncated data for array '" + spec.name +
                               "' in " + path);
    ckpt.arrays[spec.name] = std::move(t);
  }
  return ckpt;
}

}  // namespace pixdepth
