#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pixdepth/nn.hpp"
#include "pixdepth/tensor.hpp"

namespace pixdepth {

// Serialized training state. On disk this is a single file:
//
//   bytes 0..5   magic "PXDC1\n"
//   bytes 6..9   u32 LE header length
//   header       UTF-8 lines:
//                  version 1
//                  step <n>
//                  ema_momentum <decimal, round-trips IEEE doubles>
//                  config.<key> <value>       (full resolved snapshot)
//                  array <name> f64 <ndim> <dims...> <offset> <bytes>
//   data         raw little-endian float64 arrays at the stated offsets
//                (relative to the end of the header)
struct Checkpoint {
  int version = 1;
  long step = 0;
  double ema_momentum = 0.99;
  std::map<std::string, std::string> config;  // resolved snapshot
  std::map<std::string, Tensor> arrays;

  void put_arrays(const std::string& prefix, std::vector<ArrayRef> refs);
  // Binds stored arrays back onto model storage; throws naming the first
  // array whose shape disagrees or which is missing.
  void bind_arrays(const std::string& prefix, std::vector<ArrayRef> refs) const;

  std::string config_value(const std::string& key) const;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace pixdepth
