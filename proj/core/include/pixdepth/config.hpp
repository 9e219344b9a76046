#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace pixdepth {

// Flat "key = value" configuration with '#' comments. Every lookup records
// the resolved value (explicit or default), so snapshot() yields the complete
// effective configuration of a run with no defaults left implicit.
class Config {
 public:
  Config() = default;

  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text);

  bool has(const std::string& key) const;
  void set(const std::string& key, const std::string& value);

  std::string get_string(const std::string& key, const std::string& def);
  std::string require_string(const std::string& key);
  long get_int(const std::string& key, long def);
  double get_double(const std::string& key, double def);
  bool get_bool(const std::string& key, bool def);
  std::uint64_t get_seed(const std::string& key, std::uint64_t def);
  std::vector<double> get_double_list(const std::string& key,
                                      const std::vector<double>& def);
  std::vector<long> get_int_list(const std::string& key,
                                 const std::vector<long>& def);

  // Resolved key/value pairs in sorted order.
  std::map<std::string, std::string> snapshot() const { return resolved_; }

  // Throws if the file contained keys no component ever consumed; catches
  // config typos before a long run burns time on them.
  void assert_all_consumed() const;

  static bool parse_bool(const std::string& raw, const std::string& key);

 private:
  std::string lookup(const std::string& key, const std::string& fallback,
                     bool required);

  std::map<std::string, std::string> values_;
  std::map<std::string, std::string> resolved_;
  std::set<std::string> consumed_;
};

}  // namespace pixdepth
