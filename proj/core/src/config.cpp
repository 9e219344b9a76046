#include "pixdepth/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pixdepth {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, ',')) out.push_back(trim(item));
  return out;
}

}  // namespace

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_string(buf.str());
}

Config Config::from_string(const std::string& text) {
  Config cfg;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: line " + std::to_string(lineno) +
                               " is not of the form key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::runtime_error("config: empty key on line " + std::to_string(lineno));
    cfg.values_[key] = value;
  }
  return cfg;
}

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

void Config::set(const std::string& key, const std::string& value) {
  values_[key] = value;
}

std::string Config::lookup(const std::string& key, const std::string& fallback,
                           bool required) {
  auto it = values_.find(key);
  std::string raw;
  if (it != values_.end()) {
    raw = it->second;
    consumed_.insert(key);
  } else if (required) {
    throw std::runtime_error("config: missing required key '" + key + "'");
  } else {
    raw = fallback;
  }
  resolved_[key] = raw;
  return raw;
}

std::string Config::get_string(const std::string& key, const std::string& def) {
  return lookup(key, def, false);
}

std::string Config::require_string(const std::string& key) {
  return lookup(key, "", true);
}

long Config::get_int(const std::string& key, long def) {
  const std::string raw = lookup(key, std::to_string(def), false);
  char* end = nullptr;
  const long v = std::strtol(raw.c_str(), &end, 10);
  if (end == raw.c_str() || *end != '\0')
    throw std::runtime_error("config: key '" + key + "' is not an integer: " + raw);
  return v;
}

double Config::get_double(const std::string& key, double def) {
  std::ostringstream d;
  d.precision(17);
  d << def;
  const std::string raw = lookup(key, d.str(), false);
  char* end = nullptr;
  const double v = std::strtod(raw.c_str(), &end);
  if (end == raw.c_str() || *end != '\0')
    throw std::runtime_error("config: key '" + key + "' is not a number: " + raw);
  return v;
}

bool Config::parse_bool(const std::string& raw, const std::string& key) {
  if (raw == "on" || raw == "true" || raw == "1" || raw == "yes") return true;
  if (raw == "off" || raw == "false" || raw == "0" || raw == "no") return false;
  throw std::runtime_error("config: key '" + key + "' is not a boolean (on/off): " + raw);
}

bool Config::get_bool(const std::string& key, bool def) {
  const std::string raw = lookup(key, def ? "on" : "off", false);
  return parse_bool(raw, key);
}

std::uint64_t Config::get_seed(const std::string& key, std::uint64_t def) {
  const std::string raw = lookup(key, std::to_string(def), false);
  char* end = nullptr;
  const unsigned long long v = std::strtoull(raw.c_str(), &end, 10);
  if (end == raw.c_str() || *end != '\0')
    throw std::runtime_error("config: key '" + key + "' is not a seed: " + raw);
  return static_cast<std::uint64_t>(v);
}

std::vector<double> Config::get_double_list(const std::string& key,
                                            const std::vector<double>& def) {
  std::ostringstream d;
  d.precision(17);
  for (std::size_t i = 0; i < def.size(); ++i) {
    if (i) d << ",";
    d << def[i];
  }
  const std::string raw = lookup(key, d.str(), false);
  std::vector<double> out;
  for (const auto& part : split_commas(raw)) {
    if (part.empty()) continue;
    char* end = nullptr;
    const double v = std::strtod(part.c_str(), &end);
    if (end == part.c_str() || *end != '\0')
      throw std::runtime_error("config: key '" + key + "' has a non-numeric entry: " + part);
    out.push_back(v);
  }
  return out;
}

std::vector<long> Config::get_int_list(const std::string& key,
                                       const std::vector<long>& def) {
  std::ostringstream d;
  for (std::size_t i = 0; i < def.size(); ++i) {
    if (i) d << ",";
    d << def[i];
  }
  const std::string raw = lookup(key, d.str(), false);
  std::vector<long> out;
  for (const auto& part : split_commas(raw)) {
    if (part.empty()) continue;
    char* end = nullptr;
    const long v = std::strtol(part.c_str(), &end, 10);
    if (end == part.c_str() || *end != '\0')
      throw std::runtime_error("config: key '" + key + "' has a non-integer entry: " + part);
    out.push_back(v);
  }
  return out;
}

void Config::assert_all_consumed() const {
  std::string unknown;
  for (const auto& [key, value] : values_) {
    (void)value;
    if (!consumed_.count(key)) {
      if (!unknown.empty()) unknown += ", ";
      unknown += key;
    }
  }
  if (!unknown.empty())
    throw std::runtime_error("config: unknown keys: " + unknown);
}

}  // namespace pixdepth
