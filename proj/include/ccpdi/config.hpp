#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ccpdi/spatial.hpp"

// Flat key-value configuration with [sections]; keys are addressed as
// "section.key". Chosen over a structured format so sweep provenance diffs
// stay line-oriented.

namespace ccpdi {

class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text, const std::string& origin = "<string>");

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  /// Throws std::runtime_error naming the key when absent or malformed.
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  Vec3 get_vec3(const std::string& key) const;
  Vec3 get_vec3(const std::string& key, const Vec3& fallback) const;
  std::vector<double> get_list(const std::string& key) const;

  void set(const std::string& key, const std::string& value);
  void set_double(const std::string& key, double value);

  /// Canonical "key = value" lines sorted by key; the basis of the config hash.
  std::string serialized() const;
  uint64_t hash() const;

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  std::string origin_;

  const std::string& raw(const std::string& key) const;
};

uint64_t fnv1a64(const std::string& text);

}  // namespace ccpdi
