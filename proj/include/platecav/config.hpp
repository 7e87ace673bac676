// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <vector>

#include "platecav/types.hpp"

namespace platecav {

// Flat key-value configuration with dotted keys ("plate.nx = 20").
// Lines starting with '#' and blank lines are ignored. Later assignments
// (including command line overrides) win.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig from_file(const std::string& path);
  void apply_line(const std::string& line);  // "key=value"
  void set(const std::string& key, const std::string& value);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::string require_string(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long get_long(const std::string& key, long fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_double_list(const std::string& key,
                                      const std::vector<double>& fallback) const;

  // Effective configuration, sorted by key, one "key = value" per line.
  std::string dump() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace platecav
