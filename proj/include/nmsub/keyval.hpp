#pragma once

#include "nmsub/manifold.hpp"

#include <map>
#include <string>
#include <vector>

namespace nmsub {

/// Flat key-value configuration text: one `key = value` per line, `#`
/// comments, dotted sections spelled out in full (solver.mean.sigma = 1e-4).
class KeyVal {
 public:
  KeyVal() = default;
  static KeyVal parse(const std::string& text);
  static KeyVal load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string getString(const std::string& key) const;
  std::string getString(const std::string& key, const std::string& fallback) const;
  double getDouble(const std::string& key) const;
  double getDouble(const std::string& key, double fallback) const;
  long getInt(const std::string& key) const;
  long getInt(const std::string& key, long fallback) const;
  bool getBool(const std::string& key, bool fallback) const;
  /// Comma-separated list value.
  std::vector<std::string> getList(const std::string& key) const;

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  const std::map<std::string, std::string>& entries() const { return values_; }

  std::string serialize() const;
  void save(const std::string& path) const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace nmsub
