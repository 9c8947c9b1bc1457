#include "nmsub/keyval.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nmsub {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

KeyVal KeyVal::parse(const std::string& text) {
  KeyVal kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidInput("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw InvalidInput("config line " + std::to_string(lineno) + ": empty key");
    kv.values_[key] = value;
  }
  return kv;
}

KeyVal KeyVal::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string KeyVal::getString(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw InvalidInput("missing config key: " + key);
  return it->second;
}

std::string KeyVal::getString(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double KeyVal::getDouble(const std::string& key) const {
  const std::string s = getString(key);
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InvalidInput("config key " + key + ": not a number: " + s);
  }
}

double KeyVal::getDouble(const std::string& key, double fallback) const {
  return has(key) ? getDouble(key) : fallback;
}

long KeyVal::getInt(const std::string& key) const {
  const std::string s = getString(key);
  try {
    std::size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InvalidInput("config key " + key + ": not an integer: " + s);
  }
}

long KeyVal::getInt(const std::string& key, long fallback) const {
  return has(key) ? getInt(key) : fallback;
}

bool KeyVal::getBool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string s = getString(key);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw InvalidInput("config key " + key + ": not a boolean: " + s);
}

std::vector<std::string> KeyVal::getList(const std::string& key) const {
  std::vector<std::string> out;
  std::istringstream ss(getString(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  if (out.empty()) throw InvalidInput("config key " + key + ": empty list");
  return out;
}

std::string KeyVal::serialize() const {
  std::ostringstream out;
  for (const auto& [k, v] : values_) out << k << " = " << v << "\n";
  return out.str();
}

void KeyVal::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << serialize();
}

}  // namespace nmsub
