#include "segnmt/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace segnmt {

namespace {

std::string trim(const std::string& s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw std::invalid_argument("config key '" + key + "': cannot parse '" +
                              value + "'");
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& text) {
  KeyValueConfig cfg;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected 'key = value'");
    std::string key = trim(t.substr(0, eq));
    if (key.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": empty key");
    cfg.set(key, trim(t.substr(eq + 1)));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

bool KeyValueConfig::has(const std::string& key) const {
  return find(key).has_value();
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  auto it = std::find_if(entries_.begin(), entries_.end(),
                         [&](const auto& e) { return e.first == key; });
  if (it != entries_.end())
    it->second = value;
  else
    entries_.emplace_back(key, value);
}

std::optional<std::string> KeyValueConfig::find(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return v;
  return std::nullopt;
}

std::string KeyValueConfig::get(const std::string& key,
                                const std::string& fallback) const {
  return find(key).value_or(fallback);
}

std::string KeyValueConfig::require(const std::string& key) const {
  auto v = find(key);
  if (!v) throw std::invalid_argument("missing config key '" + key + "'");
  return *v;
}

long long KeyValueConfig::get_int(const std::string& key,
                                  long long fallback) const {
  auto v = find(key);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    long long out = std::stoll(*v, &used);
    if (used != v->size()) bad_value(key, *v);
    return out;
  } catch (const std::logic_error&) {
    bad_value(key, *v);
  }
}

std::uint64_t KeyValueConfig::get_uint(const std::string& key,
                                       std::uint64_t fallback) const {
  auto v = find(key);
  if (!v) return fallback;
  if (v->empty() || v->front() == '-') bad_value(key, *v);
  try {
    std::size_t used = 0;
    std::uint64_t out = std::stoull(*v, &used);
    if (used != v->size()) bad_value(key, *v);
    return out;
  } catch (const std::logic_error&) {
    bad_value(key, *v);
  }
}

double KeyValueConfig::get_double(const std::string& key,
                                  double fallback) const {
  auto v = find(key);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    double out = std::stod(*v, &used);
    if (used != v->size()) bad_value(key, *v);
    return out;
  } catch (const std::logic_error&) {
    bad_value(key, *v);
  }
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  auto v = find(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  bad_value(key, *v);
}

std::vector<double> KeyValueConfig::get_doubles(
    const std::string& key, std::vector<double> fallback) const {
  auto v = find(key);
  if (!v) return fallback;
  std::vector<double> out;
  for (const auto& item : split_list(*v)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) bad_value(key, *v);
    } catch (const std::logic_error&) {
      bad_value(key, *v);
    }
  }
  return out;
}

std::vector<std::uint64_t> KeyValueConfig::get_uints(
    const std::string& key, std::vector<std::uint64_t> fallback) const {
  auto v = find(key);
  if (!v) return fallback;
  std::vector<std::uint64_t> out;
  for (const auto& item : split_list(*v)) {
    if (item.front() == '-') bad_value(key, *v);
    try {
      std::size_t used = 0;
      out.push_back(std::stoull(item, &used));
      if (used != item.size()) bad_value(key, *v);
    } catch (const std::logic_error&) {
      bad_value(key, *v);
    }
  }
  return out;
}

std::string KeyValueConfig::str() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
  return out;
}

}  // namespace segnmt
