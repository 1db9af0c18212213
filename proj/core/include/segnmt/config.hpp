#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace segnmt {

/// Flat `key = value` text configuration. Blank lines and lines starting
/// with '#' are ignored; later assignments overwrite earlier ones but keep
/// the original position, so `str()` reproduces a stable ordering.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig parse(const std::string& text);
  static KeyValueConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const;
  void set(const std::string& key, const std::string& value);

  std::optional<std::string> find(const std::string& key) const;
  std::string get(const std::string& key, const std::string& fallback) const;
  std::string require(const std::string& key) const;
  long long get_int(const std::string& key, long long fallback) const;
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  /// Comma-separated list of numbers.
  std::vector<double> get_doubles(const std::string& key,
                                  std::vector<double> fallback) const;
  std::vector<std::uint64_t> get_uints(const std::string& key,
                                       std::vector<std::uint64_t> fallback) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const {
    return entries_;
  }
  std::string str() const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

}  // namespace segnmt
