// SPDX-FileCopyrightText: 2026 stnormal contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace stnormal {

/// Flat `key = value` text with `#` comments, used for run configs and scene files.
/// Keys keep their file order. Malformed lines and duplicate keys raise ConfigError.
class KeyValueFile {
 public:
  KeyValueFile() = default;

  static KeyValueFile parse(std::string_view text, std::string_view source = "<string>");
  static KeyValueFile load(const std::filesystem::path& path);

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  bool has(std::string_view key) const { return find(key) != nullptr; }
  const std::string* find(std::string_view key) const;

  std::optional<std::string> get_string(std::string_view key) const;
  std::optional<double> get_double(std::string_view key) const;
  std::optional<long long> get_int(std::string_view key) const;
  std::optional<bool> get_bool(std::string_view key) const;

  void set(std::string key, std::string value);
  void erase(std::string_view key);
  const std::string& source() const { return source_; }

 private:
  std::string source_;
  std::vector<std::pair<std::string, std::string>> entries_;
};

double parse_number(std::string_view text, std::string_view what);

}  // namespace stnormal
