// SPDX-FileCopyrightText: 2026 stnormal contributors
// SPDX-License-Identifier: Apache-2.0
#include "stnormal/key_value.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <iterator>

#include "stnormal/error.hpp"

namespace stnormal {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

double parse_number(std::string_view text, std::string_view what) {
  std::string_view s = trim(text);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError(std::string(what) + ": expected a number, got '" + std::string(text) + "'");
  }
  return value;
}

KeyValueFile KeyValueFile::parse(std::string_view text, std::string_view source) {
  KeyValueFile file;
  file.source_ = std::string(source);
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = file.source_ + ":" + std::to_string(line_no);
    if (eq == std::string_view::npos) throw ConfigError(where + ": expected 'key = value'");
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (file.has(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
    file.entries_.emplace_back(std::move(key), std::move(value));
  }
  return file;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open config file");
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return parse(text, path.string());
}

const std::string* KeyValueFile::find(std::string_view key) const {
  const auto it = std::find_if(entries_.begin(), entries_.end(),
                               [&](const auto& kv) { return kv.first == key; });
  return it == entries_.end() ? nullptr : &it->second;
}

std::optional<std::string> KeyValueFile::get_string(std::string_view key) const {
  if (const auto* v = find(key)) return *v;
  return std::nullopt;
}

std::optional<double> KeyValueFile::get_double(std::string_view key) const {
  if (const auto* v = find(key)) return parse_number(*v, source_ + ": " + std::string(key));
  return std::nullopt;
}

std::optional<long long> KeyValueFile::get_int(std::string_view key) const {
  const auto* v = find(key);
  if (!v) return std::nullopt;
  long long value = 0;
  const std::string_view s = trim(*v);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError(source_ + ": " + std::string(key) + ": expected an integer, got '" + *v +
                      "'");
  }
  return value;
}

std::optional<bool> KeyValueFile::get_bool(std::string_view key) const {
  const auto* v = find(key);
  if (!v) return std::nullopt;
  if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
  if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
  throw ConfigError(source_ + ": " + std::string(key) + ": expected a boolean, got '" + *v + "'");
}

void KeyValueFile::set(std::string key, std::string value) {
  const auto it = std::find_if(entries_.begin(), entries_.end(),
                               [&](const auto& kv) { return kv.first == key; });
  if (it != entries_.end()) {
    it->second = std::move(value);
  } else {
    entries_.emplace_back(std::move(key), std::move(value));
  }
}

void KeyValueFile::erase(std::string_view key) {
  std::erase_if(entries_, [&](const auto& kv) { return kv.first == key; });
}

}  // namespace stnormal
