// SPDX-FileCopyrightText: 2026 stnormal contributors
// SPDX-License-Identifier: Apache-2.0
#include "stnormal/cloud_io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>

#include "stnormal/error.hpp"

namespace stnormal {

static_assert(std::endian::native == std::endian::little,
              "binary PLY I/O assumes a little-endian host");

namespace {

// Column-oriented view of either file format before it is mapped onto points.
struct Table {
  std::vector<std::string> names;
  std::vector<double> values;  // row-major, names.size() per row
  std::size_t rows = 0;

  std::optional<std::size_t> column(std::string_view name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) return std::nullopt;
    return static_cast<std::size_t>(it - names.begin());
  }
  double at(std::size_t row, std::size_t col) const { return values[row * names.size() + col]; }
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return value;
}

std::optional<double> parse_label(std::string_view s) {
  const std::string word = lower(trim(s));
  if (word == "dynamic" || word == "1") return 1.0;
  if (word == "static" || word == "0") return 0.0;
  return std::nullopt;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// ---------------------------------------------------------------------------- CSV

Table decode_csv(const std::filesystem::path& path) {
  const std::string text = slurp(path);
  Table table;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool have_header = false;
  std::optional<std::size_t> label_col;
  std::vector<std::string_view> fields;

  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) continue;

    fields.clear();
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }

    if (!have_header) {
      for (const auto f : fields) table.names.emplace_back(lower(trim(f)));
      label_col = table.column("label");
      have_header = true;
      continue;
    }
    if (fields.size() != table.names.size()) {
      throw ParseError(path.string(), line_no,
                       "expected " + std::to_string(table.names.size()) + " fields, got " +
                           std::to_string(fields.size()));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const auto value = (label_col && c == *label_col) ? parse_label(fields[c])
                                                         : parse_double(fields[c]);
      if (!value) {
        throw ParseError(path.string(), line_no,
                         "cannot parse '" + std::string(trim(fields[c])) + "' in column '" +
                             table.names[c] + "'");
      }
      table.values.push_back(*value);
    }
    ++table.rows;
  }
  if (!have_header) throw ParseError(path.string(), 1, "missing CSV header");
  return table;
}

// ---------------------------------------------------------------------------- PLY

enum class PlyType { kInt8, kUint8, kInt16, kUint16, kInt32, kUint32, kFloat32, kFloat64 };

std::optional<PlyType> ply_type(std::string_view name) {
  if (name == "char" || name == "int8") return PlyType::kInt8;
  if (name == "uchar" || name == "uint8") return PlyType::kUint8;
  if (name == "short" || name == "int16") return PlyType::kInt16;
  if (name == "ushort" || name == "uint16") return PlyType::kUint16;
  if (name == "int" || name == "int32") return PlyType::kInt32;
  if (name == "uint" || name == "uint32") return PlyType::kUint32;
  if (name == "float" || name == "float32") return PlyType::kFloat32;
  if (name == "double" || name == "float64") return PlyType::kFloat64;
  return std::nullopt;
}

std::size_t ply_size(PlyType type) {
  switch (type) {
    case PlyType::kInt8:
    case PlyType::kUint8:
      return 1;
    case PlyType::kInt16:
    case PlyType::kUint16:
      return 2;
    case PlyType::kInt32:
    case PlyType::kUint32:
    case PlyType::kFloat32:
      return 4;
    case PlyType::kFloat64:
      return 8;
  }
  return 0;
}

template <typename T>
double load_as(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return static_cast<double>(v);
}

double ply_load(PlyType type, const char* p) {
  switch (type) {
    case PlyType::kInt8:
      return load_as<std::int8_t>(p);
    case PlyType::kUint8:
      return load_as<std::uint8_t>(p);
    case PlyType::kInt16:
      return load_as<std::int16_t>(p);
    case PlyType::kUint16:
      return load_as<std::uint16_t>(p);
    case PlyType::kInt32:
      return load_as<std::int32_t>(p);
    case PlyType::kUint32:
      return load_as<std::uint32_t>(p);
    case PlyType::kFloat32:
      return load_as<float>(p);
    case PlyType::kFloat64:
      return load_as<double>(p);
  }
  return 0.0;
}

struct PlyProperty {
  std::string name;
  PlyType type = PlyType::kFloat32;
  bool is_list = false;
  PlyType count_type = PlyType::kUint8;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
};

Table decode_ply(const std::filesystem::path& path) {
  const std::string text = slurp(path);
  const std::string where = path.string();
  std::size_t pos = 0;
  std::size_t line_no = 0;
  auto next_line = [&]() -> std::optional<std::string_view> {
    if (pos >= text.size()) return std::nullopt;
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
  };

  const auto magic = next_line();
  if (!magic || trim(*magic) != "ply") throw ParseError(where, 1, "not a PLY file");

  bool binary = false;
  bool have_format = false;
  std::vector<PlyElement> elements;
  while (true) {
    const auto line = next_line();
    if (!line) throw ParseError(where, line_no, "unterminated PLY header");
    std::istringstream words{std::string(*line)};
    std::string keyword;
    words >> keyword;
    if (keyword.empty() || keyword == "comment" || keyword == "obj_info") continue;
    if (keyword == "end_header") break;
    if (keyword == "format") {
      std::string fmt;
      words >> fmt;
      if (fmt == "ascii") {
        binary = false;
      } else if (fmt == "binary_little_endian") {
        binary = true;
      } else {
        throw ParseError(where, line_no, "unsupported PLY format '" + fmt + "'");
      }
      have_format = true;
    } else if (keyword == "element") {
      PlyElement element;
      if (!(words >> element.name >> element.count)) {
        throw ParseError(where, line_no, "malformed element declaration");
      }
      elements.push_back(std::move(element));
    } else if (keyword == "property") {
      if (elements.empty()) throw ParseError(where, line_no, "property before any element");
      PlyProperty prop;
      std::string type_name;
      words >> type_name;
      if (type_name == "list") {
        std::string count_name, item_name;
        words >> count_name >> item_name >> prop.name;
        const auto ct = ply_type(count_name);
        const auto it = ply_type(item_name);
        if (!ct || !it) throw ParseError(where, line_no, "unknown list type");
        prop.is_list = true;
        prop.count_type = *ct;
        prop.type = *it;
      } else {
        const auto t = ply_type(type_name);
        if (!t) throw ParseError(where, line_no, "unknown property type '" + type_name + "'");
        prop.type = *t;
        words >> prop.name;
      }
      if (prop.name.empty()) throw ParseError(where, line_no, "property without a name");
      elements.back().properties.push_back(std::move(prop));
    } else {
      throw ParseError(where, line_no, "unexpected header keyword '" + keyword + "'");
    }
  }
  if (!have_format) throw ParseError(where, line_no, "missing format line");

  const auto vertex_it = std::find_if(elements.begin(), elements.end(),
                                      [](const PlyElement& e) { return e.name == "vertex"; });
  if (vertex_it == elements.end()) throw MissingFieldError(where, "vertex");

  Table table;
  for (const auto& prop : vertex_it->properties) {
    if (!prop.is_list) table.names.push_back(lower(prop.name));
  }
  table.rows = vertex_it->count;
  table.values.reserve(table.rows * table.names.size());

  if (binary) {
    const char* cursor = text.data() + pos;
    const char* const end = text.data() + text.size();
    auto need = [&](std::size_t n) {
      if (static_cast<std::size_t>(end - cursor) < n) {
        throw IoError(where, "binary PLY payload truncated");
      }
    };
    for (auto e = elements.begin(); e != std::next(vertex_it); ++e) {
      const bool keep = e == vertex_it;
      for (std::size_t r = 0; r < e->count; ++r) {
        for (const auto& prop : e->properties) {
          if (prop.is_list) {
            need(ply_size(prop.count_type));
            const double n = ply_load(prop.count_type, cursor);
            cursor += ply_size(prop.count_type);
            const auto bytes = static_cast<std::size_t>(n) * ply_size(prop.type);
            need(bytes);
            cursor += bytes;
          } else {
            need(ply_size(prop.type));
            if (keep) table.values.push_back(ply_load(prop.type, cursor));
            cursor += ply_size(prop.type);
          }
        }
      }
    }
  } else {
    for (auto e = elements.begin(); e != std::next(vertex_it); ++e) {
      const bool keep = e == vertex_it;
      for (std::size_t r = 0; r < e->count; ++r) {
        const auto line = next_line();
        if (!line) throw ParseError(where, line_no, "ascii PLY payload truncated");
        std::string_view rest = *line;
        auto token = [&]() -> std::string_view {
          rest = trim(rest);
          std::size_t n = 0;
          while (n < rest.size() && !std::isspace(static_cast<unsigned char>(rest[n]))) ++n;
          const auto tok = rest.substr(0, n);
          rest.remove_prefix(n);
          return tok;
        };
        for (const auto& prop : e->properties) {
          const auto first = parse_double(token());
          if (!first) throw ParseError(where, line_no, "malformed value for '" + prop.name + "'");
          if (prop.is_list) {
            for (std::size_t i = 0; i < static_cast<std::size_t>(*first); ++i) token();
          } else if (keep) {
            table.values.push_back(prop.type == PlyType::kFloat32
                                       ? static_cast<double>(static_cast<float>(*first))
                                       : *first);
          }
        }
      }
    }
  }
  return table;
}

Table decode(const std::filesystem::path& path, CloudFormat format) {
  return format == CloudFormat::kCsv ? decode_csv(path) : decode_ply(path);
}

struct Columns {
  std::size_t x, y, z;
  std::optional<std::size_t> t;
};

Columns spatial_columns(const Table& table, const std::filesystem::path& path, bool need_time) {
  auto require = [&](const char* name) {
    const auto c = table.column(name);
    if (!c) throw MissingFieldError(path.string(), name);
    return *c;
  };
  Columns cols{require("x"), require("y"), require("z"), table.column("t")};
  if (need_time && !cols.t) throw MissingFieldError(path.string(), "t");
  return cols;
}

// ---------------------------------------------------------------------------- writers

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError(path.string(), "write failed");
}

void append_number(std::string& buf, double value, int precision) {
  char tmp[64];
  const auto res = std::to_chars(tmp, tmp + sizeof(tmp), value, std::chars_format::general,
                                 precision);
  buf.append(tmp, res.ptr);
}

template <typename T>
void append_binary(std::string& buf, T value) {
  char tmp[sizeof(T)];
  std::memcpy(tmp, &value, sizeof(T));
  buf.append(tmp, sizeof(T));
}

// Writes points (and optionally score/label) in either format.
void write_rows(std::span<const TimedPoint> points, std::span<const ScoredPoint> scored,
                const std::filesystem::path& path, CloudFormat format,
                const WriteOptions& options) {
  const bool with_scores = scored.data() != nullptr;
  const std::size_t n = with_scores ? scored.size() : points.size();
  if (n == 0 && !options.allow_empty) throw EmptyCloudError(path.string());
  auto point_at = [&](std::size_t i) -> const TimedPoint& {
    return with_scores ? scored[i].point : points[i];
  };

  std::string buf;
  buf.reserve(n * (with_scores ? 110 : 90) + 256);
  if (format == CloudFormat::kCsv) {
    buf += with_scores ? "x,y,z,t,score,label\n" : "x,y,z,t\n";
    for (std::size_t i = 0; i < n; ++i) {
      const auto& p = point_at(i);
      append_number(buf, p.x, 17);
      buf += ',';
      append_number(buf, p.y, 17);
      buf += ',';
      append_number(buf, p.z, 17);
      buf += ',';
      append_number(buf, p.t, 17);
      if (with_scores) {
        buf += ',';
        append_number(buf, scored[i].score, 17);
        buf += ',';
        buf += to_string(scored[i].label);
      }
      buf += '\n';
    }
  } else {
    const bool binary = options.ply_encoding == PlyEncoding::kBinaryLittleEndian;
    buf += "ply\n";
    buf += binary ? "format binary_little_endian 1.0\n" : "format ascii 1.0\n";
    buf += "element vertex " + std::to_string(n) + "\n";
    buf += "property float x\nproperty float y\nproperty float z\nproperty double t\n";
    if (with_scores) buf += "property double score\nproperty uchar label\n";
    buf += "end_header\n";
    for (std::size_t i = 0; i < n; ++i) {
      const auto& p = point_at(i);
      if (binary) {
        append_binary(buf, static_cast<float>(p.x));
        append_binary(buf, static_cast<float>(p.y));
        append_binary(buf, static_cast<float>(p.z));
        append_binary(buf, p.t);
        if (with_scores) {
          append_binary(buf, scored[i].score);
          append_binary(buf, static_cast<std::uint8_t>(scored[i].label));
        }
      } else {
        append_number(buf, static_cast<float>(p.x), 9);
        buf += ' ';
        append_number(buf, static_cast<float>(p.y), 9);
        buf += ' ';
        append_number(buf, static_cast<float>(p.z), 9);
        buf += ' ';
        append_number(buf, p.t, 17);
        if (with_scores) {
          buf += ' ';
          append_number(buf, scored[i].score, 17);
          buf += ' ';
          buf += scored[i].label == Label::kDynamic ? '1' : '0';
        }
        buf += '\n';
      }
    }
  }
  auto out = open_for_write(path);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  finish(out, path);
}

}  // namespace

CloudFormat format_from_path(const std::filesystem::path& path) {
  const std::string ext = lower(path.extension().string());
  if (ext == ".ply") return CloudFormat::kPly;
  if (ext == ".csv") return CloudFormat::kCsv;
  throw IoError(path.string(), "unknown cloud extension '" + ext + "'");
}

Cloud read_cloud(const std::filesystem::path& path, CloudFormat format, const ReadOptions& options,
                 ReadStats* stats) {
  const Table table = decode(path, format);
  const Columns cols = spatial_columns(table, path, !options.constant_time.has_value());

  std::vector<TimedPoint> points;
  points.reserve(table.rows);
  std::size_t rejected = 0;
  for (std::size_t r = 0; r < table.rows; ++r) {
    TimedPoint p{table.at(r, cols.x), table.at(r, cols.y), table.at(r, cols.z),
                 cols.t ? table.at(r, *cols.t) : *options.constant_time};
    if (!p.finite()) {
      ++rejected;
      if (stats) stats->dropped_rows.push_back(r);
      continue;
    }
    points.push_back(p);
  }
  if (stats) {
    stats->rejected_non_finite = rejected;
    stats->rows = table.rows;
  }
  if (points.empty()) throw EmptyCloudError(path.string());
  return make_cloud(options.frame_index, std::move(points));
}

std::vector<ScoredPoint> read_scored(const std::filesystem::path& path, CloudFormat format) {
  const Table table = decode(path, format);
  const Columns cols = spatial_columns(table, path, true);
  const auto score_col = table.column("score");
  const auto label_col = table.column("label");
  if (!score_col) throw MissingFieldError(path.string(), "score");
  if (!label_col) throw MissingFieldError(path.string(), "label");

  std::vector<ScoredPoint> out;
  out.reserve(table.rows);
  for (std::size_t r = 0; r < table.rows; ++r) {
    ScoredPoint sp;
    sp.point = {table.at(r, cols.x), table.at(r, cols.y), table.at(r, cols.z),
                table.at(r, *cols.t)};
    sp.score = table.at(r, *score_col);
    if (!sp.point.finite() || !std::isfinite(sp.score)) continue;
    sp.valid = true;
    sp.label = table.at(r, *label_col) != 0.0 ? Label::kDynamic : Label::kStatic;
    out.push_back(sp);
  }
  if (out.empty()) throw EmptyCloudError(path.string());
  return out;
}

void write_cloud(const Cloud& cloud, const std::filesystem::path& path, CloudFormat format,
                 const WriteOptions& options) {
  write_rows(cloud.points, {}, path, format, options);
}

void write_scored(std::span<const ScoredPoint> points, const std::filesystem::path& path,
                  CloudFormat format, const WriteOptions& options) {
  // A non-null data pointer marks the scored layout even for an empty list.
  static const ScoredPoint kNone{};
  const std::span<const ScoredPoint> rows =
      points.empty() ? std::span<const ScoredPoint>(&kNone, 0) : points;
  write_rows({}, rows, path, format, options);
}

}  // namespace stnormal
