// SPDX-FileCopyrightText: 2026 stnormal contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "stnormal/types.hpp"

namespace stnormal {

enum class CloudFormat { kPly, kCsv };

/// Guesses the format from the file extension (.ply / .csv, case-insensitive).
CloudFormat format_from_path(const std::filesystem::path& path);

struct ReadOptions {
  std::int64_t frame_index = 0;
  /// When set, files without a `t` column/property are accepted and every
  /// point receives this time.
  std::optional<double> constant_time;
};

struct ReadStats {
  std::size_t rejected_non_finite = 0;
  std::size_t rows = 0;                   // data rows / vertices in the file
  std::vector<std::size_t> dropped_rows;  // 0-based row numbers that were rejected
};

/// Reads a timestamped cloud. Rows/vertices with non-finite values are dropped
/// and counted in `stats`.
Cloud read_cloud(const std::filesystem::path& path, CloudFormat format,
                 const ReadOptions& options = {}, ReadStats* stats = nullptr);

/// Reads a cloud annotated with `score` and `label` (as written by write_scored).
/// The validity flag is not serialized; loaded points are marked valid.
std::vector<ScoredPoint> read_scored(const std::filesystem::path& path, CloudFormat format);

enum class PlyEncoding { kAscii, kBinaryLittleEndian };

struct WriteOptions {
  PlyEncoding ply_encoding = PlyEncoding::kBinaryLittleEndian;
  /// Write a header-only file instead of raising EmptyCloudError.
  bool allow_empty = false;
};

/// CSV output uses 17 significant digits so coordinates round-trip exactly.
void write_cloud(const Cloud& cloud, const std::filesystem::path& path, CloudFormat format,
                 const WriteOptions& options = {});

void write_scored(std::span<const ScoredPoint> points, const std::filesystem::path& path,
                  CloudFormat format, const WriteOptions& options = {});

}  // namespace stnormal
