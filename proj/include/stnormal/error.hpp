// SPDX-FileCopyrightText: 2026 stnormal contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stnormal {

/// Base of all library errors. Precondition violations on numeric
/// arguments (non-positive radius, voxel size, ...) use std::invalid_argument.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  IoError(const std::string& path, const std::string& what)
      : Error(path + ": " + what), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class ParseError : public IoError {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : IoError(path, "line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class MissingFieldError : public IoError {
 public:
  MissingFieldError(const std::string& path, const std::string& field)
      : IoError(path, "missing field '" + field + "'"), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class EmptyCloudError : public Error {
 public:
  EmptyCloudError() : Error("empty cloud") {}
  explicit EmptyCloudError(const std::string& context) : Error(context + ": empty cloud") {}
};

class OrderError : public Error {
 public:
  using Error::Error;
};

class WindowNotFullError : public Error {
 public:
  WindowNotFullError() : Error("sliding window is not full") {}
};

class OutOfRangeStampError : public Error {
 public:
  OutOfRangeStampError(double stamp, double first, double last);
  double stamp() const noexcept { return stamp_; }

 private:
  double stamp_;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace stnormal
