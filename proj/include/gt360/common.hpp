// Copyright 2026 The gt360 Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GT360_COMMON_HPP
#define GT360_COMMON_HPP

#include <stdexcept>
#include <string>
#include <utility>

namespace gt360 {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class CodecError : public Error {
 public:
  using Error::Error;
};

class DetectorError : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class TrainError : public Error {
 public:
  using Error::Error;
};

// Value-or-error carrier for per-element failures inside batch operations,
// where throwing would abort the whole batch.
template <typename T>
class Result {
 public:
  static Result ok(T value) {
    Result r;
    r.has_value_ = true;
    r.value_ = std::move(value);
    return r;
  }
  static Result err(std::string message) {
    Result r;
    r.has_value_ = false;
    r.error_ = std::move(message);
    return r;
  }

  bool has_value() const { return has_value_; }
  explicit operator bool() const { return has_value_; }
  const T& value() const {
    if (!has_value_) throw Error("Result::value on error: " + error_);
    return value_;
  }
  T& value() {
    if (!has_value_) throw Error("Result::value on error: " + error_);
    return value_;
  }
  const std::string& error() const { return error_; }

 private:
  Result() = default;
  bool has_value_ = false;
  T value_{};
  std::string error_;
};

}  // namespace gt360

#endif  // GT360_COMMON_HPP
