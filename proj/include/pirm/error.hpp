/* Copyright 2026 The pirm-bench Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#pragma once

#include <stdexcept>
#include <string>

namespace pirm {

// Coarse error classes; each maps onto one CLI exit code.
enum class ErrorKind { validation = 1, io = 2, execution = 3 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& prefix, const std::string& detail)
      : std::runtime_error(prefix + detail), kind_(kind), detail_(detail) {}
  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }
  // The message without its category prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

struct ShapeError : Error {
  explicit ShapeError(const std::string& what)
      : Error(ErrorKind::validation, "shape error: ", what) {}
};

struct SizeError : Error {
  explicit SizeError(const std::string& what)
      : Error(ErrorKind::validation, "size error: ", what) {}
};

// Malformed graph files, weight files and report inputs.
struct FormatError : Error {
  explicit FormatError(const std::string& what)
      : Error(ErrorKind::validation, "format error: ", what) {}
};

struct DomainError : Error {
  explicit DomainError(const std::string& what)
      : Error(ErrorKind::validation, "domain error: ", what) {}
};

struct ValidationError : Error {
  explicit ValidationError(const std::string& what)
      : Error(ErrorKind::validation, "", what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what)
      : Error(ErrorKind::io, "I/O error: ", what) {}
};

struct ExecutionError : Error {
  explicit ExecutionError(const std::string& what)
      : Error(ErrorKind::execution, "execution error: ", what) {}
};

}  // namespace pirm
