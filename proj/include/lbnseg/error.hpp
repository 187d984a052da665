/* Copyright 2026 The lbnseg Authors. All Rights Reserved.

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

#ifndef LBNSEG_ERROR_HPP_
#define LBNSEG_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace lbnseg {

// Broad failure categories. The CLI maps these onto exit codes.
enum class ErrorKind {
  kShape,         // tensor/spec shape contract violated
  kBinding,       // graph parameter missing, unused or mis-shaped
  kFormat,        // malformed file contents (weights, images)
  kIo,            // filesystem failure
  kUsage,         // bad caller arguments
  kVerification,  // an oracle or invariant check failed
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kShape: return "shape";
    case ErrorKind::kBinding: return "binding";
    case ErrorKind::kFormat: return "format";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kUsage: return "usage";
    case ErrorKind::kVerification: return "verification";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& message)
      : Error(ErrorKind::kShape, message) {}
};

class BindingError : public Error {
 public:
  explicit BindingError(const std::string& message)
      : Error(ErrorKind::kBinding, message) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& message)
      : Error(ErrorKind::kFormat, message) {}
};

}  // namespace lbnseg

#endif  // LBNSEG_ERROR_HPP_
