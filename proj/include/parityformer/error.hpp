// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace parityformer {

enum class ErrorKind {
  invalid_argument,
  dimension_mismatch,
  empty_input,
  indeterminate,
  configuration,
  parse,
  io,
  search_exhausted,
};

/// Base exception for every failure raised by the library. The kind maps
/// one-to-one onto the status codes of the C interface.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace parityformer
