// Copyright 2026 The agrip Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace agrip {

enum class ErrorKind {
  // preconditions
  CompositeCharacteristic,
  ReducibleModulus,
  InvalidArgument,
  DivisionByZero,
  SingleColumn,
  DegenerateShape,
  RankDeficient,
  PoleEvalOverlap,
  DegreeTooLarge,
  PolytopeTooLarge,
  DuplicateColumns,
  PointCountMismatch,
  NonBinaryInput,
  NoNonvanishingBasisFunction,
  GcdConditionViolated,
  ShapeMismatch,
  ParseError,
  // enumeration and memory caps
  CapExceeded,
  EnumerationCapExceeded,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::CompositeCharacteristic: return "CompositeCharacteristic";
    case ErrorKind::ReducibleModulus: return "ReducibleModulus";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DivisionByZero: return "DivisionByZero";
    case ErrorKind::SingleColumn: return "SingleColumn";
    case ErrorKind::DegenerateShape: return "DegenerateShape";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::PoleEvalOverlap: return "PoleEvalOverlap";
    case ErrorKind::DegreeTooLarge: return "DegreeTooLarge";
    case ErrorKind::PolytopeTooLarge: return "PolytopeTooLarge";
    case ErrorKind::DuplicateColumns: return "DuplicateColumns";
    case ErrorKind::PointCountMismatch: return "PointCountMismatch";
    case ErrorKind::NonBinaryInput: return "NonBinaryInput";
    case ErrorKind::NoNonvanishingBasisFunction: return "NoNonvanishingBasisFunction";
    case ErrorKind::GcdConditionViolated: return "GcdConditionViolated";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::CapExceeded: return "CapExceeded";
    case ErrorKind::EnumerationCapExceeded: return "EnumerationCapExceeded";
  }
  return "Unknown";
}

/// True for errors raised because a size limit was hit rather than because
/// the input was wrong.
constexpr bool is_cap_error(ErrorKind kind) {
  return kind == ErrorKind::CapExceeded || kind == ErrorKind::EnumerationCapExceeded;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) fail(kind, what);
}

}  // namespace agrip
