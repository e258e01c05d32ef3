/* Copyright 2026 The ergoeval Authors. All Rights Reserved.

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

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ergoeval {

enum class ErrorCode {
  kMalformedDocument,
  kDanglingReference,
  kInvariantViolation,
  kInvalidCount,
  kInvalidPartition,
  kInvalidOrder,
  kEmptyReferences,
  kUnbuiltInfoTable,
  kEmptyCorpus,
  kInvalidSmoothing,
  kEmptyText,
  kMissingPrediction,
  kMismatchedRuns,
  kWrongImageCount,
  kUnknownQuestion,
  kEmptyResponses,
  kTimeout,
  kRemoteError,
  kAuthMissing,
  kIo,
};

inline std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedDocument: return "MalformedDocument";
    case ErrorCode::kDanglingReference: return "DanglingReference";
    case ErrorCode::kInvariantViolation: return "InvariantViolation";
    case ErrorCode::kInvalidCount: return "InvalidCount";
    case ErrorCode::kInvalidPartition: return "InvalidPartition";
    case ErrorCode::kInvalidOrder: return "InvalidOrder";
    case ErrorCode::kEmptyReferences: return "EmptyReferences";
    case ErrorCode::kUnbuiltInfoTable: return "UnbuiltInfoTable";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kInvalidSmoothing: return "InvalidSmoothing";
    case ErrorCode::kEmptyText: return "EmptyText";
    case ErrorCode::kMissingPrediction: return "MissingPrediction";
    case ErrorCode::kMismatchedRuns: return "MismatchedRuns";
    case ErrorCode::kWrongImageCount: return "WrongImageCount";
    case ErrorCode::kUnknownQuestion: return "UnknownQuestion";
    case ErrorCode::kEmptyResponses: return "EmptyResponses";
    case ErrorCode::kTimeout: return "Timeout";
    case ErrorCode::kRemoteError: return "RemoteError";
    case ErrorCode::kAuthMissing: return "AuthMissing";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

/// Every failure raised by the library. `record_id()` carries the id of the
/// offending record (annotation, image, response) when one exists.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::int64_t> record_id = std::nullopt)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code),
        record_id_(record_id) {}

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::int64_t> record_id() const noexcept { return record_id_; }

 private:
  ErrorCode code_;
  std::optional<std::int64_t> record_id_;
};

}  // namespace ergoeval
