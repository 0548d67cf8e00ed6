// Copyright 2026 The HalMit Authors.
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

#ifndef HALMIT_ERROR_H_
#define HALMIT_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace halmit {

enum class ErrorCode {
  kInvalidArgument,
  kTransport,          // remote backend unreachable or non-2xx after retries
  kScriptMissing,      // scripted backend has no reply for a prompt
  kDimensionMismatch,
  kDuplicateId,
  kNotFound,
  kVersionMismatch,
  kCorrupt,            // checksum or framing failure on a persisted file
  kIo,
  kUnparseable,        // model output could not be interpreted
  kDegenerate,         // generator kept echoing, or a centroid with zero weight
  kNumerical,          // non-finite values during training
  kConfig,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }
  bool retryable() const { return code_ == ErrorCode::kTransport; }

 private:
  ErrorCode code_;
};

}  // namespace halmit

#endif  // HALMIT_ERROR_H_
