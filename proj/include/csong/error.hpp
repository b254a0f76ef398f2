// Copyright 2026 The csong Authors
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

namespace csong {

/// Every failure raised by the library carries one of these kinds so callers
/// (the CLI in particular) can map it to an exit status without string matching.
enum class ErrorKind {
  kFileNotFound,
  kUnwritablePath,
  kUnsupportedEncoding,
  kUnsupportedChannels,
  kMalformedFile,
  kVersionMismatch,
  kCorruptedPayload,
  kEmptyInput,
  kLengthMismatch,
  kRateMismatch,
  kZeroPower,
  kOutOfRange,
  kAudioTooShort,
  kShapeMismatch,
  kUnknownTransitionId,
  kOutOfVocabulary,
  kInvalidArgument,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// True for kinds that describe a problem with a file on disk rather than with
/// the numbers inside it.
bool is_io_error(ErrorKind kind);

}  // namespace csong
