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

#include "csong/error.hpp"

namespace csong {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kFileNotFound: return "file_not_found";
    case ErrorKind::kUnwritablePath: return "unwritable_path";
    case ErrorKind::kUnsupportedEncoding: return "unsupported_encoding";
    case ErrorKind::kUnsupportedChannels: return "unsupported_channels";
    case ErrorKind::kMalformedFile: return "malformed_file";
    case ErrorKind::kVersionMismatch: return "version_mismatch";
    case ErrorKind::kCorruptedPayload: return "corrupted_payload";
    case ErrorKind::kEmptyInput: return "empty_input";
    case ErrorKind::kLengthMismatch: return "length_mismatch";
    case ErrorKind::kRateMismatch: return "rate_mismatch";
    case ErrorKind::kZeroPower: return "zero_power";
    case ErrorKind::kOutOfRange: return "out_of_range";
    case ErrorKind::kAudioTooShort: return "audio_too_short";
    case ErrorKind::kShapeMismatch: return "shape_mismatch";
    case ErrorKind::kUnknownTransitionId: return "unknown_transition_id";
    case ErrorKind::kOutOfVocabulary: return "out_of_vocabulary";
    case ErrorKind::kInvalidArgument: return "invalid_argument";
  }
  return "unknown";
}

bool is_io_error(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kFileNotFound:
    case ErrorKind::kUnwritablePath:
    case ErrorKind::kUnsupportedEncoding:
    case ErrorKind::kUnsupportedChannels:
    case ErrorKind::kMalformedFile:
    case ErrorKind::kVersionMismatch:
    case ErrorKind::kCorruptedPayload:
      return true;
    default:
      return false;
  }
}

}  // namespace csong
