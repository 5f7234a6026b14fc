// Copyright 2026 The Stalesim Authors.
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


#include "stalesim/common.h"

namespace stalesim {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNoCapacity:
      return "NoCapacity";
    case ErrorCode::kDuplicateKey:
      return "DuplicateKey";
    case ErrorCode::kUnknownTrajectory:
      return "UnknownTrajectory";
    case ErrorCode::kUnknownKey:
      return "UnknownKey";
    case ErrorCode::kNotReserved:
      return "NotReserved";
    case ErrorCode::kNotReady:
      return "NotReady";
    case ErrorCode::kUnknownBuffer:
      return "UnknownBuffer";
    case ErrorCode::kInvalidVersion:
      return "InvalidVersion";
    case ErrorCode::kDegenerate:
      return "Degenerate";
    case ErrorCode::kInvalidInput:
      return "InvalidInput";
    case ErrorCode::kInstanceMismatch:
      return "InstanceMismatch";
    case ErrorCode::kNegativeCount:
      return "NegativeCount";
    case ErrorCode::kVersionSkip:
      return "VersionSkip";
    case ErrorCode::kUncoverable:
      return "Uncoverable";
    case ErrorCode::kUnknownInstance:
      return "UnknownInstance";
    case ErrorCode::kConfigInvalid:
      return "ConfigInvalid";
    case ErrorCode::kDeadlock:
      return "Deadlock";
    case ErrorCode::kMalformedTrace:
      return "MalformedTrace";
  }
  return "Unknown";
}

}  // namespace stalesim
