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

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace stalesim {

// Model version index. Version 0 is the initial model; every training step
// produces the next version.
using Version = int64_t;
using TrajId = uint64_t;
// Identifies a trajectory group (one ledger entry).
using GroupKey = uint64_t;
using InstanceId = int32_t;

enum class ErrorCode {
  kNoCapacity,
  kDuplicateKey,
  kUnknownTrajectory,
  kUnknownKey,
  kNotReserved,
  kNotReady,
  kUnknownBuffer,
  kInvalidVersion,
  kDegenerate,
  kInvalidInput,
  kInstanceMismatch,
  kNegativeCount,
  kVersionSkip,
  kUncoverable,
  kUnknownInstance,
  kConfigInvalid,
  kDeadlock,
  kMalformedTrace,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " +
                           message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace stalesim
