// Copyright 2026 The CompNet Authors.
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

namespace compnet {

enum class ErrorCode {
  InvalidFeature,
  BadMagic,
  VersionMismatch,
  Truncated,
  SizeMismatch,
  DimensionMismatch,
  InvalidWeights,
  InsufficientData,
  InvalidPrior,
  InvalidConfig,
  InvalidManifest,
  Io,
  Numerical,
};

const char* to_string(ErrorCode code);

/// Every failure raised by the library carries a code so callers (the CLI in
/// particular) can map it to an exit status without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidFeature: return "InvalidFeature";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::Truncated: return "Truncated";
    case ErrorCode::SizeMismatch: return "SizeMismatch";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidWeights: return "InvalidWeights";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::InvalidPrior: return "InvalidPrior";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidManifest: return "InvalidManifest";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Numerical: return "Numerical";
  }
  return "Unknown";
}

inline void check_prior(double pi) {
  if (!(pi > 0.0 && pi < 1.0)) {
    throw Error(ErrorCode::InvalidPrior, "visibility prior must lie in (0, 1), got " + std::to_string(pi));
  }
}

}  // namespace compnet
