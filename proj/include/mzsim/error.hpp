// Copyright 2026 The mzsim Authors
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

namespace mzsim {

enum class Errc {
  MixedPhotonNumber,
  EmptyState,
  PhotonLimitExceeded,
  NonUnitary,
  DuplicateMode,
  ZeroNorm,
  OverlappingModes,
  UnregisteredPath,
  InvalidArgument,
  NonPositiveLength,
  GridTooCoarse,
  UnsupportedN,
  WrongPhotonNumber,
  Degenerate,
  NoConvergence,
  InsufficientData,
  WindowTooSmall,
};

constexpr std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::MixedPhotonNumber: return "MixedPhotonNumber";
    case Errc::EmptyState: return "EmptyState";
    case Errc::PhotonLimitExceeded: return "PhotonLimitExceeded";
    case Errc::NonUnitary: return "NonUnitary";
    case Errc::DuplicateMode: return "DuplicateMode";
    case Errc::ZeroNorm: return "ZeroNorm";
    case Errc::OverlappingModes: return "OverlappingModes";
    case Errc::UnregisteredPath: return "UnregisteredPath";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::NonPositiveLength: return "NonPositiveLength";
    case Errc::GridTooCoarse: return "GridTooCoarse";
    case Errc::UnsupportedN: return "UnsupportedN";
    case Errc::WrongPhotonNumber: return "WrongPhotonNumber";
    case Errc::Degenerate: return "Degenerate";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::InsufficientData: return "InsufficientData";
    case Errc::WindowTooSmall: return "WindowTooSmall";
  }
  return "Unknown";
}

/// Error raised by every library routine. The code identifies the failed contract.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

  /// Fit failures are reported separately by the command-line front end.
  bool is_fit_failure() const noexcept {
    return code_ == Errc::NoConvergence || code_ == Errc::InsufficientData ||
           code_ == Errc::WindowTooSmall;
  }

 private:
  Errc code_;
};

}  // namespace mzsim
