// Copyright 2026 The sdsmi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sdsmi {

enum class ErrorKind {
  InvalidArgument,
  NonPositiveSigma,
  NonIntegrableH,
  UnsupportedDerivative,
  GridOverflow,
  OffGridTime,
  InvalidScheme,
  PopulationExplosion,
  CFLViolation,
  NegativePhiInput,
  BlowUp,
  DegenerateWeights,
  InsufficientReplicates,
  HypothesisViolated,
  ConfigInvalid,
  FormatVersionMismatch,
  ChecksumMismatch,
  IoError,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library. The kind is stable and is what the
/// CLI and the experiment reports surface.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void raise(ErrorKind kind, const std::string& what);

}  // namespace sdsmi
