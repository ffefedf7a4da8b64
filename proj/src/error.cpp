// Copyright 2026 The sdsmi Authors
// SPDX-License-Identifier: Apache-2.0

#include "sdsmi/error.hpp"

namespace sdsmi {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NonPositiveSigma: return "NonPositiveSigma";
    case ErrorKind::NonIntegrableH: return "NonIntegrableH";
    case ErrorKind::UnsupportedDerivative: return "UnsupportedDerivative";
    case ErrorKind::GridOverflow: return "GridOverflow";
    case ErrorKind::OffGridTime: return "OffGridTime";
    case ErrorKind::InvalidScheme: return "InvalidScheme";
    case ErrorKind::PopulationExplosion: return "PopulationExplosion";
    case ErrorKind::CFLViolation: return "CFLViolation";
    case ErrorKind::NegativePhiInput: return "NegativePhiInput";
    case ErrorKind::BlowUp: return "BlowUp";
    case ErrorKind::DegenerateWeights: return "DegenerateWeights";
    case ErrorKind::InsufficientReplicates: return "InsufficientReplicates";
    case ErrorKind::HypothesisViolated: return "HypothesisViolated";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::FormatVersionMismatch: return "FormatVersionMismatch";
    case ErrorKind::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

void raise(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace sdsmi
