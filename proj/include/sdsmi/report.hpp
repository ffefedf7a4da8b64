// Copyright 2026 The sdsmi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace sdsmi {

inline constexpr int kReportSchemaVersion = 1;

struct ReportRow {
  std::string name;
  double predicted = 0.0;
  double estimated = 0.0;
  double se = 0.0;
  double z = 0.0;
  double tolerance = 0.0;  // absolute allowance used by the pass rule
  bool pass = false;
  bool gated = true;       // non-gated rows are reported but do not decide the exit code
};

/// z = (estimated - predicted) / se, 0 when both the gap and se are 0.
double z_score(double estimated, double predicted, double se) noexcept;

struct ExperimentReport {
  std::string experiment;
  std::string config_digest;
  std::vector<ReportRow> rows;
  std::map<std::string, double> diagnostics;
  std::map<std::string, std::string> notes;

  /// Adds a row that passes iff |estimated - predicted| <= tolerance.
  ReportRow& add(std::string name, double predicted, double estimated, double se,
                 double tolerance, bool gated = true);
  /// Adds a row with an externally decided pass flag.
  ReportRow& add_flag(std::string name, double predicted, double estimated, double se,
                      double tolerance, bool pass, bool gated = true);

  bool all_gated_pass() const noexcept;
  std::size_t failed_gated() const noexcept;

  /// Canonical JSON (sorted keys, fixed formatting): byte-identical for equal content.
  std::string to_json() const;
  /// experiment,row,predicted,estimated,se,z,pass
  std::string to_csv() const;
};

/// Formats a double for reports and CSV with round-trip precision.
std::string format_double(double v);

}  // namespace sdsmi
