// Copyright 2026 The sdsmi Authors
// SPDX-License-Identifier: Apache-2.0

#include "sdsmi/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"

namespace sdsmi {

using nlohmann::json;

double z_score(double estimated, double predicted, double se) noexcept {
  const double gap = estimated - predicted;
  if (gap == 0.0) return 0.0;
  if (!(se > 0.0)) return gap > 0.0 ? HUGE_VAL : -HUGE_VAL;
  return gap / se;
}

ReportRow& ExperimentReport::add(std::string name, double predicted, double estimated, double se,
                                 double tolerance, bool gated) {
  const bool pass = std::fabs(estimated - predicted) <= tolerance;
  return add_flag(std::move(name), predicted, estimated, se, tolerance, pass, gated);
}

ReportRow& ExperimentReport::add_flag(std::string name, double predicted, double estimated,
                                      double se, double tolerance, bool pass, bool gated) {
  ReportRow r;
  r.name = std::move(name);
  r.predicted = predicted;
  r.estimated = estimated;
  r.se = se;
  r.z = z_score(estimated, predicted, se);
  r.tolerance = tolerance;
  r.pass = pass && std::isfinite(estimated);
  r.gated = gated;
  rows.push_back(std::move(r));
  return rows.back();
}

bool ExperimentReport::all_gated_pass() const noexcept { return failed_gated() == 0; }

std::size_t ExperimentReport::failed_gated() const noexcept {
  std::size_t n = 0;
  for (const auto& r : rows)
    if (r.gated && !r.pass) ++n;
  return n;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {
json number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);  // JSON has no inf/nan; keep them legible
}
}  // namespace

std::string ExperimentReport::to_json() const {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["experiment"] = experiment;
  j["config_digest"] = config_digest;
  json rs = json::array();
  for (const auto& r : rows) {
    rs.push_back({{"name", r.name},
                  {"predicted", number(r.predicted)},
                  {"estimated", number(r.estimated)},
                  {"se", number(r.se)},
                  {"z", number(r.z)},
                  {"tolerance", number(r.tolerance)},
                  {"pass", r.pass},
                  {"gated", r.gated}});
  }
  j["rows"] = rs;
  json d = json::object();
  for (const auto& [k, v] : diagnostics) d[k] = number(v);
  for (const auto& [k, v] : notes) d[k] = v;
  j["diagnostics"] = d;
  j["pass"] = all_gated_pass();
  return j.dump(2) + "\n";
}

std::string ExperimentReport::to_csv() const {
  std::ostringstream os;
  os << "experiment,row,predicted,estimated,se,z,pass\n";
  for (const auto& r : rows) {
    os << experiment << ',' << r.name << ',' << format_double(r.predicted) << ','
       << format_double(r.estimated) << ',' << format_double(r.se) << ',' << format_double(r.z)
       << ',' << (r.pass ? 1 : 0) << '\n';
  }
  return os.str();
}

}  // namespace sdsmi
