// Copyright 2026 The sdsmi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>

namespace sdsmi {

/// Runs body(i) for i in [0, n) on up to `lanes` threads. Work items are
/// handed out dynamically, so callers must write results into per-index
/// slots and fold them afterwards in index order. If any body throws, the
/// exception of the lowest failing index is rethrown after all lanes join.
void parallel_for(std::size_t n, unsigned lanes, const std::function<void(std::size_t)>& body);

/// lanes == 0 means "use hardware concurrency".
unsigned resolve_lanes(unsigned lanes) noexcept;

}  // namespace sdsmi
