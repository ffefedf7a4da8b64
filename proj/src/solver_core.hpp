// Copyright 2026 The sdsmi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Shared pieces of the grid solvers. Internal to the library.

#include <cstddef>
#include <span>
#include <vector>

#include "sdsmi/loglaplace.hpp"

namespace sdsmi::detail {

/// Number of noise cells per solver step; InvalidArgument unless integral.
std::size_t noise_stride(const NoiseGrid& noise, const SolverGrid& grid);

/// Number of solver steps to reach t, checking t is on both grids.
std::size_t solver_steps(const NoiseGrid& noise, const SolverGrid& grid, double t);

void check_same_domain(const NoiseGrid& noise, const SolverGrid& grid);

/// K[i][c] = h^{(order)}(y_c - x_i), row-major nx x ny.
std::vector<double> transport_matrix(const FunctionSpec& h, const SolverGrid& grid,
                                     const NoiseGrid& noise, int order);

/// Sum of `stride` consecutive noise rows starting at solver step k.
void noise_row(const NoisePath& path, std::size_t stride, std::size_t k, std::vector<double>& out);

std::vector<double> sample_on_grid(const FunctionSpec& f, const SolverGrid& grid);

}  // namespace sdsmi::detail
