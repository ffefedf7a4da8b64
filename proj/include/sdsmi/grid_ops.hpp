// Copyright 2026 The sdsmi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sdsmi {

/// Solves a tridiagonal system in place: lower[0] and upper[n-1] are
/// ignored; rhs receives the solution. diag is overwritten.
void solve_tridiagonal(std::span<const double> lower, std::span<double> diag,
                       std::span<const double> upper, std::span<double> rhs);

/// Trapezoid node weights (1/2 at both ends) times dx.
std::vector<double> trapezoid_weights(std::size_t n, double dx);

/// Grid L2 norm sqrt(sum w_i v_i^2) with trapezoid weights.
double l2_norm(std::span<const double> v, double dx);

/// Row-normalized Gaussian kernel of the given variance on n nodes of step
/// dx (row-major n x n). Each row is a probability vector, so the operator
/// preserves constants and contracts the sup norm.
std::vector<double> heat_matrix(std::size_t n, double dx, double variance);

/// Gaussian kernel density smoother: (S v)(x_i) = sum_k N(x_i - x_k; bw^2) v_k w_k
/// with trapezoid weights w_k, i.e. convolution with a normalized Gaussian.
std::vector<double> kde_matrix(std::size_t n, double dx, double bandwidth);

/// y = M x for a square row-major matrix.
std::vector<double> apply_matrix(const std::vector<double>& m, std::span<const double> x);

/// Cloud-in-cell deposit of weighted points onto nodes x0 + i*dx, returned
/// as a density with trapezoid mass equal to the total weight. Points
/// outside the grid are clamped to the end nodes.
std::vector<double> cic_density(std::span<const double> xs, std::span<const double> ws, double x0,
                                double dx, std::size_t n);

/// Wasserstein-1 distance between the probability measures obtained by
/// normalizing an equal-weight point cloud and a piecewise-linear density on
/// nodes x0 + i*dx.
double w1_cloud_density(std::vector<double> xs, double x0, double dx, std::span<const double> v);

}  // namespace sdsmi
