// Copyright 2026 The sdsmi Authors
// SPDX-License-Identifier: Apache-2.0

#include <atomic>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "sdsmi/grid_ops.hpp"
#include "sdsmi/parallel.hpp"

using namespace sdsmi;

TEST_CASE("tridiagonal solve") {
  // [2 1 0; 1 3 1; 0 1 4] x = [3 5 5]  ->  x = [1 1 1]
  std::vector<double> lo{0, 1, 1}, di{2, 3, 4}, up{1, 1, 0}, rhs{3, 5, 5};
  solve_tridiagonal(lo, di, up, rhs);
  for (double v : rhs) CHECK(v == doctest::Approx(1.0));
}

TEST_CASE("trapezoid weights and norm") {
  const auto w = trapezoid_weights(5, 0.5);
  CHECK(w == std::vector<double>{0.25, 0.5, 0.5, 0.5, 0.25});
  CHECK(l2_norm(std::vector<double>(5, 2.0), 0.5) == doctest::Approx(2.0 * std::sqrt(2.0)));
}

TEST_CASE("heat matrix rows are probability vectors") {
  const std::size_t n = 51;
  const auto h = heat_matrix(n, 0.1, 0.05);
  for (std::size_t r = 0; r < n; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      CHECK(h[r * n + c] >= 0.0);
      s += h[r * n + c];
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
  }
  const auto y = apply_matrix(h, std::vector<double>(n, 3.0));
  for (double v : y) CHECK(v == doctest::Approx(3.0));
}

TEST_CASE("kde preserves interior mass") {
  const std::size_t n = 201;
  const double dx = 0.04;
  std::vector<double> v(n, 0.0);
  v[100] = 1.0 / dx;
  const auto s = apply_matrix(kde_matrix(n, dx, 0.2), v);
  double m = 0;
  for (std::size_t i = 0; i < n; ++i) m += s[i] * dx;
  CHECK(m == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("cloud in cell deposit") {
  const std::vector<double> xs{0.25, 1.0}, ws{1.0, 2.0};
  const auto d = cic_density(xs, ws, 0.0, 0.5, 5);
  double m = 0;
  for (std::size_t i = 0; i < 5; ++i) m += d[i] * ((i == 0 || i == 4) ? 0.25 : 0.5);
  CHECK(m == doctest::Approx(3.0));
}

TEST_CASE("w1 between a cloud and a density") {
  // Uniform density on [0, 1] against a point mass at 0.5: W1 = 1/4.
  std::vector<double> v(101, 1.0);
  CHECK(w1_cloud_density({0.5}, 0.0, 0.01, v) == doctest::Approx(0.25).epsilon(1e-3));
  std::vector<double> xs;
  for (int i = 0; i < 1000; ++i) xs.push_back((i + 0.5) / 1000.0);
  CHECK(w1_cloud_density(xs, 0.0, 0.01, v) < 1e-3);
}

TEST_CASE("parallel_for covers every index and rethrows the lowest failure") {
  std::vector<int> hit(1000, 0);
  parallel_for(hit.size(), 4, [&](std::size_t i) { hit[i] += 1; });
  CHECK(std::accumulate(hit.begin(), hit.end(), 0) == 1000);
  for (int h : hit) CHECK(h == 1);
  try {
    parallel_for(100, 3, [](std::size_t i) {
      if (i == 17 || i == 60) throw std::runtime_error(std::to_string(i));
    });
    FAIL("expected a throw");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "17");
  }
  CHECK(resolve_lanes(3) == 3);
  CHECK(resolve_lanes(0) >= 1);
}
