// Copyright 2026 The sdsmi Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "sdsmi/error.hpp"
#include "sdsmi/rng.hpp"
#include "sdsmi/simd/kernels.hpp"

using namespace sdsmi;
using namespace sdsmi::simd;

namespace {

std::vector<double> randoms(std::size_t n, std::uint64_t seed, double scale = 1.0) {
  Stream s(seed, StreamTag::Init, n);
  std::vector<double> v(n);
  for (auto& x : v) x = scale * s.normal();
  return v;
}

bool close(double a, double b, double rel, double abs = 0.0) {
  return std::fabs(a - b) <= abs + rel * std::max(std::fabs(a), std::fabs(b));
}

const std::size_t kSizes[] = {1, 2, 3, 4, 5, 7, 8, 9, 31, 64, 401, 1603};

}  // namespace

TEST_CASE("isa selection") {
  CHECK(isa_name(Isa::Scalar) == "scalar");
  CHECK(isa_name(Isa::Avx2) == "avx2");
  const Isa before = active_isa();
  set_isa(Isa::Scalar);
  CHECK(active_isa() == Isa::Scalar);
  CHECK(&kernels() == &scalar_kernels());
  if (detected_isa() == Isa::Avx2) {
    set_isa(Isa::Avx2);
    CHECK(active_isa() == Isa::Avx2);
  } else {
    CHECK_THROWS_AS(set_isa(Isa::Avx2), Error);
  }
  set_isa(before);
}

#if defined(SDSMI_HAVE_AVX2)

TEST_CASE("avx2 kernels match the scalar reference") {
  if (detected_isa() != Isa::Avx2) {
    MESSAGE("CPU lacks AVX2/FMA; equivalence not exercised");
    return;
  }
  const KernelTable& s = scalar_kernels();
  const KernelTable& v = avx2_kernels();

  SUBCASE("gauss_dot") {
    for (std::size_t n : kSizes) {
      const auto w = randoms(n, 1);
      for (double u0 : {-8.0, -0.37, 0.0, 2.5}) {
        const double a = s.gauss_dot(u0, 0.01, 0.5 / 0.09, w.data(), n);
        const double b = v.gauss_dot(u0, 0.01, 0.5 / 0.09, w.data(), n);
        CAPTURE(n);
        CHECK(close(a, b, 1e-13, 1e-14));
      }
    }
  }
  SUBCASE("dot and matvec") {
    for (std::size_t n : kSizes) {
      const auto a = randoms(n, 2), b = randoms(n, 3);
      CHECK(close(s.dot(a.data(), b.data(), n), v.dot(a.data(), b.data(), n), 1e-13, 1e-13));
      const std::size_t rows = 5;
      const auto k = randoms(rows * n, 4);
      std::vector<double> ys(rows), yv(rows);
      s.matvec(k.data(), rows, n, a.data(), ys.data());
      v.matvec(k.data(), rows, n, a.data(), yv.data());
      for (std::size_t r = 0; r < rows; ++r) CHECK(close(ys[r], yv[r], 1e-13, 1e-13));
    }
  }
  SUBCASE("vexp") {
    std::vector<double> x = randoms(1603, 5, 30.0);
    x.insert(x.end(), {0.0, -1e-300, 1e-12, -700.0, 700.0, -745.0, -800.0, 709.0, 720.0});
    std::vector<double> ys(x.size()), yv(x.size());
    s.vexp(x.data(), ys.data(), x.size());
    v.vexp(x.data(), yv.data(), x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      CAPTURE(x[i]);
      if (std::isinf(ys[i])) {
        CHECK(std::isinf(yv[i]));
      } else {
        CHECK(close(ys[i], yv[i], 4e-15, 1e-300));
      }
    }
  }
  SUBCASE("explicit stage") {
    for (std::size_t n : kSizes) {
      const auto psi = randoms(n, 6), b = randoms(n, 7), hs = randoms(n, 8), q = randoms(n, 9),
                 g = randoms(n, 10, 0.1), ha = randoms(n, 11);
      std::vector<double> os(n), ov(n);
      ExplicitStage st{psi, b, hs, q, g, ha, 1e-3, 0.5 / 0.04, 1.0 / 0.0016, 0.5, os};
      s.explicit_stage(st);
      st.out = ov;
      v.explicit_stage(st);
      for (std::size_t i = 0; i < n; ++i) {
        CAPTURE(n);
        CAPTURE(i);
        CHECK(close(os[i], ov[i], 1e-14, 1e-15));
      }
    }
  }
}

#endif

TEST_CASE("scalar explicit stage against a direct formula") {
  const std::size_t n = 6;
  const auto psi = randoms(n, 12), b = randoms(n, 13), hs = randoms(n, 14), q = randoms(n, 15),
             g = randoms(n, 16), ha = randoms(n, 17);
  std::vector<double> out(n);
  const double dt = 0.01, dx = 0.2;
  scalar_kernels().explicit_stage({psi, b, hs, q, g, ha, dt, 0.5 / dx, 1.0 / (dx * dx), 1.0, out});
  for (std::size_t i = 0; i < n; ++i) {
    const double l = i == 0 ? psi[1] : psi[i - 1];
    const double r = i + 1 == n ? psi[n - 2] : psi[i + 1];
    const double want = psi[i] + dt * (-b[i] * psi[i] - hs[i] * psi[i] * q[i]) +
                        g[i] * (r - l) / (2 * dx) + dt * ha[i] * (r - 2 * psi[i] + l) / (dx * dx);
    CHECK(out[i] == doctest::Approx(want).epsilon(1e-13));
  }
}
