// Copyright 2026 The sdsmi Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "doctest.h"
#include "sdsmi/error.hpp"
#include "sdsmi/noise.hpp"
#include "sdsmi/rng.hpp"

using namespace sdsmi;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an sdsmi::Error");
  return ErrorKind::IoError;
}

std::string tmp_file(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::vector<unsigned char> slurp(const std::string& f) {
  std::ifstream in(f, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void spit(const std::string& f, const std::vector<unsigned char>& b) {
  std::ofstream out(f, std::ios::binary);
  out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

}  // namespace

TEST_CASE("grid construction and time indexing") {
  const auto g = make_noise_grid(1.0, 0.01, 4.0, 0.1);
  CHECK(g.nt == 100);
  CHECK(g.ny == 80);
  CHECK(g.dy() == doctest::Approx(0.1));
  CHECK(g.y(0) == doctest::Approx(-3.95));
  CHECK(time_index(g, 0.0) == 0);
  CHECK(time_index(g, 0.37) == 37);
  CHECK(time_index(g, 1.0) == 100);
  CHECK(kind_of([&] { (void)time_index(g, 0.375); }) == ErrorKind::OffGridTime);
  CHECK(kind_of([&] { (void)time_index(g, 1.01); }) == ErrorKind::OffGridTime);
  CHECK(kind_of([&] { (void)make_noise_grid(1.0, 0.03, 4.0, 0.1); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([&] { (void)make_noise_grid(1.0, 0.01, 4.0, 0.3); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("sampled cells are the philox normals scaled by the cell area") {
  const auto g = make_noise_grid(0.1, 0.01, 1.0, 0.25);
  const auto p = sample_path(g, 77);
  const double s = std::sqrt(0.01 * 0.25);
  for (std::size_t i : {0u, 3u, 9u})
    for (std::size_t j : {0u, 5u, 7u}) {
      const auto blk = Philox4x64::generate({i, j, 0, 0}, {77, static_cast<std::uint64_t>(StreamTag::Noise)});
      CHECK(p.at(i, j) == s * normal_from_bits(blk[0], blk[1]));
    }
  // Sampling a longer horizon leaves the shared prefix unchanged.
  const auto longer = sample_path(make_noise_grid(0.2, 0.01, 1.0, 0.25), 77);
  for (std::size_t k = 0; k < p.increments().size(); ++k)
    CHECK(longer.increments()[k] == p.increments()[k]);
}

TEST_CASE("cell variance equals dt dy") {
  const auto g = make_noise_grid(1.0, 0.002, 8.0, 0.1);
  const auto p = sample_path(g, 5);
  double m = 0, v = 0;
  for (double x : p.increments()) {
    m += x;
    v += x * x;
  }
  const double n = static_cast<double>(p.increments().size());
  m /= n;
  v = v / n - m * m;
  CHECK(std::fabs(m) < 4.0 * std::sqrt(0.002 * 0.1 / n));
  CHECK(v / (0.002 * 0.1) == doctest::Approx(1.0).epsilon(4.0 * std::sqrt(2.0 / n)));
}

TEST_CASE("noise budget guards the allocation") {
  const auto g = make_noise_grid(1.0, 1e-3, 8.0, 0.01);
  CHECK(kind_of([&] { (void)sample_path(g, 1, 1 << 20); }) == ErrorKind::GridOverflow);
}

TEST_CASE("reversal and negation") {
  const auto g = make_noise_grid(1.0, 0.1, 1.0, 0.5);
  const auto p = sample_path(g, 3);
  const auto r = reverse_path(p, 0.6);
  CHECK(r.grid().nt == 6);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < g.ny; ++j) CHECK(r.at(i, j) == -p.at(5 - i, j));
  const auto rr = reverse_path(r, 0.6);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < g.ny; ++j) CHECK(rr.at(i, j) == p.at(i, j));
  const auto n = negate_path(p);
  CHECK(n.at(2, 1) == -p.at(2, 1));
  CHECK(kind_of([&] { (void)reverse_path(p, 0.65); }) == ErrorKind::OffGridTime);
}

TEST_CASE("integrate sums left-point cells") {
  const auto g = make_noise_grid(1.0, 0.1, 1.0, 0.5);
  const auto p = sample_path(g, 4);
  double want = 0.0;
  for (std::size_t i = 2; i < 7; ++i)
    for (std::size_t j = 0; j < g.ny; ++j) want += (0.1 * i + g.y(j)) * p.at(i, j);
  CHECK(integrate(p, [](double s, double y) { return s + y; }, 0.2, 0.7) ==
        doctest::Approx(want).epsilon(1e-13));
  CHECK(integrate(p, [](double, double) { return 1.0; }, 0.5, 0.5) == 0.0);
}

TEST_CASE("ito isometry across seeds") {
  const auto g = make_noise_grid(0.5, 0.05, 2.0, 0.25);
  auto f = [](double s, double y) { return std::exp(-y * y) * (1.0 + s); };
  double iso = 0.0;
  for (std::size_t i = 0; i < g.nt; ++i)
    for (std::size_t j = 0; j < g.ny; ++j) {
      const double v = f(i * g.dt, g.y(j));
      iso += v * v * g.dt * g.dy();
    }
  const int n = 10000;
  double m2 = 0.0;
  for (int s = 0; s < n; ++s) {
    const double I = integrate(sample_path(g, 1000 + s), f, 0.0, 0.5);
    m2 += I * I;
  }
  CHECK(m2 / n == doctest::Approx(iso).epsilon(3.0 * std::sqrt(2.0 / n)));
}

TEST_CASE("disjoint time windows are uncorrelated") {
  const auto g = make_noise_grid(1.0, 0.05, 2.0, 0.25);
  auto f = [](double, double y) { return std::cos(y); };
  const int n = 10000;
  double sab = 0, saa = 0, sbb = 0;
  for (int s = 0; s < n; ++s) {
    const auto p = sample_path(g, 50000 + s);
    const double a = integrate(p, f, 0.0, 0.5), b = integrate(p, f, 0.5, 1.0);
    sab += a * b;
    saa += a * a;
    sbb += b * b;
  }
  const double r = sab / std::sqrt(saa * sbb);
  CHECK(std::fabs(r) < 3.0 / std::sqrt(n));
}

TEST_CASE("reversal preserves the multiset of magnitudes") {
  const auto g = make_noise_grid(1.0, 0.1, 1.0, 0.5);
  const auto p = sample_path(g, 21);
  const auto r = reverse_path(p, 0.7);
  std::vector<double> a, b;
  for (std::size_t i = 0; i < 7; ++i)
    for (std::size_t j = 0; j < g.ny; ++j) {
      a.push_back(std::fabs(p.at(i, j)));
      b.push_back(std::fabs(r.at(i, j)));
    }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  CHECK(a == b);
}

TEST_CASE("trig basis is orthonormal on the cell grid") {
  const auto g = make_noise_grid(0.1, 0.1, 2.0, 0.1);
  for (std::size_t a = 0; a < 9; ++a)
    for (std::size_t b = 0; b < 9; ++b) {
      double s = 0.0;
      for (std::size_t j = 0; j < g.ny; ++j) s += trig_basis(a, g.y(j), g.L) * trig_basis(b, g.y(j), g.L) * g.dy();
      CHECK(s == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-12).scale(1.0));
    }
}

TEST_CASE("spectral projection") {
  const auto g = make_noise_grid(0.5, 0.01, 2.0, 0.1);
  const auto p = sample_path(g, 8);
  const auto s = spectral_project(p, 0.1);
  CHECK(s.J == 10);
  CHECK(spectral_project(p, 0.3).J == 3);
  // Projecting twice changes nothing.
  const auto s2 = spectral_project(s.as_path(), 0.1);
  for (std::size_t k = 0; k < s.cells.size(); ++k)
    CHECK(s2.cells[k] == doctest::Approx(s.cells[k]).epsilon(1e-10).scale(1e-3));
  // Coefficients are N(0, dt).
  double v = 0.0;
  for (double c : s.coeffs) v += c * c;
  v /= static_cast<double>(s.coeffs.size());
  CHECK(v / 0.01 == doctest::Approx(1.0).epsilon(4.0 * std::sqrt(2.0 / s.coeffs.size())));
  CHECK(kind_of([&] { (void)spectral_project(p, 0.0); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([&] { (void)spectral_project(p, 2.0); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("wns round trip is bit exact") {
  const auto g = make_noise_grid(0.3, 0.01, 2.0, 0.1);
  const auto p = sample_path(g, 0xfeedULL);
  const std::string f = tmp_file("sdsmi_rt.wns");
  write_wns(p, f);
  const auto q = read_wns(f);
  CHECK(q.seed() == p.seed());
  CHECK(q.grid().nt == g.nt);
  CHECK(q.grid().ny == g.ny);
  CHECK(q.grid().dt == g.dt);
  CHECK(q.grid().L == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(q.increments() == p.increments());
  std::remove(f.c_str());
}

TEST_CASE("damaged wns files are rejected") {
  const auto p = sample_path(make_noise_grid(0.1, 0.01, 1.0, 0.5), 1);
  const std::string f = tmp_file("sdsmi_bad.wns");
  write_wns(p, f);
  const auto good = slurp(f);

  auto b = good;
  b.resize(b.size() - 5);
  spit(f, b);
  CHECK(kind_of([&] { (void)read_wns(f); }) == ErrorKind::ChecksumMismatch);

  b.resize(10);
  spit(f, b);
  CHECK(kind_of([&] { (void)read_wns(f); }) == ErrorKind::ChecksumMismatch);

  b = good;
  b[40] ^= 0x01;
  spit(f, b);
  CHECK(kind_of([&] { (void)read_wns(f); }) == ErrorKind::ChecksumMismatch);

  b = good;
  b[2] = 2;
  spit(f, b);
  CHECK(kind_of([&] { (void)read_wns(f); }) == ErrorKind::FormatVersionMismatch);

  b = good;
  b[0] = 'X';
  spit(f, b);
  CHECK(kind_of([&] { (void)read_wns(f); }) == ErrorKind::IoError);

  CHECK(kind_of([&] { (void)read_wns(tmp_file("sdsmi_missing.wns")); }) == ErrorKind::IoError);
  std::remove(f.c_str());
}

TEST_CASE("fnv1a reference values") {
  CHECK(fnv1a("", 0) == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a", 1) == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a("foobar", 6) == 0x85944171f73967e8ULL);
}
