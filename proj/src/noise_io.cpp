// Copyright 2026 The sdsmi Authors
// SPDX-License-Identifier: Apache-2.0

#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include "sdsmi/bytes.hpp"
#include "sdsmi/error.hpp"
#include "sdsmi/noise.hpp"

namespace sdsmi {

std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h) noexcept {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace bytes {

std::vector<unsigned char> read_file(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) raise(ErrorKind::IoError, "cannot open " + file);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& file, const std::vector<unsigned char>& data) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) raise(ErrorKind::IoError, "cannot write " + file);
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) raise(ErrorKind::IoError, "short write to " + file);
}

}  // namespace bytes

namespace {
constexpr std::uint16_t kWnsMagic = 0x4e57;  // "WN"
constexpr std::size_t kWnsHeader = 32;
}  // namespace

void write_wns(const NoisePath& path, const std::string& file) {
  const NoiseGrid& g = path.grid();
  constexpr auto kMax = std::numeric_limits<std::uint16_t>::max();
  if (g.nt > kMax || g.ny > kMax)
    raise(ErrorKind::InvalidArgument, "wns format holds at most 65535 cells per axis");
  std::vector<unsigned char> b;
  b.reserve(kWnsHeader + 8 * path.increments().size() + 8);
  bytes::put_u16(b, kWnsMagic);
  bytes::put_u16(b, kWnsVersion);
  bytes::put_u16(b, static_cast<std::uint16_t>(g.nt));
  bytes::put_u16(b, static_cast<std::uint16_t>(g.ny));
  bytes::put_u64(b, path.seed());
  bytes::put_f64(b, g.dt);
  bytes::put_f64(b, g.dy());
  for (double v : path.increments()) bytes::put_f64(b, v);
  bytes::put_u64(b, fnv1a(b.data(), b.size()));
  bytes::write_file(file, b);
}

NoisePath read_wns(const std::string& file) {
  const auto b = bytes::read_file(file);
  if (b.size() < kWnsHeader + 8) raise(ErrorKind::ChecksumMismatch, file + " is truncated");
  if (bytes::get_uint(b.data(), 2) != kWnsMagic)
    raise(ErrorKind::IoError, file + " is not a .wns noise file");
  const auto version = static_cast<std::uint16_t>(bytes::get_uint(b.data() + 2, 2));
  if (version != kWnsVersion) {
    std::ostringstream os;
    os << file << " has format version " << version << ", expected " << kWnsVersion;
    raise(ErrorKind::FormatVersionMismatch, os.str());
  }
  NoiseGrid g;
  g.nt = bytes::get_uint(b.data() + 4, 2);
  g.ny = bytes::get_uint(b.data() + 6, 2);
  const std::uint64_t seed = bytes::get_uint(b.data() + 8, 8);
  g.dt = bytes::get_f64(b.data() + 16);
  const double dy = bytes::get_f64(b.data() + 24);
  g.L = 0.5 * dy * static_cast<double>(g.ny);
  const std::size_t count = g.nt * g.ny;
  if (b.size() != kWnsHeader + 8 * count + 8)
    raise(ErrorKind::ChecksumMismatch, file + " length does not match its header");
  const std::uint64_t stored = bytes::get_uint(b.data() + b.size() - 8, 8);
  if (stored != fnv1a(b.data(), b.size() - 8))
    raise(ErrorKind::ChecksumMismatch, file + " checksum mismatch");
  std::vector<double> inc(count);
  for (std::size_t k = 0; k < count; ++k) inc[k] = bytes::get_f64(b.data() + kWnsHeader + 8 * k);
  return NoisePath(g, seed, std::move(inc));
}

}  // namespace sdsmi
