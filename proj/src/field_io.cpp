// Copyright 2026 The sdsmi Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "sdsmi/bytes.hpp"
#include "sdsmi/error.hpp"
#include "sdsmi/loglaplace.hpp"
#include "sdsmi/noise.hpp"

namespace sdsmi {
namespace {
constexpr char kMagic[4] = {'W', 'F', 'P', '1'};
constexpr std::uint16_t kVersion = 1;
constexpr std::size_t kHeader = 32;
}  // namespace

void write_field_csv(const FieldPath& f, const std::string& file) {
  std::ofstream out(file, std::ios::trunc);
  if (!out) raise(ErrorKind::IoError, "cannot write " + file);
  out << "t";
  for (std::size_t i = 0; i < f.grid.nx; ++i) out << ",x" << i;
  out << '\n';
  char buf[32];
  for (std::size_t k = 0; k < f.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", f.times[k]);
    out << buf;
    for (double v : f.at(k)) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << ',' << buf;
    }
    out << '\n';
  }
  if (!out) raise(ErrorKind::IoError, "short write to " + file);
}

// Header: magic(4) version u16 direction u16 nt u32 nx u32 L f64 t_ref f64;
// then times, then row-major values, then FNV-1a of everything before.
void write_field_bin(const FieldPath& f, const std::string& file) {
  std::vector<unsigned char> b(kMagic, kMagic + 4);
  bytes::put_u16(b, kVersion);
  bytes::put_u16(b, static_cast<std::uint16_t>(f.direction));
  bytes::put_u32(b, static_cast<std::uint32_t>(f.size()));
  bytes::put_u32(b, static_cast<std::uint32_t>(f.grid.nx));
  bytes::put_f64(b, f.grid.L);
  bytes::put_f64(b, f.t_ref);
  for (double t : f.times) bytes::put_f64(b, t);
  for (double v : f.values) bytes::put_f64(b, v);
  bytes::put_u64(b, fnv1a(b.data(), b.size()));
  bytes::write_file(file, b);
}

FieldPath read_field_bin(const std::string& file) {
  const auto b = bytes::read_file(file);
  if (b.size() < kHeader + 8) raise(ErrorKind::ChecksumMismatch, file + " is truncated");
  if (!std::equal(kMagic, kMagic + 4, b.begin()))
    raise(ErrorKind::IoError, file + " is not a field snapshot file");
  const auto version = bytes::get_uint(b.data() + 4, 2);
  if (version != kVersion)
    raise(ErrorKind::FormatVersionMismatch, file + " has an unsupported format version");
  FieldPath f;
  f.direction = static_cast<FieldPath::Direction>(bytes::get_uint(b.data() + 6, 2));
  const std::size_t nt = bytes::get_uint(b.data() + 8, 4);
  f.grid.nx = bytes::get_uint(b.data() + 12, 4);
  f.grid.L = bytes::get_f64(b.data() + 16);
  f.t_ref = bytes::get_f64(b.data() + 24);
  if (b.size() != kHeader + 8 * (nt + nt * f.grid.nx) + 8)
    raise(ErrorKind::ChecksumMismatch, file + " length does not match its header");
  if (bytes::get_uint(b.data() + b.size() - 8, 8) != fnv1a(b.data(), b.size() - 8))
    raise(ErrorKind::ChecksumMismatch, file + " checksum mismatch");
  const unsigned char* p = b.data() + kHeader;
  f.times.resize(nt);
  for (auto& t : f.times) {
    t = bytes::get_f64(p);
    p += 8;
  }
  f.values.resize(nt * f.grid.nx);
  for (auto& v : f.values) {
    v = bytes::get_f64(p);
    p += 8;
  }
  if (nt > 1) f.grid.dt = f.times[1] - f.times[0];
  return f;
}

}  // namespace sdsmi
