// Copyright 2026 The sdsmi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Little-endian packing helpers shared by the binary file formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

namespace sdsmi::bytes {

inline void put_u16(std::vector<unsigned char>& b, std::uint16_t v) {
  b.push_back(static_cast<unsigned char>(v));
  b.push_back(static_cast<unsigned char>(v >> 8));
}
inline void put_u32(std::vector<unsigned char>& b, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) b.push_back(static_cast<unsigned char>(v >> (8 * k)));
}
inline void put_u64(std::vector<unsigned char>& b, std::uint64_t v) {
  for (int k = 0; k < 8; ++k) b.push_back(static_cast<unsigned char>(v >> (8 * k)));
}
inline void put_f64(std::vector<unsigned char>& b, double v) {
  put_u64(b, std::bit_cast<std::uint64_t>(v));
}

inline std::uint64_t get_uint(const unsigned char* p, int width) {
  std::uint64_t v = 0;
  for (int k = 0; k < width; ++k) v |= static_cast<std::uint64_t>(p[k]) << (8 * k);
  return v;
}
inline double get_f64(const unsigned char* p) { return std::bit_cast<double>(get_uint(p, 8)); }

std::vector<unsigned char> read_file(const std::string& file);
void write_file(const std::string& file, const std::vector<unsigned char>& data);

}  // namespace sdsmi::bytes
