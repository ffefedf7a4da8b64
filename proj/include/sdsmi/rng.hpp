// Copyright 2026 The sdsmi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>

namespace sdsmi {

/// Philox4x64-10 counter-based generator (Salmon et al., Random123).
/// Output is a pure function of (counter, key), which is what makes noise
/// cells and particle substreams independent of fill or processing order.
struct Philox4x64 {
  using Counter = std::array<std::uint64_t, 4>;
  using Key = std::array<std::uint64_t, 2>;

  static Counter generate(Counter ctr, Key key) noexcept;
};

/// Domain tags keep the different consumers of one seed disjoint.
enum class StreamTag : std::uint64_t {
  Noise = 0x6e6f697365ULL,
  Move = 0x6d6f7665ULL,
  Branch = 0x6272616e6368ULL,
  Immigration = 0x696d6d6967ULL,
  Init = 0x696e6974ULL,
  Weighted = 0x77706172ULL,
  Derive = 0x646572ULL,
};

/// Uniform on the open interval (0, 1) built from the top 52 bits. With 53
/// bits the largest value would round up to 1.
inline double to_unit_open(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

/// Box-Muller transform of two raw words. Deterministic for given inputs.
double normal_from_bits(std::uint64_t a, std::uint64_t b) noexcept;

/// Sequential view of one Philox substream, identified by a key and three
/// counter words. The fourth counter word enumerates blocks.
class Stream {
 public:
  Stream(std::uint64_t seed, StreamTag tag, std::uint64_t a, std::uint64_t b = 0,
         std::uint64_t c = 0) noexcept;

  std::uint64_t next_u64() noexcept;
  double uniform() noexcept { return to_unit_open(next_u64()); }
  double normal() noexcept;
  std::uint64_t poisson(double lambda) noexcept;

 private:
  Philox4x64::Key key_;
  Philox4x64::Counter ctr_;
  Philox4x64::Counter block_{};
  int used_ = 4;
};

/// Derives an independent 64-bit seed from a master seed and an index.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t purpose,
                          std::uint64_t index) noexcept;

}  // namespace sdsmi
