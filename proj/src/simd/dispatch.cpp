// Copyright 2026 The sdsmi Authors
// SPDX-License-Identifier: Apache-2.0

#include <atomic>

#include "sdsmi/error.hpp"
#include "sdsmi/simd/kernels.hpp"

namespace sdsmi::simd {
namespace {

bool cpu_has_avx2() noexcept {
#if defined(SDSMI_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* table_for(Isa isa) noexcept {
#if defined(SDSMI_HAVE_AVX2)
  if (isa == Isa::Avx2) return &avx2_kernels();
#endif
  (void)isa;
  return &scalar_kernels();
}

std::atomic<const KernelTable*>& current() noexcept {
  static std::atomic<const KernelTable*> table{table_for(detected_isa())};
  return table;
}

std::atomic<Isa>& current_isa() noexcept {
  static std::atomic<Isa> isa{detected_isa()};
  return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
  return isa == Isa::Avx2 ? "avx2" : "scalar";
}

Isa detected_isa() noexcept {
  static const Isa isa = cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar;
  return isa;
}

Isa active_isa() noexcept { return current_isa().load(std::memory_order_relaxed); }

void set_isa(Isa isa) {
  if (isa == Isa::Avx2 && detected_isa() != Isa::Avx2)
    raise(ErrorKind::InvalidArgument, "avx2 kernels not available on this build or CPU");
  current().store(table_for(isa), std::memory_order_release);
  current_isa().store(isa, std::memory_order_relaxed);
}

const KernelTable& kernels() noexcept { return *current().load(std::memory_order_acquire); }

}  // namespace sdsmi::simd
