#include <cstdlib>
#include <string_view>

#include "chks/simd/kernels.hpp"

namespace chks::simd {

#if !(defined(__x86_64__) || defined(__i386__) || defined(_M_X64))
const KernelTable* avx2_kernels() { return nullptr; }
#endif
#if !(defined(__aarch64__) || defined(_M_ARM64))
const KernelTable* neon_kernels() { return nullptr; }
#endif

namespace {

const KernelTable& select_kernels() {
  const char* env = std::getenv("CHKS_SIMD");
  const std::string_view request = env ? env : "";
  if (request == "scalar") return scalar_kernels();
  if (request == "avx2" && avx2_kernels()) return *avx2_kernels();
  if (request == "neon" && neon_kernels()) return *neon_kernels();
  if (const auto* t = avx2_kernels()) return *t;
  if (const auto* t = neon_kernels()) return *t;
  return scalar_kernels();
}

}  // namespace

const KernelTable& active_kernels() {
  static const KernelTable& table = select_kernels();
  return table;
}

}  // namespace chks::simd
