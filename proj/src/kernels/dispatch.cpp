#include <cstdlib>
#include <cstring>

#include "atlas/kernels/kernels.hpp"

namespace atlas::kernels {

const Ops* avx2_table();  // defined in avx2.cpp (nullptr if not compiled in)

const Ops* avx2() {
#if defined(__x86_64__) || defined(__i386__)
  if (!__builtin_cpu_supports("avx2") || !__builtin_cpu_supports("fma")) return nullptr;
#endif
  return avx2_table();
}

namespace {

const Ops& select() {
  const char* forced = std::getenv("ATLAS_KERNELS");
  if (forced != nullptr) {
    if (std::strcmp(forced, "scalar") == 0) return scalar();
    if (std::strcmp(forced, "avx2") == 0 && avx2() != nullptr) return *avx2();
  }
  const Ops* vec = avx2();
  return vec != nullptr ? *vec : scalar();
}

}  // namespace

const Ops& active() {
  static const Ops& chosen = select();
  return chosen;
}

}  // namespace atlas::kernels
