#include <cstdlib>
#include <string>

#include "tickpred/common.hpp"
#include "tickpred/kernels.hpp"

namespace tickpred::kern {

const Kernels* avx2_kernels_impl();  // defined in kernels_avx2.cpp

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Kernels* avx2_kernels() {
  if (!cpu_has_avx2()) return nullptr;
  return avx2_kernels_impl();
}

namespace {

const Kernels* resolve(Backend b) {
  switch (b) {
    case Backend::kScalar:
      return scalar_kernels();
    case Backend::kAvx2: {
      const Kernels* k = avx2_kernels();
      if (!k) throw PipelineError("AVX2 kernel backend requested but unavailable on this CPU/build");
      return k;
    }
    case Backend::kAuto:
    default: {
      const Kernels* k = avx2_kernels();
      return k ? k : scalar_kernels();
    }
  }
}

Backend backend_from_env() {
  const char* env = std::getenv("TICKPRED_KERNELS");
  if (!env) return Backend::kAuto;
  std::string s(env);
  if (s == "scalar") return Backend::kScalar;
  if (s == "avx2") return Backend::kAvx2;
  return Backend::kAuto;
}

const Kernels*& active_slot() {
  static const Kernels* slot = resolve(backend_from_env());
  return slot;
}

}  // namespace

const Kernels& active() { return *active_slot(); }

void select_backend(Backend b) { active_slot() = resolve(b); }

std::string backend_name() { return active().name; }

}  // namespace tickpred::kern
