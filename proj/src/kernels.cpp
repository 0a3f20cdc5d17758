#include "ccf/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#include "ccf/errors.hpp"

namespace ccf::kernels {
namespace {

Isa detect() {
  if (const char* forced = std::getenv("CCF_ISA")) {
    if (std::string(forced) == "scalar") return Isa::scalar;
  }
  return isa_supported(Isa::avx2) ? Isa::avx2 : Isa::scalar;
}

const KernelTable& table_for(Isa isa) {
#if defined(CCF_HAVE_AVX2_KERNELS)
  if (isa == Isa::avx2) return avx2::table();
#endif
  (void)isa;
  return scalar::table();
}

struct Dispatch {
  std::atomic<Isa> isa{detect()};
  std::atomic<const KernelTable*> table{&table_for(isa.load())};
};

Dispatch& dispatch() {
  static Dispatch d;
  return d;
}

}  // namespace

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(CCF_HAVE_AVX2_KERNELS)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

Isa active_isa() { return dispatch().isa.load(); }

void set_isa(Isa isa) {
  if (!isa_supported(isa)) {
    throw ValidationError("kernel ISA not supported on this CPU: " + std::string(isa_name(isa)));
  }
  dispatch().isa.store(isa);
  dispatch().table.store(&table_for(isa));
}

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

const KernelTable& active() { return *dispatch().table.load(std::memory_order_relaxed); }

}  // namespace ccf::kernels
