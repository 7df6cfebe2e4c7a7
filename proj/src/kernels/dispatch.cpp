#include <atomic>
#include <cstdlib>
#include <string_view>

#include "blo/kernels.hpp"

namespace blo::kernels {

#if defined(BLO_HAVE_AVX2)
const Table& avx2_table();
#endif

namespace {

const Table* detect() {
  if (const char* env = std::getenv("BLO_SIMD"); env != nullptr && std::string_view(env) == "scalar") {
    return &scalar();
  }
  if (const Table* t = avx2(); t != nullptr) return t;
  return &scalar();
}

std::atomic<const Table*>& current() {
  static std::atomic<const Table*> table{detect()};
  return table;
}

}  // namespace

const Table* avx2() {
#if defined(BLO_HAVE_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &avx2_table() : nullptr;
#else
  return nullptr;
#endif
}

const Table& active() { return *current().load(std::memory_order_acquire); }

void use(const Table& table) { current().store(&table, std::memory_order_release); }

}  // namespace blo::kernels
