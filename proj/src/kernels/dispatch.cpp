#include <cstdlib>
#include <string_view>

#include "aesa/kernels.hpp"

namespace aesa::kernels {

const KernelTable* avx2_table() {
#if defined(AESA_HAVE_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &detail::avx2_impl() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() {
  static const KernelTable& table = []() -> const KernelTable& {
    const char* forced = std::getenv("AESA_SIMD");
    if (forced != nullptr && std::string_view{forced} == "scalar") return scalar_table();
    if (const KernelTable* t = avx2_table()) return *t;
    return scalar_table();
  }();
  return table;
}

void weighted_channel_sum(std::span<const cplx> weights, std::span<const cplx* const> planes,
                          std::span<cplx> out) {
  if (weights.size() != planes.size()) throw ContractError("weighted_channel_sum: weight/plane count mismatch");
  active().weighted_channel_sum(weights.data(), planes.data(), planes.size(), out.data(), out.size());
}

cplx dot_conj(std::span<const cplx> a, std::span<const cplx> b) {
  if (a.size() != b.size()) throw ContractError("dot_conj: length mismatch");
  return active().dot_conj(a.data(), b.data(), a.size());
}

void mul_conj(std::span<const cplx> a, std::span<const cplx> b, std::span<cplx> out) {
  if (a.size() != b.size() || a.size() != out.size()) throw ContractError("mul_conj: length mismatch");
  active().mul_conj(a.data(), b.data(), out.data(), out.size());
}

void abs2(std::span<const cplx> in, std::span<double> out) {
  if (in.size() != out.size()) throw ContractError("abs2: length mismatch");
  active().abs2(in.data(), out.data(), in.size());
}

double energy(std::span<const cplx> in) { return active().energy(in.data(), in.size()); }

}  // namespace aesa::kernels
