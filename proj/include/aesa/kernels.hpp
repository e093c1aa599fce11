#pragma once

// Data-parallel inner loops of the processing chain. Every kernel has a scalar
// reference implementation and, where the target supports it, an AVX2+FMA
// variant. The variant is chosen once at startup from CPUID; setting the
// environment variable AESA_SIMD=scalar forces the reference path.

#include <span>

#include "aesa/common.hpp"

namespace aesa::kernels {

struct KernelTable {
  const char* name;
  // out[i] = sum_c conj(weights[c]) * planes[c][i]
  void (*weighted_channel_sum)(const cplx* weights, const cplx* const* planes,
                               std::size_t n_channels, cplx* out, std::size_t n);
  // sum_i a[i] * conj(b[i])
  cplx (*dot_conj)(const cplx* a, const cplx* b, std::size_t n);
  // out[i] = a[i] * conj(b[i]); out may alias a
  void (*mul_conj)(const cplx* a, const cplx* b, cplx* out, std::size_t n);
  // out[i] = |in[i]|^2
  void (*abs2)(const cplx* in, double* out, std::size_t n);
  // sum_i |in[i]|^2
  double (*energy)(const cplx* in, std::size_t n);
};

const KernelTable& scalar_table();

/// AVX2 table, or nullptr when not compiled in or not supported by this CPU.
const KernelTable* avx2_table();

/// Table used by the free functions below.
const KernelTable& active();

void weighted_channel_sum(std::span<const cplx> weights, std::span<const cplx* const> planes,
                          std::span<cplx> out);
cplx dot_conj(std::span<const cplx> a, std::span<const cplx> b);
void mul_conj(std::span<const cplx> a, std::span<const cplx> b, std::span<cplx> out);
void abs2(std::span<const cplx> in, std::span<double> out);
double energy(std::span<const cplx> in);

namespace detail {
const KernelTable& avx2_impl();
}

}  // namespace aesa::kernels
