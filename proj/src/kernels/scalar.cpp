#include "aesa/kernels.hpp"

namespace aesa::kernels {
namespace {

void weighted_channel_sum_scalar(const cplx* weights, const cplx* const* planes,
                                 std::size_t n_channels, cplx* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = cplx{};
  for (std::size_t c = 0; c < n_channels; ++c) {
    const cplx w = std::conj(weights[c]);
    const cplx* p = planes[c];
    for (std::size_t i = 0; i < n; ++i) out[i] += w * p[i];
  }
}

cplx dot_conj_scalar(const cplx* a, const cplx* b, std::size_t n) {
  double re = 0.0;
  double im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    re += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    im += a[i].imag() * b[i].real() - a[i].real() * b[i].imag();
  }
  return {re, im};
}

void mul_conj_scalar(const cplx* a, const cplx* b, cplx* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * std::conj(b[i]);
}

void abs2_scalar(const cplx* in, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::norm(in[i]);
}

double energy_scalar(const cplx* in, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::norm(in[i]);
  return acc;
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{"scalar",          weighted_channel_sum_scalar, dot_conj_scalar,
                                 mul_conj_scalar,   abs2_scalar,                 energy_scalar};
  return table;
}

}  // namespace aesa::kernels
