// Compiled with -mavx2 -mfma. Only reached through avx2_table(), which checks
// CPU support first.

#include <immintrin.h>

#include "aesa/kernels.hpp"

namespace aesa::kernels::detail {
namespace {

// A __m256d holds two complex doubles laid out as [re0, im0, re1, im1].

inline __m256d load2(const cplx* p) { return _mm256_loadu_pd(reinterpret_cast<const double*>(p)); }
inline void store2(cplx* p, __m256d v) { _mm256_storeu_pd(reinterpret_cast<double*>(p), v); }

inline __m256d swap_re_im(__m256d v) { return _mm256_permute_pd(v, 0x5); }

// a * conj(b)
inline __m256d cmul_conj(__m256d a, __m256d b) {
  const __m256d br = _mm256_movedup_pd(b);        // [br0, br0, br1, br1]
  const __m256d bi = _mm256_permute_pd(b, 0xF);   // [bi0, bi0, bi1, bi1]
  // re = ar*br + ai*bi ; im = ai*br - ar*bi
  const __m256d t = _mm256_mul_pd(swap_re_im(a), bi);  // [ai*bi, ar*bi, ...]
  return _mm256_fmsubadd_pd(a, br, t);
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

void weighted_channel_sum_avx2(const cplx* weights, const cplx* const* planes,
                               std::size_t n_channels, cplx* out, std::size_t n) {
  const std::size_t n_vec = n & ~std::size_t{1};
  for (std::size_t i = 0; i < n_vec; i += 2) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t c = 0; c < n_channels; ++c) {
      const __m256d x = load2(planes[c] + i);
      // conj(w) * x: re = wr*xr + wi*xi ; im = wr*xi - wi*xr
      const __m256d wr = _mm256_set1_pd(weights[c].real());
      const __m256d wi = _mm256_set1_pd(weights[c].imag());
      const __m256d t = _mm256_mul_pd(wi, swap_re_im(x));  // [wi*xi, wi*xr, ...]
      acc = _mm256_add_pd(acc, _mm256_fmsubadd_pd(wr, x, t));
    }
    store2(out + i, acc);
  }
  for (std::size_t i = n_vec; i < n; ++i) {
    cplx acc{};
    for (std::size_t c = 0; c < n_channels; ++c) acc += std::conj(weights[c]) * planes[c][i];
    out[i] = acc;
  }
}

cplx dot_conj_avx2(const cplx* a, const cplx* b, std::size_t n) {
  const std::size_t n_vec = n & ~std::size_t{1};
  __m256d acc = _mm256_setzero_pd();
  for (std::size_t i = 0; i < n_vec; i += 2) {
    acc = _mm256_add_pd(acc, cmul_conj(load2(a + i), load2(b + i)));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  cplx result{lanes[0] + lanes[2], lanes[1] + lanes[3]};
  for (std::size_t i = n_vec; i < n; ++i) result += a[i] * std::conj(b[i]);
  return result;
}

void mul_conj_avx2(const cplx* a, const cplx* b, cplx* out, std::size_t n) {
  const std::size_t n_vec = n & ~std::size_t{1};
  for (std::size_t i = 0; i < n_vec; i += 2) store2(out + i, cmul_conj(load2(a + i), load2(b + i)));
  for (std::size_t i = n_vec; i < n; ++i) out[i] = a[i] * std::conj(b[i]);
}

void abs2_avx2(const cplx* in, double* out, std::size_t n) {
  const std::size_t n_vec = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n_vec; i += 4) {
    const __m256d x0 = load2(in + i);
    const __m256d x1 = load2(in + i + 2);
    // hadd -> [|x0|^2, |x2|^2, |x1|^2, |x3|^2]
    const __m256d h = _mm256_hadd_pd(_mm256_mul_pd(x0, x0), _mm256_mul_pd(x1, x1));
    _mm256_storeu_pd(out + i, _mm256_permute4x64_pd(h, 0xD8));
  }
  for (std::size_t i = n_vec; i < n; ++i) out[i] = std::norm(in[i]);
}

double energy_avx2(const cplx* in, std::size_t n) {
  const std::size_t n_vec = n & ~std::size_t{1};
  __m256d acc = _mm256_setzero_pd();
  for (std::size_t i = 0; i < n_vec; i += 2) {
    const __m256d x = load2(in + i);
    acc = _mm256_fmadd_pd(x, x, acc);
  }
  double result = hsum(acc);
  for (std::size_t i = n_vec; i < n; ++i) result += std::norm(in[i]);
  return result;
}

}  // namespace

const KernelTable& avx2_impl() {
  static const KernelTable table{"avx2",        weighted_channel_sum_avx2, dot_conj_avx2,
                                 mul_conj_avx2, abs2_avx2,                 energy_avx2};
  return table;
}

}  // namespace aesa::kernels::detail
