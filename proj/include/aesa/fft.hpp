#pragma once

#include <span>
#include <vector>

#include "aesa/common.hpp"

namespace aesa::fft {

/// Unnormalized forward DFT: X[k] = sum_n x[n] exp(-j 2 pi k n / N). Any N >= 1.
void forward(std::span<const cplx> in, std::span<cplx> out);

/// Inverse DFT including the 1/N factor.
void inverse(std::span<const cplx> in, std::span<cplx> out);

std::vector<cplx> forward(std::span<const cplx> in);
std::vector<cplx> inverse(std::span<const cplx> in);

/// Smallest power of two >= n.
std::size_t next_pow2(std::size_t n);

/// Rotate so that the zero-frequency sample sits at index N/2 (floor).
template <typename T>
void fftshift(std::span<T> v) {
  const std::size_t n = v.size();
  if (n < 2) return;
  std::vector<T> tmp(v.begin(), v.end());
  const std::size_t half = n / 2;
  for (std::size_t i = 0; i < n; ++i) v[(i + half) % n] = tmp[i];
}

}  // namespace aesa::fft
