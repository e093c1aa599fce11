#include "aesa/fft.hpp"

#include <unsupported/Eigen/FFT>

namespace aesa::fft {
namespace {

Eigen::FFT<double>& engine() {
  // Plans are cached per length inside the engine.
  thread_local Eigen::FFT<double> instance;
  return instance;
}

}  // namespace

void forward(std::span<const cplx> in, std::span<cplx> out) {
  if (in.size() != out.size() || in.empty()) throw ContractError("fft::forward: bad lengths");
  if (in.size() == 1) {
    out[0] = in[0];
    return;
  }
  engine().fwd(out.data(), in.data(), static_cast<int>(in.size()));
}

void inverse(std::span<const cplx> in, std::span<cplx> out) {
  if (in.size() != out.size() || in.empty()) throw ContractError("fft::inverse: bad lengths");
  if (in.size() == 1) {
    out[0] = in[0];
    return;
  }
  engine().inv(out.data(), in.data(), static_cast<int>(in.size()));
}

std::vector<cplx> forward(std::span<const cplx> in) {
  std::vector<cplx> out(in.size());
  forward(in, out);
  return out;
}

std::vector<cplx> inverse(std::span<const cplx> in) {
  std::vector<cplx> out(in.size());
  inverse(in, out);
  return out;
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace aesa::fft
