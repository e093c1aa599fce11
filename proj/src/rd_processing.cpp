#include "aesa/rd_processing.hpp"

#include <cmath>

#include "aesa/fft.hpp"
#include "aesa/kernels.hpp"

namespace aesa {

Window parse_window(std::string_view name) {
  if (name == "rectangular" || name == "rect") return Window::rectangular;
  if (name == "hann") return Window::hann;
  if (name == "hamming") return Window::hamming;
  throw ConfigError("unknown window '" + std::string(name) + "' (expected rectangular, hann or hamming)");
}

std::string_view window_name(Window w) {
  switch (w) {
    case Window::rectangular: return "rectangular";
    case Window::hann: return "hann";
    case Window::hamming: return "hamming";
  }
  return "unknown";
}

std::vector<double> window_coefficients(Window w, std::size_t n) {
  std::vector<double> c(n, 1.0);
  if (n < 2 || w == Window::rectangular) return c;
  const double denom = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double phase = 2.0 * kPi * static_cast<double>(i) / denom;
    c[i] = w == Window::hann ? 0.5 * (1.0 - std::cos(phase)) : 0.54 - 0.46 * std::cos(phase);
  }
  double energy = 0.0;
  for (double x : c) energy += x * x;
  const double scale = std::sqrt(static_cast<double>(n) / energy);
  for (double& x : c) x *= scale;
  return c;
}

std::size_t RDDatacube::doppler_column(long long k) const {
  const auto n = static_cast<long long>(n_doppler_bins());
  return static_cast<std::size_t>((((k + n / 2) % n) + n) % n);
}

long long RDDatacube::doppler_bin(std::size_t column) const {
  return static_cast<long long>(column) - static_cast<long long>(n_doppler_bins() / 2);
}

double RDDatacube::doppler_hz(std::size_t column) const {
  return static_cast<double>(doppler_bin(column)) * params.prf / static_cast<double>(n_doppler_bins());
}

Eigen::VectorXcd RDDatacube::snapshot(std::size_t range_bin, std::size_t column) const {
  Eigen::VectorXcd x(static_cast<Eigen::Index>(n_channels()));
  for (std::size_t c = 0; c < n_channels(); ++c) x(static_cast<Eigen::Index>(c)) = values(c, range_bin, column);
  return x;
}

CompressedCube range_compress(const RawDatacube& raw) {
  const RadarParams& p = raw.params;
  const std::size_t n_fast = p.n_fast();
  const std::size_t n_range = p.n_range_bins();
  if (raw.values.cols() != n_fast || raw.values.rows() != p.n_pulses) {
    throw ContractError("range_compress: raw cube shape does not match its radar parameters");
  }
  std::vector<cplx> replica = lfm_replica(p);
  double norm = 0.0;
  for (const cplx& h : replica) norm += std::norm(h);
  norm = std::sqrt(norm);
  for (cplx& h : replica) h /= norm;

  const std::size_t n_fft = fft::next_pow2(n_fast);
  std::vector<cplx> padded(n_fft);
  std::copy(replica.begin(), replica.end(), padded.begin());
  const std::vector<cplx> replica_spec = fft::forward(padded);

  const std::size_t n_ch = raw.values.planes();
  CompressedCube out{ComplexCube(n_ch, p.n_pulses, n_range), p, raw.slow_time_start};
  std::vector<cplx> spec(n_fft);
  std::vector<cplx> time(n_fft);
  for (std::size_t c = 0; c < n_ch; ++c) {
    for (std::size_t m = 0; m < p.n_pulses; ++m) {
      const auto pulse = raw.values.row(c, m);
      std::fill(padded.begin(), padded.end(), cplx{});
      std::copy(pulse.begin(), pulse.end(), padded.begin());
      fft::forward(padded, spec);
      kernels::mul_conj(spec, replica_spec, spec);
      fft::inverse(spec, time);
      auto dst = out.values.row(c, m);
      std::copy_n(time.begin(), n_range, dst.begin());
    }
  }
  return out;
}

RDDatacube doppler_process(const CompressedCube& compressed, Window window, std::size_t oversampling) {
  const std::size_t n_pulses = compressed.n_pulses();
  if (n_pulses < 2) throw ContractError("doppler_process: need at least two pulses");
  if (oversampling == 0) throw ConfigError("doppler_process: oversampling must be >= 1");
  const std::size_t n_dop = n_pulses * oversampling;
  const std::size_t n_range = compressed.n_range_bins();
  const std::size_t n_ch = compressed.n_channels();
  const RadarParams& p = compressed.params;

  RDDatacube rd;
  rd.values = ComplexCube(n_ch, n_range, n_dop);
  rd.params = p;
  rd.first_range_bin = p.first_range_bin();
  rd.window_meta = {"range:matched-filter", "doppler:" + std::string(window_name(window))};
  rd.range_axis_m.resize(n_range);
  for (std::size_t r = 0; r < n_range; ++r) {
    rd.range_axis_m[r] = static_cast<double>(rd.first_range_bin + r) * p.range_bin_m();
  }
  rd.doppler_axis_mps.resize(n_dop);
  for (std::size_t j = 0; j < n_dop; ++j) rd.doppler_axis_mps[j] = rd.doppler_hz(j) * p.wavelength / 2.0;

  const std::vector<double> w = window_coefficients(window, n_pulses);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n_pulses));
  std::vector<cplx> in(n_dop);
  std::vector<cplx> out(n_dop);
  for (std::size_t c = 0; c < n_ch; ++c) {
    for (std::size_t r = 0; r < n_range; ++r) {
      std::fill(in.begin(), in.end(), cplx{});
      for (std::size_t m = 0; m < n_pulses; ++m) in[m] = compressed.values(c, m, r) * (w[m] * scale);
      fft::forward(in, out);
      fft::fftshift(std::span<cplx>(out));
      std::copy(out.begin(), out.end(), rd.values.row(c, r).begin());
    }
  }
  return rd;
}

}  // namespace aesa
