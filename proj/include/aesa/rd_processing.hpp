#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "aesa/common.hpp"
#include "aesa/scene_sim.hpp"

namespace aesa {

/// Pulse-compressed dwell, stored (channel, pulse, range bin).
struct CompressedCube {
  ComplexCube values;
  RadarParams params;
  double slow_time_start = 0.0;

  std::size_t n_channels() const { return values.planes(); }
  std::size_t n_pulses() const { return values.rows(); }
  std::size_t n_range_bins() const { return values.cols(); }
};

enum class Window { rectangular, hann, hamming };

Window parse_window(std::string_view name);
std::string_view window_name(Window w);

/// Window of length n scaled so that sum(w^2) = n; white noise keeps its
/// power through a unitary DFT.
std::vector<double> window_coefficients(Window w, std::size_t n);

/// Range-Doppler datacube, stored (channel, range bin, Doppler column).
/// Doppler columns are shifted so that column n_doppler/2 is zero Doppler.
struct RDDatacube {
  ComplexCube values;
  std::vector<double> range_axis_m;
  std::vector<double> doppler_axis_mps;
  std::vector<std::string> window_meta;
  RadarParams params;
  std::size_t first_range_bin = 0;

  std::size_t n_channels() const { return values.planes(); }
  std::size_t n_range_bins() const { return values.rows(); }
  std::size_t n_doppler_bins() const { return values.cols(); }

  /// Column of signed Doppler bin k (k = 0 is zero Doppler), modulo wrap.
  std::size_t doppler_column(long long k) const;
  /// Signed Doppler bin of a column, in [-n/2, n/2).
  long long doppler_bin(std::size_t column) const;
  double doppler_hz(std::size_t column) const;
  /// Channel vector at one cell.
  Eigen::VectorXcd snapshot(std::size_t range_bin, std::size_t column) const;
};

/// Matched filter against the unit-energy LFM replica, per pulse and channel.
/// An on-sample point echo of amplitude A compresses to A * sqrt(pulse_samples).
CompressedCube range_compress(const RawDatacube& raw);

/// Windowed unitary DFT over slow time for every (channel, range bin).
/// oversampling > 1 zero-pads the slow-time sequence to n_pulses * oversampling.
RDDatacube doppler_process(const CompressedCube& compressed, Window window = Window::hann,
                           std::size_t oversampling = 1);

}  // namespace aesa
