#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aesa/array_model.hpp"
#include "aesa/common.hpp"

namespace aesa {

/// Pulse-Doppler waveform and receive-window parameters.
///
/// The receive window is sampled at absolute fast-time sample indices
/// first_range_bin() .. first_range_bin() + n_range_bins() - 1, where sample n
/// corresponds to range n * c / (2 * sample_rate). Range bins therefore carry
/// the same absolute index as the fast-time sample of their delay.
struct RadarParams {
  double wavelength = 0.03;
  double bandwidth = 50e6;
  double pulse_width = 4e-6;
  double prf = 2000.0;
  std::size_t n_pulses = 128;
  double sample_rate = 62.5e6;
  double r_min = 9000.0;
  double r_max = 9600.0;

  /// Throws ConfigError when an invariant fails.
  void validate() const;

  double range_bin_m() const { return kSpeedOfLight / (2.0 * sample_rate); }
  std::size_t first_range_bin() const;
  std::size_t n_range_bins() const;
  /// Samples in the transmitted replica.
  std::size_t pulse_samples() const;
  /// Fast-time samples per pulse (range window plus one replica length).
  std::size_t n_fast() const { return n_range_bins() + pulse_samples() - 1; }
  double chirp_rate() const { return bandwidth / pulse_width; }
  double dwell_time() const { return static_cast<double>(n_pulses) / prf; }

  bool operator==(const RadarParams&) const = default;
};

/// Point target. snr_db is the per-channel signal-to-noise ratio at the
/// range-Doppler peak for an on-grid return after ideal (rectangular-window)
/// range and Doppler integration.
struct PointTarget {
  double range_m = 9300.0;
  double radial_velocity_mps = 0.0;  // positive = closing
  double azimuth_deg = 0.0;
  double snr_db = 20.0;

  bool operator==(const PointTarget&) const = default;
};

/// Broadband barrage jammer. jnr_db is jammer power over noise power in one
/// subarray channel sample.
struct JammerSource {
  double azimuth_deg = 21.4;
  double jnr_db = 50.0;
  bool active = false;

  bool operator==(const JammerSource&) const = default;
};

/// Optional zero-Doppler clutter band over the first range bins of the window.
/// Each (range bin, channel) cell draws an independent complex Gaussian
/// amplitude, so cell powers are exponentially distributed with mean cnr_db
/// (defined like PointTarget::snr_db).
struct ClutterBand {
  bool enabled = false;
  std::size_t n_range_bins = 8;
  double cnr_db = 30.0;

  bool operator==(const ClutterBand&) const = default;
};

struct Scatterer {
  double down_range_m = 0.0;
  double cross_range_m = 0.0;
  double amplitude = 1.0;

  bool operator==(const Scatterer&) const = default;
};

/// Rigid body for ISAR sequences. Slow time t is measured from the centre of
/// the whole sequence; each scatterer's range is
///   center_range - v t + down_range cos(omega t) - cross_range sin(omega t)
/// and its return carries the extra phase exp(j sum_p phase_error[p-2] t^p).
struct RigidBodyTarget {
  std::vector<Scatterer> scatterers;
  double center_range_m = 9300.0;
  double azimuth_deg = 0.0;
  double rotation_rate = 0.02;           // rad/s
  double translational_velocity = 0.0;   // m/s, positive = closing
  double snr_db = 20.0;                  // per unit-amplitude scatterer, as PointTarget
  std::vector<double> phase_error;       // c2, c3, ... in rad/s^p

  bool operator==(const RigidBodyTarget&) const = default;
};

/// Raw multichannel dwell. Storage is (channel, pulse, fast-time) so each
/// pulse is contiguous; at() takes the (channel, fast, slow) order.
struct RawDatacube {
  ComplexCube values;
  RadarParams params;
  std::uint64_t seed = 0;
  double slow_time_start = 0.0;  // seconds, time of pulse 0

  cplx& at(std::size_t channel, std::size_t fast, std::size_t slow) { return values(channel, slow, fast); }
  const cplx& at(std::size_t channel, std::size_t fast, std::size_t slow) const {
    return values(channel, slow, fast);
  }
};

struct SimulationOptions {
  bool include_noise = true;
  ClutterBand clutter;
  /// When set, target amplitudes are calibrated so snr_db is met at the actual
  /// processed peak (this slow-time window, range and Doppler straddle
  /// included) instead of the ideal on-grid rectangular peak.
  std::optional<std::vector<double>> peak_window;
};

/// Transmitted linear-FM replica sampled at the receiver rate (not normalized).
std::vector<cplx> lfm_replica(const RadarParams& params);

/// Per-channel phase-only signature of a plane wave from az: the subarray
/// steering vector divided by its (common) entry modulus.
Eigen::VectorXcd channel_signature(const ArrayGeometry& geometry, double az_deg);

/// Per-sample echo amplitude that yields snr_db at the processed peak.
double echo_amplitude(const RadarParams& params, double snr_db, double noise_power);

/// Largest processed response per unit echo amplitude: peak unit-energy
/// matched-filter magnitude over range samples times peak unitary-DFT magnitude
/// of the windowed slow-time phasor over Doppler bins.
double processed_peak_gain(const RadarParams& params, double range_m, double radial_velocity_mps,
                           std::span<const double> doppler_window);

/// One dwell with point targets, jammer, receiver noise and optional clutter.
/// Deterministic in seed.
RawDatacube simulate_dwell(const RadarParams& params, const ArrayGeometry& geometry,
                           const std::vector<PointTarget>& targets, const JammerSource& jammer,
                           double noise_power, std::uint64_t seed, const SimulationOptions& options = {});

struct IsarSequence {
  std::vector<RawDatacube> dwells;
  std::vector<std::string> diagnostics;
};

/// Consecutive dwells observing a rotating rigid body. Dwell d is drawn from
/// derive_seed(seed, d + 1). Total rotation of 0.2 rad or more adds a
/// diagnostic but still computes.
IsarSequence simulate_isar_sequence(const RadarParams& params, const ArrayGeometry& geometry,
                                    const RigidBodyTarget& body, std::size_t n_dwells, double noise_power,
                                    std::uint64_t seed, bool include_noise = true);

}  // namespace aesa
