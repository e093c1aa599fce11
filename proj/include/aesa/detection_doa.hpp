#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aesa/array_model.hpp"
#include "aesa/beamforming.hpp"
#include "aesa/common.hpp"
#include "aesa/rd_processing.hpp"

namespace aesa {

struct Detection {
  std::size_t range_bin = 0;  // row index in the map
  std::size_t column = 0;     // Doppler column in the map
  long long doppler_bin = 0;  // signed Doppler bin
  double range_m = 0.0;
  double radial_velocity_mps = 0.0;
  double peak_power_db = 0.0;
  double threshold_db = 0.0;
};

struct CfarConfig {
  double pfa = 1e-4;
  std::size_t n_train = 16;  // per side
  std::size_t n_guard = 2;   // per side

  bool operator==(const CfarConfig&) const = default;
};

/// CA-CFAR threshold multiplier alpha = N (pfa^(-1/N) - 1).
double cfar_alpha(double pfa, std::size_t n_cells);

/// Cell-averaging CFAR along range, separately per Doppler column. Near the
/// edges the training window keeps only the cells inside the map and alpha is
/// recomputed for that count. A detection must exceed its threshold and be a
/// local maximum among its range neighbours. Optional axes fill range_m and
/// radial_velocity_mps.
std::vector<Detection> cfar_detect(const RealGrid& power, const CfarConfig& cfg,
                                   std::span<const double> range_axis_m = {},
                                   std::span<const double> doppler_axis_mps = {});

/// Convenience overload that attaches the cube's axes and signed Doppler bins.
std::vector<Detection> cfar_detect(const RealGrid& power, const CfarConfig& cfg, const RDDatacube& axes_from);

/// Window of cells around a detection used for DoA training.
struct DoaWindow {
  std::size_t range_half = 4;
  std::size_t doppler_half = 4;
  std::size_t guard_range_half = 0;  // 0 with guard_doppler_half 0 disables the guard
  std::size_t guard_doppler_half = 0;
  std::size_t min_snapshots = 0;     // 0 means 2 x channel count

  bool operator==(const DoaWindow&) const = default;
};

struct TrainingSubset {
  SnapshotMatrix snapshots;
  std::size_t count = 0;
};

/// Snapshots in the window around a detection minus the guard block (when
/// enabled) minus cells set in clutter_mask.
TrainingSubset select_training_subset(const RDDatacube& rd, const Detection& detection, const DoaWindow& window,
                                      const CellMask* clutter_mask = nullptr);

struct MusicSpectrum {
  std::vector<double> az_grid_deg;
  std::vector<double> pseudo_spectrum;
  std::size_t n_sources = 1;
};

/// P(az) = 1 / ||E_n^H v(az)||^2 with E_n the eigenvectors of the
/// (channels - n_sources) smallest eigenvalues.
MusicSpectrum music_spectrum(const CovarianceEstimate& cov, const ArrayGeometry& geometry,
                             std::span<const double> az_grid_deg, std::size_t n_sources);

struct PeakPick {
  std::vector<double> azimuth_deg;  // sorted by descending value
  std::vector<double> value;
  bool complete = true;             // false when fewer than k local maxima exist
};

/// k largest interior local maxima, refined by three-point parabolic
/// interpolation. Ties go to the smaller |azimuth|.
PeakPick pick_peaks(std::span<const double> az_grid_deg, std::span<const double> values, std::size_t k);
PeakPick pick_peaks(const MusicSpectrum& spectrum, std::size_t k);

struct GroundTruthTrack {
  std::string timestamp;
  std::string name;
  double range_m = 0.0;
  double azimuth_deg = 0.0;
  double heading_deg = 0.0;
  double length_m = 0.0;
  double beam_m = 0.0;
};

/// Reads the track CSV (header: timestamp,name,range_m,azimuth_deg,heading_deg,length_m,beam_m).
std::vector<GroundTruthTrack> read_tracks_csv(const std::string& path);
std::vector<GroundTruthTrack> parse_tracks_csv(const std::string& text);

/// |estimate - truth| wrapped to [0, 180].
double angular_error(double estimate_deg, const GroundTruthTrack& truth);
double angular_error(double estimate_deg, double truth_deg);

struct AngularSpan {
  double projected_size_m = 0.0;
  double span_deg = 0.0;
  std::optional<bool> within;
};

/// Angular width subtended by a projected cross-range extent at a range.
/// The error counts as within the target when it does not exceed the span
/// plus `quantum_deg / 2` (the half reporting quantum).
AngularSpan angular_span_from_projection(double projected_m, double range_m,
                                         std::optional<double> error_deg = std::nullopt, double quantum_deg = 0.1);

/// Projects the vessel length onto the axis perpendicular to the line of
/// sight, floored at the beam, then applies angular_span_from_projection().
AngularSpan target_angular_span(const GroundTruthTrack& track, double radar_los_azimuth_deg,
                                std::optional<double> error_deg = std::nullopt, double quantum_deg = 0.1);

}  // namespace aesa
