#pragma once

// Experiment orchestration for the four trial modes:
//   T1  detection + MUSIC bearing vs ground truth, angular span bookkeeping
//   T2  conventional vs MVDR maps per steering angle, rejection, beamscan
//   T3  MVDR-enhanced detection followed by MUSIC on the unfiltered cube
//   T4  ISAR sequence, range alignment, autofocus, image and scatterers

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "aesa/array_model.hpp"
#include "aesa/beamforming.hpp"
#include "aesa/detection_doa.hpp"
#include "aesa/grid_io.hpp"
#include "aesa/isar.hpp"
#include "aesa/rd_processing.hpp"
#include "aesa/scene_sim.hpp"

namespace aesa {

inline constexpr std::string_view kVersion = "1.0.0";

enum class Mode { t1, t2, t3, t4 };
Mode parse_mode(std::string_view name);
std::string_view mode_name(Mode m);

/// Optional ship description attached to a simulated target; used to build a
/// ground-truth track when no track file is configured.
struct VesselInfo {
  std::string name;
  double length_m = 0.0;
  double beam_m = 0.0;
  double heading_deg = 0.0;

  bool operator==(const VesselInfo&) const = default;
};

struct TargetConfig {
  PointTarget target;
  VesselInfo vessel;

  bool operator==(const TargetConfig&) const = default;
};

struct ProcessingConfig {
  Window window = Window::hann;
  std::size_t oversampling = 1;
  double loading_db = 10.0;
  CfarConfig cfar;
  DoaWindow doa;
  double doa_grid_step_deg = 0.05;
  double doa_grid_limit_deg = 22.5;
  std::size_t n_sources = 1;
  std::size_t training_guard = 3;   // +- bins around detections excluded from MVDR training
  double beamscan_step_deg = 0.5;
  std::size_t monte_carlo_runs = 1;
  double association_range_m = 50.0;
  std::size_t merge_radius = 3;     // detections closer than this (both axes) are one target

  bool operator==(const ProcessingConfig&) const = default;
};

struct IsarConfig {
  RigidBodyTarget body;
  std::size_t n_dwells = 32;
  std::size_t half_width = 16;
  AutofocusConfig autofocus;
  std::optional<double> omega;  // rad/s used for scaling; body rotation rate when empty
  double omega_scale = 1.0;
  Window image_window = Window::hann;

  bool operator==(const IsarConfig&) const = default;
};

struct ExperimentConfig {
  Mode mode = Mode::t1;
  RadarParams radar;
  double noise_power = 1.0;
  std::vector<TargetConfig> targets;
  JammerSource jammer;
  ClutterBand clutter;
  bool adaptive = false;
  std::vector<double> steering_deg;
  std::uint64_t seed = 1;
  double radar_heading_deg = 0.0;  // compass bearing of array boresight
  std::string ground_truth;        // optional track CSV
  ProcessingConfig processing;
  IsarConfig isar;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Mode defaults: T1/T4 without jammer, T2/T3 with the 21.4 deg, 50 dB jammer.
ExperimentConfig default_config(Mode mode);

/// Throws ConfigError on mode/scenario mismatches (jammer required in T2/T3,
/// forbidden in T1/T4) or out-of-range values.
void validate_config(const ExperimentConfig& cfg);

/// Parses JSON text. Keys missing from the document keep the defaults of the
/// document's mode (or of mode_override when given). Unknown keys, wrong types
/// and invalid values raise ConfigError naming the key paths.
ExperimentConfig parse_config(const std::string& text, std::optional<Mode> mode_override = std::nullopt);
ExperimentConfig load_config(const std::string& path, std::optional<Mode> mode_override = std::nullopt);
std::string serialize_config(const ExperimentConfig& cfg);

/// FNV-1a over the canonical serialization, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

// ---- per-trial building blocks (also used by the acceptance runs) ----

struct RdCell {
  std::size_t range_bin = 0;
  std::size_t column = 0;
};

/// Cell where a point target's peak is expected in a processed cube.
RdCell expected_cell(const RDDatacube& rd, const PointTarget& target);

/// Keeps the strongest detection among those closer than `radius` in both axes.
std::vector<Detection> merge_detections(std::vector<Detection> dets, std::size_t radius);

/// Clutter exclusion mask for the configured band (all cells when enabled).
std::optional<CellMask> clutter_mask(const RDDatacube& rd, const ClutterBand& clutter);

/// Simulated dwell for a config, processed to range-Doppler.
RDDatacube process_dwell(const ExperimentConfig& cfg, const ArrayGeometry& geometry, std::uint64_t dwell_seed,
                         RawDatacube* raw_out = nullptr);

struct DoaEstimate {
  Detection detection;
  std::size_t snapshot_count = 0;
  std::vector<double> azimuth_deg;  // strongest first
  MusicSpectrum spectrum;
};

DoaEstimate estimate_doa(const RDDatacube& rd, const ArrayGeometry& geometry, const Detection& det,
                         const ProcessingConfig& proc, std::size_t n_sources, const CellMask* clutter);

struct T1TargetResult {
  std::string name;
  double truth_range_m = 0.0;
  double truth_azimuth_deg = 0.0;
  bool detected = false;
  double range_m = 0.0;
  double estimate_deg = 0.0;
  double error_deg = 0.0;
  std::optional<AngularSpan> span;
};

struct T1Trial {
  std::vector<Detection> detections;
  std::vector<DoaEstimate> estimates;
  std::vector<T1TargetResult> targets;
};

T1Trial run_t1_trial(const ExperimentConfig& cfg, const ArrayGeometry& geometry,
                     const std::vector<GroundTruthTrack>& truth, std::uint64_t dwell_seed);

struct T2Steer {
  double steer_deg = 0.0;
  double rejection_db = 0.0;
  ComplexGrid conventional;
  ComplexGrid adaptive;
  CellMask excluded;
  BeamformerWeights mvdr;
  CovarianceEstimate covariance;
};

struct T2Dwell {
  RDDatacube rd;
  std::vector<T2Steer> steers;
  BeamscanCurve conventional_scan;
  BeamscanCurve adaptive_scan;  // from the broadside-steer covariance
};

T2Dwell run_t2_dwell(const ExperimentConfig& cfg, const ArrayGeometry& geometry, std::uint64_t dwell_seed);

struct T3Target {
  RdCell cell;
  bool conventional_detected = false;
  bool adaptive_detected = false;
  std::optional<DoaEstimate> doa;
  double target_error_deg = 0.0;  // valid when doa holds two peaks
  double jammer_error_deg = 0.0;
};

struct T3Trial {
  std::vector<Detection> conventional_detections;
  std::vector<Detection> adaptive_detections;
  std::vector<T3Target> targets;
};

T3Trial run_t3_trial(const ExperimentConfig& cfg, const ArrayGeometry& geometry, std::uint64_t dwell_seed);

struct T4Result {
  AlignmentResult alignment;
  AutofocusResult autofocus;
  IsarImage unfocused;
  IsarImage image;  // focused and cross-range scaled
  std::vector<ScatteringCentre> scatterers;
  std::vector<std::string> diagnostics;
  std::size_t centre_bin = 0;
};

T4Result run_t4(const ExperimentConfig& cfg, const ArrayGeometry& geometry);

// ---- whole experiments ----

struct Artifact {
  std::string name;
  std::string bytes;
};

struct ExperimentReport {
  Mode mode = Mode::t1;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string version{kVersion};
  std::vector<std::string> metrics;  // "key = value" lines of the summary
  std::vector<Artifact> artifacts;   // summary.txt first

  const Artifact* find(std::string_view name) const;
};

struct RunOptions {
  bool dump_geometry = false;
  bool emit_raw = false;
};

ExperimentReport run_experiment(const ExperimentConfig& cfg, const RunOptions& options = {});

/// Writes every artifact into dir (created when missing).
void write_report(const ExperimentReport& report, const std::string& dir);

}  // namespace aesa
