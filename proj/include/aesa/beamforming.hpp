#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "aesa/array_model.hpp"
#include "aesa/common.hpp"
#include "aesa/rd_processing.hpp"

namespace aesa {

/// Channel-major snapshot storage: row c holds channel c for every snapshot.
using SnapshotMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Non-zero cells are excluded.
using CellMask = Grid<std::uint8_t>;

/// Rectangle of cells centred on (range_bin, column), clipped to the map.
struct GuardBox {
  std::size_t range_bin = 0;
  std::size_t column = 0;
  std::size_t range_half = 3;
  std::size_t doppler_half = 3;
};

/// Marks every guard box (and any cell already set in `base`) as excluded.
CellMask exclusion_mask(std::size_t n_range, std::size_t n_doppler, std::span<const GuardBox> guards,
                        const CellMask* base = nullptr);

inline constexpr std::size_t kToEnd = std::numeric_limits<std::size_t>::max();

/// Block of range-Doppler cells used as covariance training data.
/// Spans are half-open; kToEnd extends to the cube edge.
struct TrainingRegion {
  std::size_t range_begin = 0;
  std::size_t range_end = kToEnd;
  std::size_t doppler_begin = 0;
  std::size_t doppler_end = kToEnd;
  std::vector<GuardBox> guards;
  std::optional<CellMask> excluded;  // e.g. a clutter mask
  std::size_t min_snapshots = 0;     // 0 means 2 x channel count
};

struct CovarianceEstimate {
  Eigen::MatrixXcd matrix;
  std::size_t snapshot_count = 0;
  double diagonal_loading = 0.0;  // linear power added to the diagonal
  double noise_floor = 0.0;       // smallest eigenvalue before loading
};

enum class BeamMode { conventional, mvdr };

struct BeamformerWeights {
  Eigen::VectorXcd values;  // unit 2-norm
  BeamMode mode = BeamMode::conventional;
  double steer_azimuth_deg = 0.0;
};

/// Gathers the snapshots of a training region. Throws EstimationError when
/// fewer than the region's minimum remain.
SnapshotMatrix gather_snapshots(const RDDatacube& rd, const TrainingRegion& region);

/// R = (1/K) sum x x^H + delta I with delta = noise_floor * 10^(loading_db/10).
/// The noise floor is the smallest eigenvalue of the unloaded estimate unless
/// noise_floor_override is given. No loading when loading_db is empty.
CovarianceEstimate estimate_covariance(const SnapshotMatrix& snapshots, std::optional<double> loading_db,
                                       std::optional<double> noise_floor_override = std::nullopt);

CovarianceEstimate estimate_covariance(const RDDatacube& rd, const TrainingRegion& region,
                                       std::optional<double> loading_db,
                                       std::optional<double> noise_floor_override = std::nullopt);

/// v(az) / ||v(az)|| at subarray level.
BeamformerWeights conventional_weights(const ArrayGeometry& geometry, double az_deg);

/// Distortionless MVDR weights R^-1 v / (v^H R^-1 v) before unit-norm scaling.
Eigen::VectorXcd mvdr_distortionless(const CovarianceEstimate& cov, const Eigen::VectorXcd& steering);

/// MVDR weights rescaled to unit norm.
BeamformerWeights mvdr_weights(const CovarianceEstimate& cov, const ArrayGeometry& geometry, double az_deg);

/// map(r, d) = w^H x(r, d) for every cell of a channel-plane cube.
ComplexGrid beamform(const ComplexCube& cube, const Eigen::VectorXcd& weights);

ComplexGrid apply_beamformer(const RDDatacube& rd, const BeamformerWeights& w);

/// |map|^2 per cell.
RealGrid power_map(const ComplexGrid& map);

struct BeamscanCurve {
  std::vector<double> az_grid_deg;
  std::vector<double> energy;     // linear total map energy per angle
  std::vector<double> energy_db;  // normalized to the curve maximum
};

/// Output energy of the beamformed map over an azimuth grid. MVDR mode needs a
/// covariance estimate.
BeamscanCurve beamscan(const RDDatacube& rd, const ArrayGeometry& geometry, std::span<const double> az_grid_deg,
                       BeamMode mode, const CovarianceEstimate* cov = nullptr);

/// 10 log10(mean conv power / mean adaptive power) over the cells not excluded
/// by `excluded` (all cells when null).
double rejection_db(const ComplexGrid& conv_map, const ComplexGrid& mvdr_map, const CellMask* excluded = nullptr);

}  // namespace aesa
