#include "aesa/beamforming.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "aesa/kernels.hpp"

namespace aesa {

CellMask exclusion_mask(std::size_t n_range, std::size_t n_doppler, std::span<const GuardBox> guards,
                        const CellMask* base) {
  CellMask mask(n_range, n_doppler, 0);
  if (base != nullptr) {
    if (base->rows() != n_range || base->cols() != n_doppler) throw ContractError("exclusion_mask: base mask shape");
    mask = *base;
  }
  for (const GuardBox& g : guards) {
    const std::size_t r0 = g.range_bin >= g.range_half ? g.range_bin - g.range_half : 0;
    const std::size_t r1 = std::min(n_range, g.range_bin + g.range_half + 1);
    const std::size_t c0 = g.column >= g.doppler_half ? g.column - g.doppler_half : 0;
    const std::size_t c1 = std::min(n_doppler, g.column + g.doppler_half + 1);
    for (std::size_t r = r0; r < r1; ++r)
      for (std::size_t c = c0; c < c1; ++c) mask(r, c) = 1;
  }
  return mask;
}

SnapshotMatrix gather_snapshots(const RDDatacube& rd, const TrainingRegion& region) {
  const std::size_t n_range = rd.n_range_bins();
  const std::size_t n_dop = rd.n_doppler_bins();
  const std::size_t r_end = region.range_end == kToEnd ? n_range : region.range_end;
  const std::size_t d_end = region.doppler_end == kToEnd ? n_dop : region.doppler_end;
  if (region.range_begin >= r_end || r_end > n_range || region.doppler_begin >= d_end || d_end > n_dop) {
    throw ContractError("training region lies outside the datacube");
  }
  if (region.excluded && (region.excluded->rows() != n_range || region.excluded->cols() != n_dop)) {
    throw ContractError("training region mask shape does not match the datacube");
  }
  const CellMask mask = exclusion_mask(n_range, n_dop, region.guards,
                                       region.excluded ? &*region.excluded : nullptr);
  std::vector<std::pair<std::size_t, std::size_t>> cells;
  for (std::size_t r = region.range_begin; r < r_end; ++r)
    for (std::size_t d = region.doppler_begin; d < d_end; ++d)
      if (mask(r, d) == 0) cells.emplace_back(r, d);

  const std::size_t n_ch = rd.n_channels();
  const std::size_t floor = region.min_snapshots == 0 ? 2 * n_ch : region.min_snapshots;
  if (cells.size() < floor) {
    std::ostringstream msg;
    msg << "training region holds " << cells.size() << " snapshots, need at least " << floor;
    throw EstimationError(msg.str());
  }
  SnapshotMatrix x(static_cast<Eigen::Index>(n_ch), static_cast<Eigen::Index>(cells.size()));
  for (std::size_t c = 0; c < n_ch; ++c)
    for (std::size_t k = 0; k < cells.size(); ++k)
      x(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(k)) = rd.values(c, cells[k].first, cells[k].second);
  return x;
}

CovarianceEstimate estimate_covariance(const SnapshotMatrix& snapshots, std::optional<double> loading_db,
                                       std::optional<double> noise_floor_override) {
  const auto n = static_cast<std::size_t>(snapshots.rows());
  const auto k = static_cast<std::size_t>(snapshots.cols());
  if (n == 0 || k == 0) throw EstimationError("estimate_covariance: no snapshots");
  Eigen::MatrixXcd r(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  const double inv_k = 1.0 / static_cast<double>(k);
  for (std::size_t i = 0; i < n; ++i) {
    const std::span<const cplx> xi(snapshots.row(static_cast<Eigen::Index>(i)).data(), k);
    for (std::size_t j = i; j < n; ++j) {
      const std::span<const cplx> xj(snapshots.row(static_cast<Eigen::Index>(j)).data(), k);
      const cplx v = kernels::dot_conj(xi, xj) * inv_k;
      const auto ii = static_cast<Eigen::Index>(i);
      const auto jj = static_cast<Eigen::Index>(j);
      r(ii, jj) = i == j ? cplx{v.real(), 0.0} : v;
      r(jj, ii) = std::conj(r(ii, jj));
    }
  }
  CovarianceEstimate est;
  est.snapshot_count = k;
  if (noise_floor_override) {
    est.noise_floor = *noise_floor_override;
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(r, Eigen::EigenvaluesOnly);
    est.noise_floor = std::max(0.0, eig.eigenvalues()(0));
  }
  if (loading_db) {
    est.diagonal_loading = est.noise_floor * from_db(*loading_db);
    r.diagonal().array() += est.diagonal_loading;
  }
  est.matrix = std::move(r);
  return est;
}

CovarianceEstimate estimate_covariance(const RDDatacube& rd, const TrainingRegion& region,
                                       std::optional<double> loading_db, std::optional<double> noise_floor_override) {
  return estimate_covariance(gather_snapshots(rd, region), loading_db, noise_floor_override);
}

BeamformerWeights conventional_weights(const ArrayGeometry& geometry, double az_deg) {
  Eigen::VectorXcd v = subarray_steering(geometry, az_deg).values;
  v.normalize();
  return {std::move(v), BeamMode::conventional, az_deg};
}

Eigen::VectorXcd mvdr_distortionless(const CovarianceEstimate& cov, const Eigen::VectorXcd& steering) {
  const Eigen::MatrixXcd& r = cov.matrix;
  if (r.rows() != r.cols() || r.rows() != steering.size()) {
    throw ContractError("mvdr: covariance and steering dimensions differ");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(r, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues()(0);
  const double hi = eig.eigenvalues()(eig.eigenvalues().size() - 1);
  const double cond = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (!(lo > 0.0) || cond > 1e13) {
    std::ostringstream msg;
    msg << "mvdr: covariance is singular or ill-conditioned (condition number " << cond << ")";
    throw NumericalError(msg.str());
  }
  const Eigen::LLT<Eigen::MatrixXcd> llt(r);
  if (llt.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "mvdr: Cholesky factorization failed (condition number " << cond << ")";
    throw NumericalError(msg.str());
  }
  const Eigen::VectorXcd u = llt.solve(steering);
  const cplx denom = steering.dot(u);
  return u / denom;
}

BeamformerWeights mvdr_weights(const CovarianceEstimate& cov, const ArrayGeometry& geometry, double az_deg) {
  Eigen::VectorXcd w = mvdr_distortionless(cov, subarray_steering(geometry, az_deg).values);
  w.normalize();
  return {std::move(w), BeamMode::mvdr, az_deg};
}

ComplexGrid beamform(const ComplexCube& cube, const Eigen::VectorXcd& weights) {
  if (static_cast<std::size_t>(weights.size()) != cube.planes()) {
    throw ContractError("beamform: " + std::to_string(weights.size()) + " weights for " +
                        std::to_string(cube.planes()) + " channels");
  }
  ComplexGrid out(cube.rows(), cube.cols());
  std::vector<const cplx*> planes(cube.planes());
  for (std::size_t c = 0; c < cube.planes(); ++c) planes[c] = cube.plane(c).data();
  kernels::weighted_channel_sum(std::span<const cplx>(weights.data(), static_cast<std::size_t>(weights.size())),
                                planes, out.values());
  return out;
}

ComplexGrid apply_beamformer(const RDDatacube& rd, const BeamformerWeights& w) { return beamform(rd.values, w.values); }

RealGrid power_map(const ComplexGrid& map) {
  RealGrid p(map.rows(), map.cols());
  kernels::abs2(map.values(), p.values());
  return p;
}

BeamscanCurve beamscan(const RDDatacube& rd, const ArrayGeometry& geometry, std::span<const double> az_grid_deg,
                       BeamMode mode, const CovarianceEstimate* cov) {
  if (mode == BeamMode::mvdr && cov == nullptr) throw ContractError("beamscan: MVDR mode needs a covariance estimate");
  if (az_grid_deg.empty()) throw ContractError("beamscan: empty azimuth grid");
  BeamscanCurve curve;
  curve.az_grid_deg.assign(az_grid_deg.begin(), az_grid_deg.end());
  for (double az : az_grid_deg) {
    const BeamformerWeights w =
        mode == BeamMode::mvdr ? mvdr_weights(*cov, geometry, az) : conventional_weights(geometry, az);
    curve.energy.push_back(kernels::energy(apply_beamformer(rd, w).values()));
  }
  const double peak = *std::max_element(curve.energy.begin(), curve.energy.end());
  for (double e : curve.energy) curve.energy_db.push_back(to_db(e / peak));
  return curve;
}

double rejection_db(const ComplexGrid& conv_map, const ComplexGrid& mvdr_map, const CellMask* excluded) {
  if (conv_map.rows() != mvdr_map.rows() || conv_map.cols() != mvdr_map.cols()) {
    throw ContractError("rejection_db: map shapes differ");
  }
  if (excluded && (excluded->rows() != conv_map.rows() || excluded->cols() != conv_map.cols())) {
    throw ContractError("rejection_db: mask shape differs from the maps");
  }
  double conv = 0.0;
  double adapt = 0.0;
  std::size_t count = 0;
  for (std::size_t r = 0; r < conv_map.rows(); ++r) {
    for (std::size_t d = 0; d < conv_map.cols(); ++d) {
      if (excluded && (*excluded)(r, d) != 0) continue;
      conv += std::norm(conv_map(r, d));
      adapt += std::norm(mvdr_map(r, d));
      ++count;
    }
  }
  if (count == 0) throw ContractError("rejection_db: measurement region is empty");
  if (!(adapt > 0.0)) throw NumericalError("rejection_db: adaptive map power is zero");
  return to_db(conv / adapt);
}

}  // namespace aesa
