#include <gtest/gtest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "aesa/beamforming.hpp"
#include "aesa/rd_processing.hpp"
#include "aesa/scene_sim.hpp"
#include "oracles.hpp"

using namespace aesa;

namespace {

const ArrayGeometry kGeom = ArrayGeometry::demonstrator(0.03);

SnapshotMatrix white_snapshots(std::size_t k, std::uint64_t seed, double power = 1.0) {
  oracle::Noise gen(seed);
  SnapshotMatrix x(6, static_cast<Eigen::Index>(k));
  for (Eigen::Index c = 0; c < 6; ++c)
    for (Eigen::Index i = 0; i < x.cols(); ++i) x(c, i) = gen(power);
  return x;
}

Eigen::VectorXcd to_eigen(const oracle::CVec& v) {
  Eigen::VectorXcd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

oracle::CMat to_oracle(const Eigen::MatrixXcd& m) {
  oracle::CMat out(static_cast<std::size_t>(m.rows()), oracle::CVec(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
  return out;
}

// I + jnr a a^H with a the element-summed subarray response.
CovarianceEstimate jammer_covariance(double az_deg, double jnr_db) {
  const Eigen::VectorXcd a = to_eigen(oracle::subarray_response(0.03, az_deg));
  CovarianceEstimate cov;
  cov.matrix = Eigen::MatrixXcd::Identity(6, 6) + from_db(jnr_db) * a * a.adjoint();
  cov.snapshot_count = 1000;
  return cov;
}

RDDatacube jammer_cube(std::uint64_t seed) {
  return doppler_process(range_compress(simulate_dwell({}, kGeom, {}, {21.4, 50.0, true}, 1.0, seed)));
}

}  // namespace

TEST(Covariance, SampleEstimateMatchesDirectSum) {
  const auto x = white_snapshots(200, 1);
  const auto cov = estimate_covariance(x, std::nullopt);
  for (Eigen::Index i = 0; i < 6; ++i) {
    for (Eigen::Index j = 0; j < 6; ++j) {
      cplx s{};
      for (Eigen::Index k = 0; k < x.cols(); ++k) s += x(i, k) * std::conj(x(j, k));
      EXPECT_LT(std::abs(cov.matrix(i, j) - s / 200.0), 1e-12);
    }
  }
  EXPECT_EQ(cov.snapshot_count, 200u);
  EXPECT_EQ(cov.diagonal_loading, 0.0);
}

TEST(Covariance, WhiteNoiseConvergesToIdentity) {
  // E||R - I||_F^2 = 36 / K; K = 4e4 leaves about 0.03.
  const auto cov = estimate_covariance(white_snapshots(40000, 2), std::nullopt);
  EXPECT_LT((cov.matrix - Eigen::MatrixXcd::Identity(6, 6)).norm(), 0.05);
}

TEST(Covariance, LoadingIsNoiseFloorTimesFactor) {
  const auto x = white_snapshots(500, 3);
  const auto bare = estimate_covariance(x, std::nullopt);
  const auto ev = oracle::hermitian_eigenvalues(to_oracle(bare.matrix));
  const auto loaded = estimate_covariance(x, 10.0);
  EXPECT_NEAR(loaded.noise_floor, ev.front(), 1e-10);
  EXPECT_NEAR(loaded.diagonal_loading, 10.0 * ev.front(), 1e-9);
  const Eigen::MatrixXcd diff = loaded.matrix - bare.matrix;
  EXPECT_LT((diff - loaded.diagonal_loading * Eigen::MatrixXcd::Identity(6, 6)).norm(), 1e-12);

  // Rank-one data with an explicit floor: R = P a a^H + floor * 10^(ld/10) I.
  const Eigen::VectorXcd a = to_eigen(oracle::subarray_phase(0.03, 12.0));
  SnapshotMatrix s(6, 4);
  const cplx amps[4] = {{2.0, 0.0}, {0.0, 2.0}, {-2.0, 0.0}, {0.0, -2.0}};
  for (Eigen::Index k = 0; k < 4; ++k) s.col(k) = amps[k] * a;
  const auto r1 = estimate_covariance(s, 3.0, 0.5);
  const Eigen::MatrixXcd want = 4.0 * a * a.adjoint() + 0.5 * from_db(3.0) * Eigen::MatrixXcd::Identity(6, 6);
  EXPECT_LT((r1.matrix - want).norm(), 1e-12);
}

TEST(Covariance, GatherHonoursGuardsMasksAndMinimum) {
  const auto rd = jammer_cube(4);
  const std::size_t all = rd.n_range_bins() * rd.n_doppler_bins();
  TrainingRegion region;
  EXPECT_EQ(static_cast<std::size_t>(gather_snapshots(rd, region).cols()), all);
  region.guards.push_back({100, 64, 3, 3});
  EXPECT_EQ(static_cast<std::size_t>(gather_snapshots(rd, region).cols()), all - 49);
  CellMask m(rd.n_range_bins(), rd.n_doppler_bins());
  for (std::size_t c = 0; c < rd.n_doppler_bins(); ++c) m(0, c) = 1;
  region.excluded = m;
  EXPECT_EQ(static_cast<std::size_t>(gather_snapshots(rd, region).cols()), all - 49 - rd.n_doppler_bins());

  TrainingRegion tiny;
  tiny.range_begin = 10;
  tiny.range_end = 11;
  tiny.doppler_begin = 0;
  tiny.doppler_end = 11;  // 11 snapshots < 12
  EXPECT_THROW(gather_snapshots(rd, tiny), EstimationError);
  tiny.doppler_end = 12;
  EXPECT_NO_THROW(gather_snapshots(rd, tiny));
}

TEST(Mvdr, MatchesGaussianEliminationOracle) {
  const auto cov = estimate_covariance(white_snapshots(30, 5), 0.0);
  for (double az : {-17.0, 0.0, 9.5}) {
    const oracle::CVec v = oracle::subarray_response(0.03, az);
    const oracle::CVec u = oracle::gauss_solve(to_oracle(cov.matrix), v);
    const cplx denom = oracle::inner(v, u);
    const Eigen::VectorXcd w = mvdr_distortionless(cov, to_eigen(v));
    for (std::size_t i = 0; i < 6; ++i) EXPECT_LT(std::abs(w(static_cast<Eigen::Index>(i)) - u[i] / denom), 1e-9);
    const auto unit = mvdr_weights(cov, kGeom, az);
    EXPECT_NEAR(unit.values.norm(), 1.0, 1e-12);
    EXPECT_NEAR(std::abs(unit.values.dot(w.normalized())), 1.0, 1e-12);
  }
}

TEST(Mvdr, WhiteCovarianceGivesConventionalWeights) {
  CovarianceEstimate cov;
  cov.matrix = 2.5 * Eigen::MatrixXcd::Identity(6, 6);
  for (double az : {-20.0, 3.0, 21.0}) {
    const auto m = mvdr_weights(cov, kGeom, az);
    const auto c = conventional_weights(kGeom, az);
    EXPECT_LT((m.values - c.values).norm(), 1e-10);
  }
}

TEST(Mvdr, DistortionlessAndNullsTheJammer) {
  const auto cov = jammer_covariance(21.4, 50.0);
  const Eigen::VectorXcd v = subarray_steering(kGeom, 0.0).values;
  const Eigen::VectorXcd w = mvdr_distortionless(cov, v);
  EXPECT_LT(std::abs(w.dot(v) - cplx{1.0, 0.0}), 1e-10);

  // Dense brute-force pattern through the element-level oracle.
  double best = 0.0, best_az = 0.0;
  for (double az = -60.0; az <= 60.0; az += 0.05) {
    const double p = std::norm(oracle::inner(oracle::CVec(w.data(), w.data() + 6), oracle::subarray_response(0.03, az)));
    if (p > best) {
      best = p;
      best_az = az;
    }
  }
  const double at_jammer =
      std::norm(oracle::inner(oracle::CVec(w.data(), w.data() + 6), oracle::subarray_response(0.03, 21.4)));
  EXPECT_LT(to_db(at_jammer / best), -40.0);
  EXPECT_LT(std::abs(best_az), 10.0);
  const auto lib = beampattern_linear(kGeom, w, std::vector<double>{21.4});
  EXPECT_NEAR(lib[0], at_jammer, 1e-12 + 1e-9 * at_jammer);
}

TEST(Mvdr, HeavyLoadingApproachesConventional) {
  const auto x = white_snapshots(50, 6);
  SnapshotMatrix y = x;
  const Eigen::VectorXcd a = to_eigen(oracle::subarray_phase(0.03, 15.0));
  for (Eigen::Index k = 0; k < y.cols(); ++k) y.col(k) += 30.0 * a * std::polar(1.0, 0.3 * static_cast<double>(k));
  const auto cov = estimate_covariance(y, 120.0);
  const auto m = mvdr_weights(cov, kGeom, -5.0);
  const auto c = conventional_weights(kGeom, -5.0);
  EXPECT_GT(std::abs(m.values.dot(c.values)), 1.0 - 1e-6);
}

TEST(Mvdr, IllConditionedOrMismatchedCovarianceThrows) {
  CovarianceEstimate cov;
  cov.matrix = Eigen::MatrixXcd::Identity(6, 6);
  cov.matrix(5, 5) = 1e-14;
  EXPECT_THROW(mvdr_weights(cov, kGeom, 0.0), NumericalError);
  cov.matrix = Eigen::MatrixXcd::Identity(5, 5);
  EXPECT_THROW(mvdr_weights(cov, kGeom, 0.0), ContractError);
}

TEST(Mvdr, DominantEigenvectorPointsAtJammer) {
  const auto rd = jammer_cube(7);
  const auto cov = estimate_covariance(rd, TrainingRegion{}, std::nullopt);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(cov.matrix);
  const Eigen::VectorXcd e = eig.eigenvectors().col(5);
  double best = 0.0, best_az = 0.0;
  for (double az = -30.0; az <= 30.0; az += 0.01) {
    const double p = std::norm(e.dot(to_eigen(oracle::subarray_phase(0.03, az))));
    if (p > best) {
      best = p;
      best_az = az;
    }
  }
  EXPECT_NEAR(best_az, 21.4, 0.5);
}

TEST(Beamform, SelectorWeightsReturnTheChannel) {
  const auto rd = jammer_cube(8);
  for (Eigen::Index k : {0, 3, 5}) {
    Eigen::VectorXcd w = Eigen::VectorXcd::Zero(6);
    w(k) = 1.0;
    const auto map = beamform(rd.values, w);
    for (std::size_t r = 0; r < rd.n_range_bins(); r += 17)
      for (std::size_t c = 0; c < rd.n_doppler_bins(); c += 5)
        EXPECT_EQ(map(r, c), rd.values(static_cast<std::size_t>(k), r, c));
  }
  EXPECT_THROW(beamform(rd.values, Eigen::VectorXcd::Zero(4)), ContractError);
}

TEST(Beamform, UnitNormWeightsPreserveNoisePower) {
  const auto rd = doppler_process(range_compress(simulate_dwell({}, kGeom, {}, {}, 2.0, 9)));
  for (double az : {0.0, 14.0}) {
    const auto p = power_map(apply_beamformer(rd, conventional_weights(kGeom, az)));
    double acc = 0.0;
    for (double x : p.values()) acc += x;
    EXPECT_NEAR(acc / static_cast<double>(p.size()) / 2.0, 1.0, 0.01);
  }
}

TEST(Beamscan, ConventionalPeaksAtJammer) {
  const auto rd = jammer_cube(10);
  // Lambda-spaced subarrays put an equal grating lobe at -39.4 deg, so stay within +-30.
  const auto grid = make_grid(-30.0, 30.0, 0.25);
  const auto curve = beamscan(rd, kGeom, grid, BeamMode::conventional);
  const auto it = std::max_element(curve.energy.begin(), curve.energy.end());
  EXPECT_NEAR(curve.az_grid_deg[static_cast<std::size_t>(it - curve.energy.begin())], 21.4, 0.5);
  EXPECT_NEAR(*std::max_element(curve.energy_db.begin(), curve.energy_db.end()), 0.0, 1e-12);
  EXPECT_THROW(beamscan(rd, kGeom, grid, BeamMode::mvdr), ContractError);

  const auto cov = estimate_covariance(rd, TrainingRegion{}, 10.0);
  const auto adaptive = beamscan(rd, kGeom, grid, BeamMode::mvdr, &cov);
  const std::size_t j = static_cast<std::size_t>(std::lround((21.5 + 30.0) / 0.25));
  EXPECT_LT(adaptive.energy[j], 1e-3 * curve.energy[j]);
}

TEST(Rejection, IdenticalMapsGiveZeroAndMatchesDirectSum) {
  ComplexGrid a(4, 5), b(4, 5);
  oracle::Noise gen(11);
  for (cplx& x : a.values()) x = gen(1.0);
  for (cplx& x : b.values()) x = gen(0.01);
  EXPECT_NEAR(rejection_db(a, a), 0.0, 1e-12);

  CellMask m(4, 5);
  m(0, 0) = m(3, 4) = 1;
  double pa = 0.0, pb = 0.0;
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t c = 0; c < 5; ++c) {
      if (m(r, c)) continue;
      pa += std::norm(a(r, c));
      pb += std::norm(b(r, c));
    }
  }
  EXPECT_NEAR(rejection_db(a, b, &m), 10.0 * std::log10(pa / pb), 1e-12);

  CellMask all(4, 5, 1);
  EXPECT_THROW(rejection_db(a, b, &all), ContractError);
  EXPECT_THROW(rejection_db(a, ComplexGrid(4, 5)), NumericalError);
  EXPECT_THROW(rejection_db(a, ComplexGrid(5, 4)), ContractError);
}
