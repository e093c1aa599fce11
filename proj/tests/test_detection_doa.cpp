#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "aesa/detection_doa.hpp"
#include "aesa/scene_sim.hpp"
#include "oracles.hpp"

using namespace aesa;

namespace {

const ArrayGeometry kGeom = ArrayGeometry::demonstrator(0.03);

Eigen::VectorXcd phase_vec(double az) {
  const auto v = oracle::subarray_phase(0.03, az);
  Eigen::VectorXcd out(6);
  for (int i = 0; i < 6; ++i) out(i) = v[static_cast<std::size_t>(i)];
  return out;
}

RealGrid exponential_map(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::exponential_distribution<double> e(1.0);
  RealGrid g(rows, cols);
  for (double& x : g.values()) x = e(eng);
  return g;
}

RDDatacube noise_rd(std::size_t n_range, std::size_t n_dop, std::uint64_t seed) {
  RDDatacube rd;
  rd.values = ComplexCube(6, n_range, n_dop);
  oracle::Noise gen(seed);
  for (cplx& x : rd.values.values()) x = gen(1.0);
  return rd;
}

}  // namespace

TEST(Cfar, AlphaMatchesClosedForm) {
  EXPECT_NEAR(cfar_alpha(1e-4, 32), 32.0 * (std::pow(1e-4, -1.0 / 32.0) - 1.0), 1e-12);
  // Large-N limit approaches -ln(pfa).
  EXPECT_NEAR(cfar_alpha(1e-3, 1000000), -std::log(1e-3), 1e-3);
}

TEST(Cfar, FalseAlarmRateOnExponentialNoise) {
  const CfarConfig cfg{1e-3, 16, 2};
  const auto map = exponential_map(2000, 1000, 1);
  const auto dets = cfar_detect(map, cfg);
  const double rate = static_cast<double>(dets.size()) / static_cast<double>(map.size());
  EXPECT_NEAR(rate / cfg.pfa, 1.0, 0.15);
}

TEST(Cfar, SinglePeakIsTheOnlyDetection) {
  RealGrid map(100, 8, 1.0);
  map(40, 3) = 1e4;
  const auto dets = cfar_detect(map, CfarConfig{});
  ASSERT_EQ(dets.size(), 1u);
  EXPECT_EQ(dets[0].range_bin, 40u);
  EXPECT_EQ(dets[0].column, 3u);
  EXPECT_EQ(dets[0].doppler_bin, -1);
  EXPECT_NEAR(dets[0].peak_power_db, 40.0, 1e-12);
  EXPECT_TRUE(cfar_detect(RealGrid(100, 8), CfarConfig{}).empty());
}

TEST(Cfar, ScaleInvariant) {
  auto map = exponential_map(300, 16, 2);
  map(150, 5) = 200.0;
  const auto a = cfar_detect(map, CfarConfig{1e-3, 16, 2});
  for (double& x : map.values()) x *= 37.5;
  const auto b = cfar_detect(map, CfarConfig{1e-3, 16, 2});
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].range_bin, b[i].range_bin);
    EXPECT_EQ(a[i].column, b[i].column);
  }
}

TEST(Cfar, InvalidConfigurations) {
  const RealGrid map(30, 4, 1.0);
  EXPECT_THROW(cfar_detect(map, CfarConfig{1e-4, 16, 2}), ConfigError);  // 37-cell window
  EXPECT_THROW(cfar_detect(map, CfarConfig{0.0, 4, 1}), ConfigError);
  EXPECT_THROW(cfar_detect(map, CfarConfig{1.0, 4, 1}), ConfigError);
  EXPECT_THROW(cfar_detect(map, CfarConfig{1e-4, 0, 1}), ConfigError);
}

TEST(TrainingSubset, WindowMinusGuard) {
  const auto rd = noise_rd(60, 64, 3);
  Detection det;
  det.range_bin = 30;
  det.column = 32;
  const DoaWindow w{10, 10, 3, 3, 0};
  const auto sub = select_training_subset(rd, det, w);
  EXPECT_EQ(sub.count, 21u * 21u - 7u * 7u);

  // Exclude the rows after the detection: 10 rows x 21 columns, of which 3 x 7 were guard cells.
  CellMask half(60, 64);
  for (std::size_t r = 31; r < 60; ++r)
    for (std::size_t c = 0; c < 64; ++c) half(r, c) = 1;
  EXPECT_EQ(select_training_subset(rd, det, w, &half).count, 392u - (210u - 21u));

  // Every snapshot is the channel vector of its cell.
  const auto plain = select_training_subset(rd, det, DoaWindow{0, 1, 0, 0, 1});
  ASSERT_EQ(plain.count, 3u);
  for (int c = 0; c < 6; ++c) EXPECT_EQ(plain.snapshots(c, 1), rd.values(static_cast<std::size_t>(c), 30, 32));

  CellMask full(60, 64, 1);
  EXPECT_THROW(select_training_subset(rd, det, w, &full), EstimationError);
  det.range_bin = 60;
  EXPECT_THROW(select_training_subset(rd, det, w), ContractError);
}

TEST(TrainingSubset, ClipsAtEdges) {
  const auto rd = noise_rd(60, 64, 4);
  Detection det;  // corner cell
  EXPECT_EQ(select_training_subset(rd, det, DoaWindow{4, 4, 0, 0, 0}).count, 25u);
}

TEST(Music, NoiselessSingleSourceIsExact) {
  CovarianceEstimate cov;
  const Eigen::VectorXcd a = phase_vec(7.3);
  cov.matrix = 5.0 * a * a.adjoint();
  const auto grid = make_grid(-22.5, 22.5, 0.05);
  const auto spec = music_spectrum(cov, kGeom, grid, 1);
  const auto peaks = pick_peaks(spec, 1);
  ASSERT_TRUE(peaks.complete);
  EXPECT_NEAR(peaks.azimuth_deg[0], 7.3, 1e-6);
}

TEST(Music, ResolvesTwoSourcesAndSubspaceIsOrthogonal) {
  CovarianceEstimate cov;
  const Eigen::VectorXcd a = phase_vec(-10.0), b = phase_vec(10.0);
  cov.matrix = 3.0 * a * a.adjoint() + 1.0 * b * b.adjoint();
  const auto grid = make_grid(-22.5, 22.5, 0.05);
  const auto spec = music_spectrum(cov, kGeom, grid, 2);
  const auto peaks = pick_peaks(spec, 2);
  ASSERT_TRUE(peaks.complete);
  std::vector<double> az = peaks.azimuth_deg;
  std::sort(az.begin(), az.end());
  EXPECT_NEAR(az[0], -10.0, 1e-3);
  EXPECT_NEAR(az[1], 10.0, 1e-3);

  // ||E_n^H v||^2 = 1 / P at the true angles (grid points).
  for (double truth : {-10.0, 10.0}) {
    const auto idx = static_cast<std::size_t>(std::lround((truth + 22.5) / 0.05));
    ASSERT_NEAR(grid[idx], truth, 1e-9);
    EXPECT_LT(std::sqrt(1.0 / spec.pseudo_spectrum[idx]), 1e-8);
  }
}

TEST(Music, ConvergesWithManySnapshots) {
  // 10 dB per-channel SNR, 1e4 snapshots, 100 trials at broadside.
  const auto grid = make_grid(-22.5, 22.5, 0.05);
  const Eigen::VectorXcd a = phase_vec(0.0);
  double sq = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    oracle::Noise gen(1000 + static_cast<std::uint64_t>(trial));
    SnapshotMatrix x(6, 10000);
    for (Eigen::Index k = 0; k < x.cols(); ++k) {
      const cplx s = gen(10.0);
      for (Eigen::Index c = 0; c < 6; ++c) x(c, k) = s * a(c) + gen(1.0);
    }
    const auto peaks = pick_peaks(music_spectrum(estimate_covariance(x, std::nullopt), kGeom, grid, 1), 1);
    sq += peaks.azimuth_deg[0] * peaks.azimuth_deg[0];
  }
  EXPECT_LT(std::sqrt(sq / 100.0), 0.1);
}

TEST(Music, ContractErrors) {
  CovarianceEstimate cov;
  cov.matrix = Eigen::MatrixXcd::Identity(6, 6);
  cov.matrix(0, 1) = cplx{0.5, 0.0};
  const std::vector<double> grid{0.0};
  EXPECT_THROW(music_spectrum(cov, kGeom, grid, 1), ContractError);
  cov.matrix = Eigen::MatrixXcd::Identity(6, 6);
  EXPECT_THROW(music_spectrum(cov, kGeom, grid, 0), ContractError);
  EXPECT_THROW(music_spectrum(cov, kGeom, grid, 6), ContractError);
  EXPECT_THROW(music_spectrum(cov, kGeom, std::vector<double>{}, 1), ContractError);
  cov.matrix = Eigen::MatrixXcd::Identity(4, 4);
  EXPECT_THROW(music_spectrum(cov, kGeom, grid, 1), ContractError);
}

TEST(PickPeaks, ParabolicVertexOnQuadratic) {
  const auto grid = make_grid(-5.0, 5.0, 0.1);
  std::vector<double> y;
  for (double x : grid) y.push_back(4.0 - (x - 1.234) * (x - 1.234));
  const auto p = pick_peaks(grid, y, 1);
  EXPECT_NEAR(p.azimuth_deg[0], 1.234, 1e-6);
  EXPECT_NEAR(p.value[0], 4.0, 1e-9);
}

TEST(PickPeaks, OrderingTiesAndIncomplete) {
  const std::vector<double> az{-3, -2, -1, 0, 1, 2, 3};
  const std::vector<double> y{0, 5, 0, 1, 0, 5, 0};
  const auto p = pick_peaks(az, y, 3);
  ASSERT_EQ(p.azimuth_deg.size(), 3u);
  EXPECT_TRUE(p.complete);
  EXPECT_NEAR(std::abs(p.azimuth_deg[0]), 2.0, 1e-12);
  EXPECT_NEAR(std::abs(p.azimuth_deg[1]), 2.0, 1e-12);
  EXPECT_NEAR(p.azimuth_deg[2], 0.0, 1e-12);

  const std::vector<double> tie_az{-3, -2, -1, 0, 1, 2};
  const std::vector<double> tie_y{0, 5, 0, 0, 5, 0};
  EXPECT_NEAR(pick_peaks(tie_az, tie_y, 1).azimuth_deg[0], 1.0, 1e-12);  // smaller |az| wins

  const auto q = pick_peaks(az, std::vector<double>{0, 1, 2, 3, 2, 1, 0}, 2);
  EXPECT_FALSE(q.complete);
  EXPECT_EQ(q.azimuth_deg.size(), 1u);
  EXPECT_THROW(pick_peaks(az, y, 0), ContractError);
  EXPECT_THROW(pick_peaks(az, std::vector<double>{1, 2}, 1), ContractError);
}

TEST(AngularError, WrapsToHalfCircle) {
  EXPECT_EQ(angular_error(5.0, 5.0), 0.0);
  EXPECT_NEAR(angular_error(179.0, -179.0), 2.0, 1e-12);
  EXPECT_NEAR(angular_error(-90.0, 270.0), 0.0, 1e-12);
  GroundTruthTrack t;
  t.azimuth_deg = 10.0;
  EXPECT_NEAR(angular_error(9.9, t), 0.1, 1e-12);
}

struct SessionRow {
  const char* name;
  double range_km, size_m, heading_deg, projected_m, span_deg, error_deg;
  bool within;
};

// Printed session table; sizes with asterisks are beam-floored.
const SessionRow kSessions[] = {
    {"Eurocargo Genova", 10.15, 200, 9.1, 178, 1.0, 0.1, true},
    {"Mega Express", 7.68, 176, 35.3, 105, 0.8, 0.1, true},
    {"Mega Express (parallel)", 8.22, 25, 221.2, 25, 0.2, 0.9, false},
    {"Rossetti", 15.78, 8, 254.0, 8, 0.03, 0.2, false},
    {"Stelio Montomoli", 6.82, 93, 36.0, 55, 0.5, 0.2, true},
    {"Zeus Palace", 13.42, 212, 200.8, 165, 0.7, 0.4, true},
    {"Mega Smeralda", 8.01, 171, 37.7, 96, 0.7, 0.2, true},
    {"Epaminondas", 12.57, 43, 32.5, 43, 0.2, 0.2, true},
};

TEST(AngularSpan, SessionTableRows) {
  for (const auto& row : kSessions) {
    const auto s = angular_span_from_projection(row.projected_m, row.range_km * 1000.0, row.error_deg);
    const double oracle_span = 2.0 * std::atan(row.projected_m / (2.0 * row.range_km * 1000.0)) * 180.0 / oracle::kPi;
    EXPECT_NEAR(s.span_deg, oracle_span, 1e-12) << row.name;
    EXPECT_NEAR(s.span_deg, row.span_deg, 0.1) << row.name;
    ASSERT_TRUE(s.within.has_value());
    EXPECT_EQ(*s.within, row.within) << row.name;
  }
}

TEST(AngularSpan, ProjectionAndBeamFloor) {
  GroundTruthTrack t;
  t.range_m = 10000.0;
  t.length_m = 200.0;
  t.beam_m = 30.0;
  t.heading_deg = 90.0;
  EXPECT_NEAR(target_angular_span(t, 0.0).projected_size_m, 200.0, 1e-9);
  EXPECT_NEAR(target_angular_span(t, 60.0).projected_size_m, 100.0, 1e-9);
  EXPECT_NEAR(target_angular_span(t, 90.0).projected_size_m, 30.0, 1e-9);   // parallel: beam
  EXPECT_NEAR(target_angular_span(t, 270.0).projected_size_m, 30.0, 1e-9);  // reciprocal
  EXPECT_FALSE(target_angular_span(t, 0.0).within.has_value());
  EXPECT_EQ(angular_span_from_projection(0.0, 5000.0).span_deg, 0.0);
  EXPECT_THROW(angular_span_from_projection(10.0, 0.0), DomainError);
  EXPECT_THROW(angular_span_from_projection(-1.0, 100.0), DomainError);
}

TEST(AngularSpan, Monotonic) {
  double prev = -1.0;
  for (double p = 0.0; p <= 500.0; p += 10.0) {
    const double s = angular_span_from_projection(p, 9000.0).span_deg;
    EXPECT_GT(s, prev);
    prev = s;
  }
  prev = 1e9;
  for (double r = 1000.0; r <= 20000.0; r += 500.0) {
    const double s = angular_span_from_projection(100.0, r).span_deg;
    EXPECT_LT(s, prev);
    prev = s;
  }
}

TEST(Tracks, ParsesAndRejectsMalformedFiles) {
  const std::string header = "timestamp,name,range_m,azimuth_deg,heading_deg,length_m,beam_m\n";
  const auto t = parse_tracks_csv(header + "2024-05-01T10:00:00Z,Ship A,9300,5.5,300,120,20\n\n");
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t[0].name, "Ship A");
  EXPECT_EQ(t[0].azimuth_deg, 5.5);
  EXPECT_EQ(t[0].beam_m, 20.0);
  // Column order comes from the header.
  const auto u = parse_tracks_csv("name,beam_m,length_m,heading_deg,azimuth_deg,range_m,timestamp\nB,5,50,1,2,3,x\n");
  EXPECT_EQ(u[0].range_m, 3.0);
  EXPECT_EQ(u[0].timestamp, "x");

  EXPECT_THROW(parse_tracks_csv(""), ConfigError);
  EXPECT_THROW(parse_tracks_csv("timestamp,name,range_m\n"), ConfigError);
  EXPECT_THROW(parse_tracks_csv(header + "t,A,93x0,5,300,120,20\n"), ConfigError);
  EXPECT_THROW(parse_tracks_csv(header + "t,A,9300,5,300\n"), ConfigError);
  EXPECT_THROW(parse_tracks_csv(header + "t,A,9300,5,300,10,20\n"), ConfigError);
  EXPECT_THROW(read_tracks_csv("/nonexistent/tracks.csv"), ConfigError);
}
