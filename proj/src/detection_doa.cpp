#include "aesa/detection_doa.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace aesa {

double cfar_alpha(double pfa, std::size_t n_cells) {
  const auto n = static_cast<double>(n_cells);
  return n * (std::pow(pfa, -1.0 / n) - 1.0);
}

std::vector<Detection> cfar_detect(const RealGrid& power, const CfarConfig& cfg, std::span<const double> range_axis_m,
                                   std::span<const double> doppler_axis_mps) {
  if (!(cfg.pfa > 0.0 && cfg.pfa < 1.0)) throw ConfigError("cfar: pfa must lie in (0, 1)");
  if (cfg.n_train == 0) throw ConfigError("cfar: n_train must be positive");
  const std::size_t n_range = power.rows();
  const std::size_t n_dop = power.cols();
  if (2 * (cfg.n_train + cfg.n_guard) + 1 > n_range) {
    throw ConfigError("cfar: training window of " + std::to_string(2 * (cfg.n_train + cfg.n_guard) + 1) +
                      " cells exceeds the " + std::to_string(n_range) + " range bins of the map");
  }
  std::vector<double> alpha(2 * cfg.n_train + 1, 0.0);
  for (std::size_t n = 1; n < alpha.size(); ++n) alpha[n] = cfar_alpha(cfg.pfa, n);

  std::vector<Detection> out;
  std::vector<double> prefix(n_range + 1);
  const auto n_r = static_cast<long long>(n_range);
  const auto g = static_cast<long long>(cfg.n_guard);
  const auto t = static_cast<long long>(cfg.n_train);
  for (std::size_t d = 0; d < n_dop; ++d) {
    prefix[0] = 0.0;
    for (std::size_t r = 0; r < n_range; ++r) prefix[r + 1] = prefix[r] + power(r, d);
    auto window_sum = [&](long long lo, long long hi) -> std::pair<double, std::size_t> {
      lo = std::max(lo, 0LL);
      hi = std::min(hi, n_r - 1);
      if (lo > hi) return {0.0, 0};
      return {prefix[static_cast<std::size_t>(hi + 1)] - prefix[static_cast<std::size_t>(lo)],
              static_cast<std::size_t>(hi - lo + 1)};
    };
    for (long long r = 0; r < n_r; ++r) {
      const double p = power(static_cast<std::size_t>(r), d);
      if (r > 0 && !(p > power(static_cast<std::size_t>(r - 1), d))) continue;
      if (r + 1 < n_r && p < power(static_cast<std::size_t>(r + 1), d)) continue;
      const auto [s_lead, n_lead] = window_sum(r - g - t, r - g - 1);
      const auto [s_lag, n_lag] = window_sum(r + g + 1, r + g + t);
      const std::size_t n = n_lead + n_lag;
      if (n == 0) continue;
      const double threshold = alpha[n] * (s_lead + s_lag) / static_cast<double>(n);
      if (!(p > threshold)) continue;
      Detection det;
      det.range_bin = static_cast<std::size_t>(r);
      det.column = d;
      det.doppler_bin = static_cast<long long>(d) - static_cast<long long>(n_dop / 2);
      if (!range_axis_m.empty()) det.range_m = range_axis_m[det.range_bin];
      if (!doppler_axis_mps.empty()) det.radial_velocity_mps = doppler_axis_mps[d];
      det.peak_power_db = to_db(p);
      det.threshold_db = to_db(threshold);
      out.push_back(det);
    }
  }
  return out;
}

std::vector<Detection> cfar_detect(const RealGrid& power, const CfarConfig& cfg, const RDDatacube& axes_from) {
  if (power.rows() != axes_from.n_range_bins() || power.cols() != axes_from.n_doppler_bins()) {
    throw ContractError("cfar_detect: map shape differs from the datacube");
  }
  return cfar_detect(power, cfg, axes_from.range_axis_m, axes_from.doppler_axis_mps);
}

TrainingSubset select_training_subset(const RDDatacube& rd, const Detection& detection, const DoaWindow& window,
                                      const CellMask* clutter_mask) {
  if (detection.range_bin >= rd.n_range_bins() || detection.column >= rd.n_doppler_bins()) {
    throw ContractError("select_training_subset: detection lies outside the datacube");
  }
  TrainingRegion region;
  region.range_begin = detection.range_bin >= window.range_half ? detection.range_bin - window.range_half : 0;
  region.range_end = std::min(rd.n_range_bins(), detection.range_bin + window.range_half + 1);
  region.doppler_begin = detection.column >= window.doppler_half ? detection.column - window.doppler_half : 0;
  region.doppler_end = std::min(rd.n_doppler_bins(), detection.column + window.doppler_half + 1);
  if (window.guard_range_half > 0 || window.guard_doppler_half > 0) {
    region.guards.push_back({detection.range_bin, detection.column, window.guard_range_half, window.guard_doppler_half});
  }
  if (clutter_mask != nullptr) region.excluded = *clutter_mask;
  region.min_snapshots = window.min_snapshots;
  TrainingSubset subset;
  subset.snapshots = gather_snapshots(rd, region);
  subset.count = static_cast<std::size_t>(subset.snapshots.cols());
  return subset;
}

MusicSpectrum music_spectrum(const CovarianceEstimate& cov, const ArrayGeometry& geometry,
                             std::span<const double> az_grid_deg, std::size_t n_sources) {
  const Eigen::MatrixXcd& r = cov.matrix;
  const auto n = static_cast<std::size_t>(r.rows());
  if (r.rows() != r.cols() || n != geometry.n_subarrays()) throw ContractError("music: covariance dimension mismatch");
  if (n_sources < 1 || n_sources >= n) {
    throw ContractError("music: n_sources must lie in [1, " + std::to_string(n - 1) + "]");
  }
  const double scale = r.cwiseAbs().maxCoeff();
  if (!((r - r.adjoint()).cwiseAbs().maxCoeff() <= 1e-10 * scale)) {
    throw ContractError("music: covariance matrix is not Hermitian");
  }
  if (az_grid_deg.empty()) throw ContractError("music: empty azimuth grid");
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(r);
  const Eigen::MatrixXcd noise = eig.eigenvectors().leftCols(static_cast<Eigen::Index>(n - n_sources));

  MusicSpectrum s;
  s.n_sources = n_sources;
  s.az_grid_deg.assign(az_grid_deg.begin(), az_grid_deg.end());
  s.pseudo_spectrum.reserve(az_grid_deg.size());
  for (double az : az_grid_deg) {
    const Eigen::VectorXcd v = subarray_steering(geometry, az).values;
    const double proj = (noise.adjoint() * v).squaredNorm();
    s.pseudo_spectrum.push_back(1.0 / std::max(proj, 1e-30 * v.squaredNorm()));
  }
  return s;
}

PeakPick pick_peaks(std::span<const double> az, std::span<const double> values, std::size_t k) {
  if (k == 0) throw ContractError("pick_peaks: k must be >= 1");
  if (az.size() != values.size()) throw ContractError("pick_peaks: grid and value lengths differ");
  std::vector<std::size_t> maxima;
  for (std::size_t i = 1; i + 1 < values.size(); ++i) {
    if (values[i] > values[i - 1] && values[i] >= values[i + 1]) maxima.push_back(i);
  }
  std::stable_sort(maxima.begin(), maxima.end(), [&](std::size_t a, std::size_t b) {
    if (values[a] != values[b]) return values[a] > values[b];
    return std::abs(az[a]) < std::abs(az[b]);
  });
  PeakPick out;
  out.complete = maxima.size() >= k;
  maxima.resize(std::min(k, maxima.size()));
  for (std::size_t i : maxima) {
    const double ym = values[i - 1];
    const double y0 = values[i];
    const double yp = values[i + 1];
    const double curvature = ym - 2.0 * y0 + yp;
    double offset = 0.0;
    if (curvature < 0.0) offset = std::clamp(0.5 * (ym - yp) / curvature, -0.5, 0.5);
    const double step = 0.5 * (az[i + 1] - az[i - 1]);
    out.azimuth_deg.push_back(az[i] + offset * step);
    out.value.push_back(y0 - 0.25 * (ym - yp) * offset);
  }
  return out;
}

PeakPick pick_peaks(const MusicSpectrum& spectrum, std::size_t k) {
  return pick_peaks(spectrum.az_grid_deg, spectrum.pseudo_spectrum, k);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    fields.push_back(b == std::string::npos ? std::string{} : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

std::vector<GroundTruthTrack> parse_tracks_csv(const std::string& text) {
  static const std::vector<std::string> kColumns = {"timestamp",   "name",     "range_m", "azimuth_deg",
                                                    "heading_deg", "length_m", "beam_m"};
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::map<std::string, std::size_t> index;
  std::vector<GroundTruthTrack> tracks;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_csv_line(line);
    if (index.empty()) {
      for (std::size_t i = 0; i < fields.size(); ++i) index[fields[i]] = i;
      for (const auto& col : kColumns) {
        if (!index.contains(col)) throw ConfigError("track file: header lacks column '" + col + "'");
      }
      continue;
    }
    auto get = [&](const std::string& col) -> const std::string& {
      const std::size_t i = index.at(col);
      if (i >= fields.size()) throw ConfigError("track file line " + std::to_string(line_no) + ": missing " + col);
      return fields[i];
    };
    auto number = [&](const std::string& col) {
      const std::string& s = get(col);
      try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
      } catch (const std::exception&) {
        throw ConfigError("track file line " + std::to_string(line_no) + ": malformed " + col + " '" + s + "'");
      }
    };
    GroundTruthTrack t;
    t.timestamp = get("timestamp");
    t.name = get("name");
    t.range_m = number("range_m");
    t.azimuth_deg = number("azimuth_deg");
    t.heading_deg = number("heading_deg");
    t.length_m = number("length_m");
    t.beam_m = number("beam_m");
    if (!(t.beam_m > 0.0) || t.length_m < t.beam_m) {
      throw ConfigError("track file line " + std::to_string(line_no) + ": need length_m >= beam_m > 0");
    }
    tracks.push_back(std::move(t));
  }
  if (index.empty()) throw ConfigError("track file: empty");
  return tracks;
}

std::vector<GroundTruthTrack> read_tracks_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open track file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_tracks_csv(ss.str());
}

double angular_error(double estimate_deg, double truth_deg) {
  double d = std::fmod(std::abs(estimate_deg - truth_deg), 360.0);
  if (d > 180.0) d = 360.0 - d;
  return d;
}

double angular_error(double estimate_deg, const GroundTruthTrack& truth) {
  return angular_error(estimate_deg, truth.azimuth_deg);
}

AngularSpan angular_span_from_projection(double projected_m, double range_m, std::optional<double> error_deg,
                                         double quantum_deg) {
  if (!(range_m > 0.0)) throw DomainError("angular span: range must be positive");
  if (projected_m < 0.0) throw DomainError("angular span: projected size must be non-negative");
  AngularSpan s;
  s.projected_size_m = projected_m;
  s.span_deg = rad_to_deg(2.0 * std::atan(projected_m / (2.0 * range_m)));
  if (error_deg) s.within = *error_deg <= s.span_deg + 0.5 * quantum_deg;
  return s;
}

AngularSpan target_angular_span(const GroundTruthTrack& track, double radar_los_azimuth_deg,
                                std::optional<double> error_deg, double quantum_deg) {
  const double aspect = deg_to_rad(track.heading_deg - radar_los_azimuth_deg);
  const double projected = std::max(track.length_m * std::abs(std::sin(aspect)), track.beam_m);
  return angular_span_from_projection(projected, track.range_m, error_deg, quantum_deg);
}

}  // namespace aesa
