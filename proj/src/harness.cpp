#include "aesa/harness.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "aesa/kernels.hpp"
#include "aesa/rng.hpp"
#include "json.hpp"

namespace aesa {
namespace {

using json = nlohmann::json;

std::string fmt(double v, int precision = 6) {
  if (!std::isfinite(v)) return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  std::string s = buf;
  if (s.find_first_not_of("-0.") == std::string::npos) s = s.substr(s[0] == '-' ? 1 : 0);  // no "-0.000"
  return s;
}

std::string steer_tag(double deg) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%+.1f", deg);
  return buf;
}

// ---------------------------------------------------------------- config IO

// Walks one JSON object, recording consumed keys so leftovers can be reported.
class Section {
 public:
  Section(const json* node, std::string path, std::vector<std::string>& unknown, std::vector<std::string>& errors)
      : node_(node), path_(std::move(path)), unknown_(unknown), errors_(errors) {}

  ~Section() {
    if (!node_ || !node_->is_object()) return;
    for (auto it = node_->begin(); it != node_->end(); ++it) {
      if (std::find(used_.begin(), used_.end(), it.key()) == used_.end()) unknown_.push_back(key_path(it.key()));
    }
  }

  Section(const Section&) = delete;
  Section& operator=(const Section&) = delete;

  const json* find(const std::string& key) {
    used_.push_back(key);
    if (!node_ || !node_->is_object()) return nullptr;
    auto it = node_->find(key);
    return it == node_->end() ? nullptr : &*it;
  }

  void number(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (v->is_number()) out = v->get<double>();
      else error(key, "expected a number");
    }
  }

  void optional_number(const std::string& key, std::optional<double>& out) {
    if (const json* v = find(key)) {
      if (v->is_null()) out.reset();
      else if (v->is_number()) out = v->get<double>();
      else error(key, "expected a number or null");
    }
  }

  void count(const std::string& key, std::size_t& out) {
    if (const json* v = find(key)) {
      if (v->is_number_unsigned()) out = v->get<std::size_t>();
      else error(key, "expected a non-negative integer");
    }
  }

  void seed(const std::string& key, std::uint64_t& out) {
    if (const json* v = find(key)) {
      if (v->is_number_unsigned()) out = v->get<std::uint64_t>();
      else error(key, "expected a non-negative integer");
    }
  }

  void flag(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (v->is_boolean()) out = v->get<bool>();
      else error(key, "expected true or false");
    }
  }

  void text(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (v->is_string()) out = v->get<std::string>();
      else error(key, "expected a string");
    }
  }

  void window(const std::string& key, Window& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) return error(key, "expected a window name");
      try {
        out = parse_window(v->get<std::string>());
      } catch (const ConfigError&) {
        error(key, "unknown window '" + v->get<std::string>() + "'");
      }
    }
  }

  void numbers(const std::string& key, std::vector<double>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) return error(key, "expected an array of numbers");
      std::vector<double> vals;
      for (const json& e : *v) {
        if (!e.is_number()) return error(key, "expected an array of numbers");
        vals.push_back(e.get<double>());
      }
      out = std::move(vals);
    }
  }

  /// Child object; absent keys give an empty section.
  const json* object(const std::string& key) {
    const json* v = find(key);
    if (v && !v->is_object()) {
      error(key, "expected an object");
      return nullptr;
    }
    return v;
  }

  const json* array(const std::string& key) {
    const json* v = find(key);
    if (v && !v->is_array()) {
      error(key, "expected an array");
      return nullptr;
    }
    return v;
  }

  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  void error(const std::string& key, const std::string& what) { errors_.push_back(key_path(key) + ": " + what); }

  std::vector<std::string>& unknown() { return unknown_; }
  std::vector<std::string>& errors() { return errors_; }

 private:
  const json* node_;
  std::string path_;
  std::vector<std::string>& unknown_;
  std::vector<std::string>& errors_;
  std::vector<std::string> used_;
};

void read_radar(Section& s, RadarParams& r) {
  s.number("wavelength", r.wavelength);
  s.number("bandwidth", r.bandwidth);
  s.number("pulse_width", r.pulse_width);
  s.number("prf", r.prf);
  s.count("n_pulses", r.n_pulses);
  s.number("sample_rate", r.sample_rate);
  s.number("r_min", r.r_min);
  s.number("r_max", r.r_max);
}

void read_target(Section& s, TargetConfig& t) {
  s.number("range_m", t.target.range_m);
  s.number("radial_velocity_mps", t.target.radial_velocity_mps);
  s.number("azimuth_deg", t.target.azimuth_deg);
  s.number("snr_db", t.target.snr_db);
  if (const json* v = s.object("vessel")) {
    Section vs(v, s.key_path("vessel"), s.unknown(), s.errors());
    vs.text("name", t.vessel.name);
    vs.number("length_m", t.vessel.length_m);
    vs.number("beam_m", t.vessel.beam_m);
    vs.number("heading_deg", t.vessel.heading_deg);
  }
}

void read_processing(Section& s, ProcessingConfig& p) {
  s.window("window", p.window);
  s.count("oversampling", p.oversampling);
  s.number("loading_db", p.loading_db);
  if (const json* v = s.object("cfar")) {
    Section c(v, s.key_path("cfar"), s.unknown(), s.errors());
    c.number("pfa", p.cfar.pfa);
    c.count("n_train", p.cfar.n_train);
    c.count("n_guard", p.cfar.n_guard);
  }
  if (const json* v = s.object("doa")) {
    Section d(v, s.key_path("doa"), s.unknown(), s.errors());
    d.count("range_half", p.doa.range_half);
    d.count("doppler_half", p.doa.doppler_half);
    d.count("guard_range_half", p.doa.guard_range_half);
    d.count("guard_doppler_half", p.doa.guard_doppler_half);
    d.count("min_snapshots", p.doa.min_snapshots);
  }
  s.number("doa_grid_step_deg", p.doa_grid_step_deg);
  s.number("doa_grid_limit_deg", p.doa_grid_limit_deg);
  s.count("n_sources", p.n_sources);
  s.count("training_guard", p.training_guard);
  s.number("beamscan_step_deg", p.beamscan_step_deg);
  s.count("monte_carlo_runs", p.monte_carlo_runs);
  s.number("association_range_m", p.association_range_m);
  s.count("merge_radius", p.merge_radius);
}

void read_isar(Section& s, IsarConfig& c) {
  if (const json* v = s.object("body")) {
    Section b(v, s.key_path("body"), s.unknown(), s.errors());
    if (const json* arr = b.array("scatterers")) {
      c.body.scatterers.clear();
      for (std::size_t i = 0; i < arr->size(); ++i) {
        const std::string path = b.key_path("scatterers") + "[" + std::to_string(i) + "]";
        if (!(*arr)[i].is_object()) {
          b.errors().push_back(path + ": expected an object");
          continue;
        }
        Scatterer sc;
        Section ss(&(*arr)[i], path, s.unknown(), s.errors());
        ss.number("down_range_m", sc.down_range_m);
        ss.number("cross_range_m", sc.cross_range_m);
        ss.number("amplitude", sc.amplitude);
        c.body.scatterers.push_back(sc);
      }
    }
    b.number("center_range_m", c.body.center_range_m);
    b.number("azimuth_deg", c.body.azimuth_deg);
    b.number("rotation_rate", c.body.rotation_rate);
    b.number("translational_velocity", c.body.translational_velocity);
    b.number("snr_db", c.body.snr_db);
    b.numbers("phase_error", c.body.phase_error);
  }
  s.count("n_dwells", c.n_dwells);
  s.count("half_width", c.half_width);
  if (const json* v = s.object("autofocus")) {
    Section a(v, s.key_path("autofocus"), s.unknown(), s.errors());
    a.count("order", c.autofocus.order);
    a.count("grid_points", c.autofocus.grid_points);
    a.number("max_edge_phase_rad", c.autofocus.max_edge_phase_rad);
    a.number("tolerance", c.autofocus.tolerance);
    a.count("max_iterations", c.autofocus.max_iterations);
    a.window("window", c.autofocus.window);
  }
  s.optional_number("omega", c.omega);
  s.number("omega_scale", c.omega_scale);
  s.window("image_window", c.image_window);
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["mode"] = std::string(mode_name(c.mode));
  j["seed"] = c.seed;
  j["adaptive"] = c.adaptive;
  j["steering_deg"] = c.steering_deg;
  j["noise_power"] = c.noise_power;
  j["radar_heading_deg"] = c.radar_heading_deg;
  j["ground_truth"] = c.ground_truth;
  const RadarParams& r = c.radar;
  j["radar"] = {{"wavelength", r.wavelength}, {"bandwidth", r.bandwidth},   {"pulse_width", r.pulse_width},
                {"prf", r.prf},               {"n_pulses", r.n_pulses},     {"sample_rate", r.sample_rate},
                {"r_min", r.r_min},           {"r_max", r.r_max}};
  j["targets"] = json::array();
  for (const TargetConfig& t : c.targets) {
    j["targets"].push_back({{"range_m", t.target.range_m},
                            {"radial_velocity_mps", t.target.radial_velocity_mps},
                            {"azimuth_deg", t.target.azimuth_deg},
                            {"snr_db", t.target.snr_db},
                            {"vessel",
                             {{"name", t.vessel.name},
                              {"length_m", t.vessel.length_m},
                              {"beam_m", t.vessel.beam_m},
                              {"heading_deg", t.vessel.heading_deg}}}});
  }
  j["jammer"] = {{"azimuth_deg", c.jammer.azimuth_deg}, {"jnr_db", c.jammer.jnr_db}, {"active", c.jammer.active}};
  j["clutter"] = {
      {"enabled", c.clutter.enabled}, {"n_range_bins", c.clutter.n_range_bins}, {"cnr_db", c.clutter.cnr_db}};
  const ProcessingConfig& p = c.processing;
  j["processing"] = {
      {"window", std::string(window_name(p.window))},
      {"oversampling", p.oversampling},
      {"loading_db", p.loading_db},
      {"cfar", {{"pfa", p.cfar.pfa}, {"n_train", p.cfar.n_train}, {"n_guard", p.cfar.n_guard}}},
      {"doa",
       {{"range_half", p.doa.range_half},
        {"doppler_half", p.doa.doppler_half},
        {"guard_range_half", p.doa.guard_range_half},
        {"guard_doppler_half", p.doa.guard_doppler_half},
        {"min_snapshots", p.doa.min_snapshots}}},
      {"doa_grid_step_deg", p.doa_grid_step_deg},
      {"doa_grid_limit_deg", p.doa_grid_limit_deg},
      {"n_sources", p.n_sources},
      {"training_guard", p.training_guard},
      {"beamscan_step_deg", p.beamscan_step_deg},
      {"monte_carlo_runs", p.monte_carlo_runs},
      {"association_range_m", p.association_range_m},
      {"merge_radius", p.merge_radius}};
  const IsarConfig& is = c.isar;
  json scat = json::array();
  for (const Scatterer& s : is.body.scatterers) {
    scat.push_back({{"down_range_m", s.down_range_m}, {"cross_range_m", s.cross_range_m}, {"amplitude", s.amplitude}});
  }
  j["isar"] = {{"body",
                {{"scatterers", scat},
                 {"center_range_m", is.body.center_range_m},
                 {"azimuth_deg", is.body.azimuth_deg},
                 {"rotation_rate", is.body.rotation_rate},
                 {"translational_velocity", is.body.translational_velocity},
                 {"snr_db", is.body.snr_db},
                 {"phase_error", is.body.phase_error}}},
               {"n_dwells", is.n_dwells},
               {"half_width", is.half_width},
               {"autofocus",
                {{"order", is.autofocus.order},
                 {"grid_points", is.autofocus.grid_points},
                 {"max_edge_phase_rad", is.autofocus.max_edge_phase_rad},
                 {"tolerance", is.autofocus.tolerance},
                 {"max_iterations", is.autofocus.max_iterations},
                 {"window", std::string(window_name(is.autofocus.window))}}},
               {"omega", is.omega ? json(*is.omega) : json(nullptr)},
               {"omega_scale", is.omega_scale},
               {"image_window", std::string(window_name(is.image_window))}};
  return j;
}

std::string join(const std::vector<std::string>& items, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? sep : "") + items[i];
  return out;
}

// ---------------------------------------------------------------- processing helpers

std::vector<Detection> detect_on(const ComplexGrid& map, const RDDatacube& rd, const ProcessingConfig& proc) {
  return merge_detections(cfar_detect(power_map(map), proc.cfar, rd), proc.merge_radius);
}

bool near_cell(const Detection& d, const RdCell& cell, std::size_t radius) {
  const auto dr = static_cast<long long>(d.range_bin) - static_cast<long long>(cell.range_bin);
  const auto dc = static_cast<long long>(d.column) - static_cast<long long>(cell.column);
  return std::llabs(dr) <= static_cast<long long>(radius) && std::llabs(dc) <= static_cast<long long>(radius);
}

std::vector<GuardBox> guards_for(const std::vector<Detection>& dets, std::size_t half) {
  std::vector<GuardBox> g;
  for (const Detection& d : dets) g.push_back({d.range_bin, d.column, half, half});
  return g;
}

// MVDR for one steering angle: train with guards around conventional-map
// detections, then add guards around detections that appear once the jammer is
// suppressed and train again.
struct AdaptiveBeam {
  ComplexGrid map;
  BeamformerWeights weights;
  CovarianceEstimate covariance;
  std::vector<GuardBox> guards;
  std::vector<Detection> detections;
};

AdaptiveBeam adaptive_beam(const RDDatacube& rd, const ArrayGeometry& geometry, double steer,
                           const std::vector<Detection>& conv_dets, const std::optional<CellMask>& clutter,
                           const ProcessingConfig& proc) {
  TrainingRegion region;
  region.guards = guards_for(conv_dets, proc.training_guard);
  region.excluded = clutter;
  AdaptiveBeam beam;
  beam.covariance = estimate_covariance(rd, region, proc.loading_db);
  beam.weights = mvdr_weights(beam.covariance, geometry, steer);
  beam.map = apply_beamformer(rd, beam.weights);
  beam.detections = detect_on(beam.map, rd, proc);

  std::vector<Detection> extra;
  for (const Detection& d : beam.detections) {
    const bool guarded = std::any_of(region.guards.begin(), region.guards.end(), [&](const GuardBox& g) {
      return near_cell(d, {g.range_bin, g.column}, proc.training_guard);
    });
    if (!guarded) extra.push_back(d);
  }
  if (!extra.empty()) {
    for (const GuardBox& g : guards_for(extra, proc.training_guard)) region.guards.push_back(g);
    beam.covariance = estimate_covariance(rd, region, proc.loading_db);
    beam.weights = mvdr_weights(beam.covariance, geometry, steer);
    beam.map = apply_beamformer(rd, beam.weights);
    beam.detections = detect_on(beam.map, rd, proc);
  }
  beam.guards = std::move(region.guards);
  return beam;
}

std::vector<GroundTruthTrack> truth_tracks(const ExperimentConfig& cfg) {
  if (!cfg.ground_truth.empty()) return read_tracks_csv(cfg.ground_truth);
  std::vector<GroundTruthTrack> tracks;
  for (std::size_t i = 0; i < cfg.targets.size(); ++i) {
    const TargetConfig& t = cfg.targets[i];
    GroundTruthTrack g;
    g.name = t.vessel.name.empty() ? "target-" + std::to_string(i + 1) : t.vessel.name;
    g.range_m = t.target.range_m;
    g.azimuth_deg = t.target.azimuth_deg;
    g.heading_deg = t.vessel.heading_deg;
    g.length_m = t.vessel.length_m;
    g.beam_m = t.vessel.beam_m;
    tracks.push_back(g);
  }
  return tracks;
}

GridAxis range_axis(const RDDatacube& rd) { return {rd.range_axis_m.front(), rd.params.range_bin_m(), "m"}; }

GridAxis doppler_axis(const RDDatacube& rd) {
  const double step = rd.n_doppler_bins() > 1 ? rd.doppler_axis_mps[1] - rd.doppler_axis_mps[0] : 0.0;
  return {rd.doppler_axis_mps.front(), step, "m/s"};
}

std::string encode(const ComplexGrid& g, GridAxis r, GridAxis c) {
  return encode_grid(make_grid_file(g, std::move(r), std::move(c)));
}
std::string encode(const RealGrid& g, GridAxis r, GridAxis c) {
  return encode_grid(make_grid_file(g, std::move(r), std::move(c)));
}

/// Both maps scaled by the largest magnitude found in either.
std::pair<ComplexGrid, ComplexGrid> joint_normalize(const ComplexGrid& a, const ComplexGrid& b) {
  double peak = 0.0;
  for (const cplx& v : a.values()) peak = std::max(peak, std::abs(v));
  for (const cplx& v : b.values()) peak = std::max(peak, std::abs(v));
  ComplexGrid na = a, nb = b;
  if (peak > 0.0) {
    for (cplx& v : na.values()) v /= peak;
    for (cplx& v : nb.values()) v /= peak;
  }
  return {std::move(na), std::move(nb)};
}

std::string detections_csv(const std::vector<std::pair<std::size_t, Detection>>& dets) {
  std::string s = "run,range_bin,doppler_bin,range_m,radial_velocity_mps,peak_power_db,threshold_db\n";
  for (const auto& [run, d] : dets) {
    s += std::to_string(run) + "," + std::to_string(d.range_bin) + "," + std::to_string(d.doppler_bin) + "," +
         fmt(d.range_m, 3) + "," + fmt(d.radial_velocity_mps, 4) + "," + fmt(d.peak_power_db, 3) + "," +
         fmt(d.threshold_db, 3) + "\n";
  }
  return s;
}

std::string spectrum_csv(const MusicSpectrum& spec) {
  double peak = 0.0;
  for (double v : spec.pseudo_spectrum) peak = std::max(peak, v);
  std::string s = "azimuth_deg,pseudo_spectrum_db\n";
  for (std::size_t i = 0; i < spec.az_grid_deg.size(); ++i) {
    s += fmt(spec.az_grid_deg[i], 3) + "," + fmt(to_db(spec.pseudo_spectrum[i] / peak), 4) + "\n";
  }
  return s;
}

double rms(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s / static_cast<double>(v.size()));
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

// ---------------------------------------------------------------- config API

Mode parse_mode(std::string_view name) {
  if (name == "t1" || name == "T1") return Mode::t1;
  if (name == "t2" || name == "T2") return Mode::t2;
  if (name == "t3" || name == "T3") return Mode::t3;
  if (name == "t4" || name == "T4") return Mode::t4;
  throw ConfigError("unknown mode '" + std::string(name) + "' (expected t1, t2, t3 or t4)");
}

std::string_view mode_name(Mode m) {
  switch (m) {
    case Mode::t1: return "t1";
    case Mode::t2: return "t2";
    case Mode::t3: return "t3";
    case Mode::t4: return "t4";
  }
  return "t1";
}

ExperimentConfig default_config(Mode mode) {
  ExperimentConfig c;
  c.mode = mode;
  c.radar_heading_deg = 252.0;
  switch (mode) {
    case Mode::t1:
      c.targets = {{{9300.0, 6.0, 5.0, 25.0}, {"vessel-1", 120.0, 20.0, 300.0}}};
      c.steering_deg = {-15.0, -7.5, 0.0, 7.5, 15.0};
      c.processing.n_sources = 1;
      break;
    case Mode::t2:
      c.jammer.active = true;
      c.adaptive = true;
      c.targets = {{{9300.0, 6.0, 0.0, 20.0}, {}}};
      c.steering_deg = {-20.0, -10.0, 0.0, 10.0, 20.0};
      c.processing.n_sources = 1;
      break;
    case Mode::t3:
      c.jammer.active = true;
      c.adaptive = true;
      c.targets = {{{9300.0, 6.0, 0.0, 15.0}, {}}};
      c.steering_deg = {0.0};
      c.processing.n_sources = 2;
      break;
    case Mode::t4:
      c.radar.n_pulses = 125;
      c.isar.body.scatterers = {{-6.0, -5.0, 1.0}, {0.0, 2.0, 0.8}, {9.0, 8.0, 0.6}};
      c.isar.body.phase_error = {50.0};
      c.isar.n_dwells = 32;
      break;
  }
  return c;
}

void validate_config(const ExperimentConfig& c) {
  c.radar.validate();
  std::vector<std::string> errs;
  auto need = [&](bool ok, const std::string& msg) {
    if (!ok) errs.push_back(msg);
  };
  const bool jammer_mode = c.mode == Mode::t2 || c.mode == Mode::t3;
  need(!jammer_mode || c.jammer.active,
       "jammer.active: mode " + std::string(mode_name(c.mode)) + " requires an active jammer");
  need(jammer_mode || !c.jammer.active,
       "jammer.active: mode " + std::string(mode_name(c.mode)) + " requires the jammer to be off");
  need(!c.jammer.active || c.jammer.jnr_db > 0.0, "jammer.jnr_db: must be positive for an active jammer");
  need(std::abs(c.jammer.azimuth_deg) < 90.0, "jammer.azimuth_deg: must lie in (-90, 90)");
  need(c.noise_power > 0.0, "noise_power: must be positive");
  for (std::size_t i = 0; i < c.steering_deg.size(); ++i) {
    need(std::abs(c.steering_deg[i]) <= 22.5, "steering_deg[" + std::to_string(i) + "]: outside +-22.5 deg");
  }
  if (c.mode != Mode::t4) need(!c.steering_deg.empty(), "steering_deg: at least one angle required");
  if (c.mode == Mode::t1 || c.mode == Mode::t3) need(!c.targets.empty(), "targets: at least one target required");
  for (std::size_t i = 0; i < c.targets.size(); ++i) {
    const PointTarget& t = c.targets[i].target;
    const std::string p = "targets[" + std::to_string(i) + "]";
    need(t.range_m >= c.radar.r_min && t.range_m <= c.radar.r_max, p + ".range_m: outside [r_min, r_max]");
    need(std::abs(t.azimuth_deg) <= 22.5, p + ".azimuth_deg: outside +-22.5 deg");
    const VesselInfo& v = c.targets[i].vessel;
    need(v.length_m == 0.0 || (v.beam_m > 0.0 && v.length_m >= v.beam_m),
         p + ".vessel: length_m must be >= beam_m > 0 when given");
  }
  const ProcessingConfig& p = c.processing;
  need(p.oversampling >= 1, "processing.oversampling: must be >= 1");
  need(p.cfar.pfa > 0.0 && p.cfar.pfa < 1.0, "processing.cfar.pfa: must lie in (0, 1)");
  need(p.cfar.n_train >= 1, "processing.cfar.n_train: must be >= 1");
  need(p.n_sources >= 1 && p.n_sources <= 5, "processing.n_sources: must lie in [1, 5]");
  need(p.doa_grid_step_deg > 0.0, "processing.doa_grid_step_deg: must be positive");
  need(p.doa_grid_limit_deg > 0.0 && p.doa_grid_limit_deg < 90.0, "processing.doa_grid_limit_deg: must lie in (0, 90)");
  need(p.beamscan_step_deg > 0.0, "processing.beamscan_step_deg: must be positive");
  need(p.monte_carlo_runs >= 1, "processing.monte_carlo_runs: must be >= 1");
  need(p.association_range_m > 0.0, "processing.association_range_m: must be positive");
  if (c.mode == Mode::t4) {
    const IsarConfig& is = c.isar;
    need(is.body.scatterers.size() >= 2, "isar.body.scatterers: at least two scatterers required");
    need(is.body.rotation_rate != 0.0, "isar.body.rotation_rate: must be non-zero for imaging");
    need(is.body.center_range_m >= c.radar.r_min && is.body.center_range_m <= c.radar.r_max,
         "isar.body.center_range_m: outside [r_min, r_max]");
    need(is.n_dwells >= 1, "isar.n_dwells: must be >= 1");
    need(is.n_dwells * c.radar.n_pulses >= 64, "isar: fewer than 64 slow-time samples");
    need(is.half_width >= 1, "isar.half_width: must be >= 1");
    need(is.autofocus.order >= 2 && is.autofocus.order <= 4, "isar.autofocus.order: must lie in [2, 4]");
    need(is.autofocus.grid_points >= 3, "isar.autofocus.grid_points: must be >= 3");
    need(!is.omega || *is.omega > 0.0, "isar.omega: must be positive");
    need(is.omega_scale > 0.0, "isar.omega_scale: must be positive");
  }
  if (!errs.empty()) throw ConfigError("invalid config: " + join(errs, "; "));
}

ExperimentConfig parse_config(const std::string& text, std::optional<Mode> mode_override) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: malformed document: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");

  std::optional<Mode> mode = mode_override;
  if (!mode) {
    auto it = doc.find("mode");
    if (it == doc.end()) throw ConfigError("config: missing required key 'mode'");
    if (!it->is_string()) throw ConfigError("mode: expected a string");
    mode = parse_mode(it->get<std::string>());
  }
  ExperimentConfig c = default_config(*mode);

  std::vector<std::string> unknown, errors;
  {
    Section top(&doc, "", unknown, errors);
    std::string ignored;
    top.text("mode", ignored);
    if (!mode_override && !ignored.empty()) {
      try {
        parse_mode(ignored);
      } catch (const ConfigError& e) {
        errors.push_back(std::string("mode: ") + e.what());
      }
    }
    top.seed("seed", c.seed);
    top.flag("adaptive", c.adaptive);
    top.numbers("steering_deg", c.steering_deg);
    top.number("noise_power", c.noise_power);
    top.number("radar_heading_deg", c.radar_heading_deg);
    top.text("ground_truth", c.ground_truth);
    if (const json* v = top.object("radar")) {
      Section s(v, "radar", unknown, errors);
      read_radar(s, c.radar);
    }
    if (const json* v = top.array("targets")) {
      c.targets.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        const std::string path = "targets[" + std::to_string(i) + "]";
        if (!(*v)[i].is_object()) {
          errors.push_back(path + ": expected an object");
          continue;
        }
        TargetConfig t;
        Section s(&(*v)[i], path, unknown, errors);
        read_target(s, t);
        c.targets.push_back(t);
      }
    }
    if (const json* v = top.object("jammer")) {
      Section s(v, "jammer", unknown, errors);
      s.number("azimuth_deg", c.jammer.azimuth_deg);
      s.number("jnr_db", c.jammer.jnr_db);
      s.flag("active", c.jammer.active);
    }
    if (const json* v = top.object("clutter")) {
      Section s(v, "clutter", unknown, errors);
      s.flag("enabled", c.clutter.enabled);
      s.count("n_range_bins", c.clutter.n_range_bins);
      s.number("cnr_db", c.clutter.cnr_db);
    }
    if (const json* v = top.object("processing")) {
      Section s(v, "processing", unknown, errors);
      read_processing(s, c.processing);
    }
    if (const json* v = top.object("isar")) {
      Section s(v, "isar", unknown, errors);
      read_isar(s, c.isar);
    }
  }
  if (!unknown.empty()) errors.push_back("unknown keys: " + join(unknown, ", "));
  if (!errors.empty()) throw ConfigError("config: " + join(errors, "; "));
  validate_config(c);
  return c;
}

ExperimentConfig load_config(const std::string& path, std::optional<Mode> mode_override) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  ExperimentConfig c = parse_config(ss.str(), mode_override);
  if (!c.ground_truth.empty()) {
    const std::filesystem::path gt(c.ground_truth);
    if (gt.is_relative()) c.ground_truth = (std::filesystem::path(path).parent_path() / gt).lexically_normal().string();
  }
  return c;
}

std::string serialize_config(const ExperimentConfig& cfg) { return to_json(cfg).dump(2) + "\n"; }

std::string config_hash(const ExperimentConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, fnv1a(serialize_config(cfg)));
  return buf;
}

// ---------------------------------------------------------------- building blocks

RdCell expected_cell(const RDDatacube& rd, const PointTarget& target) {
  const long long abs_bin = std::llround(target.range_m / rd.params.range_bin_m());
  const long long row = std::clamp<long long>(abs_bin - static_cast<long long>(rd.first_range_bin), 0,
                                              static_cast<long long>(rd.n_range_bins()) - 1);
  const double fd = 2.0 * target.radial_velocity_mps / rd.params.wavelength;
  const long long k = std::llround(fd / rd.params.prf * static_cast<double>(rd.n_doppler_bins()));
  return {static_cast<std::size_t>(row), rd.doppler_column(k)};
}

std::vector<Detection> merge_detections(std::vector<Detection> dets, std::size_t radius) {
  std::stable_sort(dets.begin(), dets.end(),
                   [](const Detection& a, const Detection& b) { return a.peak_power_db > b.peak_power_db; });
  std::vector<Detection> kept;
  for (const Detection& d : dets) {
    const bool close = std::any_of(kept.begin(), kept.end(),
                                   [&](const Detection& k) { return near_cell(d, {k.range_bin, k.column}, radius); });
    if (!close) kept.push_back(d);
  }
  return kept;
}

std::optional<CellMask> clutter_mask(const RDDatacube& rd, const ClutterBand& clutter) {
  if (!clutter.enabled) return std::nullopt;
  CellMask m(rd.n_range_bins(), rd.n_doppler_bins(), 0);
  const std::size_t rows = std::min(clutter.n_range_bins, rd.n_range_bins());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < rd.n_doppler_bins(); ++c) m(r, c) = 1;
  }
  return m;
}

RDDatacube process_dwell(const ExperimentConfig& cfg, const ArrayGeometry& geometry, std::uint64_t dwell_seed,
                         RawDatacube* raw_out) {
  std::vector<PointTarget> pts;
  for (const TargetConfig& t : cfg.targets) pts.push_back(t.target);
  SimulationOptions opt;
  opt.clutter = cfg.clutter;
  opt.peak_window = window_coefficients(cfg.processing.window, cfg.radar.n_pulses);
  RawDatacube raw = simulate_dwell(cfg.radar, geometry, pts, cfg.jammer, cfg.noise_power, dwell_seed, opt);
  RDDatacube rd = doppler_process(range_compress(raw), cfg.processing.window, cfg.processing.oversampling);
  if (raw_out) *raw_out = std::move(raw);
  return rd;
}

DoaEstimate estimate_doa(const RDDatacube& rd, const ArrayGeometry& geometry, const Detection& det,
                         const ProcessingConfig& proc, std::size_t n_sources, const CellMask* clutter) {
  DoaEstimate est;
  est.detection = det;
  const TrainingSubset subset = select_training_subset(rd, det, proc.doa, clutter);
  est.snapshot_count = subset.count;
  const CovarianceEstimate cov = estimate_covariance(subset.snapshots, std::nullopt);
  const std::vector<double> grid = make_grid(-proc.doa_grid_limit_deg, proc.doa_grid_limit_deg, proc.doa_grid_step_deg);
  est.spectrum = music_spectrum(cov, geometry, grid, n_sources);
  est.azimuth_deg = pick_peaks(est.spectrum, n_sources).azimuth_deg;
  return est;
}

T1Trial run_t1_trial(const ExperimentConfig& cfg, const ArrayGeometry& geometry,
                     const std::vector<GroundTruthTrack>& truth, std::uint64_t dwell_seed) {
  const RDDatacube rd = process_dwell(cfg, geometry, dwell_seed);
  const std::optional<CellMask> clutter = clutter_mask(rd, cfg.clutter);
  const ProcessingConfig& proc = cfg.processing;

  std::vector<Detection> all;
  for (double steer : cfg.steering_deg) {
    for (const Detection& d : detect_on(apply_beamformer(rd, conventional_weights(geometry, steer)), rd, proc)) {
      if (!clutter || !(*clutter)(d.range_bin, d.column)) all.push_back(d);
    }
  }
  T1Trial trial;
  trial.detections = merge_detections(std::move(all), proc.merge_radius);
  for (const Detection& d : trial.detections) {
    trial.estimates.push_back(estimate_doa(rd, geometry, d, proc, proc.n_sources, clutter ? &*clutter : nullptr));
  }

  for (const GroundTruthTrack& track : truth) {
    T1TargetResult res;
    res.name = track.name;
    res.truth_range_m = track.range_m;
    res.truth_azimuth_deg = track.azimuth_deg;
    const DoaEstimate* best = nullptr;
    for (const DoaEstimate& e : trial.estimates) {
      if (e.azimuth_deg.empty() || std::abs(e.detection.range_m - track.range_m) > proc.association_range_m) continue;
      if (!best || e.detection.peak_power_db > best->detection.peak_power_db) best = &e;
    }
    if (best) {
      res.detected = true;
      res.range_m = best->detection.range_m;
      res.estimate_deg = best->azimuth_deg.front();
      res.error_deg = angular_error(res.estimate_deg, track);
      if (track.length_m > 0.0) {
        res.span = target_angular_span(track, cfg.radar_heading_deg + track.azimuth_deg, res.error_deg);
      }
    }
    trial.targets.push_back(res);
  }
  return trial;
}

T2Dwell run_t2_dwell(const ExperimentConfig& cfg, const ArrayGeometry& geometry, std::uint64_t dwell_seed) {
  T2Dwell out;
  out.rd = process_dwell(cfg, geometry, dwell_seed);
  const RDDatacube& rd = out.rd;
  const std::optional<CellMask> clutter = clutter_mask(rd, cfg.clutter);
  const ProcessingConfig& proc = cfg.processing;

  const CovarianceEstimate* scan_cov = nullptr;
  double scan_steer = std::numeric_limits<double>::infinity();
  for (double steer : cfg.steering_deg) {
    T2Steer s;
    s.steer_deg = steer;
    s.conventional = apply_beamformer(rd, conventional_weights(geometry, steer));
    const std::vector<Detection> conv_dets = detect_on(s.conventional, rd, proc);
    AdaptiveBeam beam = adaptive_beam(rd, geometry, steer, conv_dets, clutter, proc);
    s.adaptive = std::move(beam.map);
    s.mvdr = beam.weights;
    s.covariance = beam.covariance;
    s.excluded = exclusion_mask(rd.n_range_bins(), rd.n_doppler_bins(), beam.guards, clutter ? &*clutter : nullptr);
    s.rejection_db = rejection_db(s.conventional, s.adaptive, &s.excluded);
    out.steers.push_back(std::move(s));
  }
  for (const T2Steer& s : out.steers) {
    if (std::abs(s.steer_deg) < std::abs(scan_steer)) {
      scan_steer = s.steer_deg;
      scan_cov = &s.covariance;
    }
  }
  const std::vector<double> grid = make_grid(-22.5, 22.5, proc.beamscan_step_deg);
  out.conventional_scan = beamscan(rd, geometry, grid, BeamMode::conventional);
  if (scan_cov) out.adaptive_scan = beamscan(rd, geometry, grid, BeamMode::mvdr, scan_cov);
  return out;
}

T3Trial run_t3_trial(const ExperimentConfig& cfg, const ArrayGeometry& geometry, std::uint64_t dwell_seed) {
  const RDDatacube rd = process_dwell(cfg, geometry, dwell_seed);
  const std::optional<CellMask> clutter = clutter_mask(rd, cfg.clutter);
  const ProcessingConfig& proc = cfg.processing;

  T3Trial trial;
  std::vector<Detection> conv_all, ad_all;
  for (double steer : cfg.steering_deg) {
    const std::vector<Detection> conv =
        detect_on(apply_beamformer(rd, conventional_weights(geometry, steer)), rd, proc);
    conv_all.insert(conv_all.end(), conv.begin(), conv.end());
    if (cfg.adaptive) {
      const AdaptiveBeam beam = adaptive_beam(rd, geometry, steer, conv, clutter, proc);
      ad_all.insert(ad_all.end(), beam.detections.begin(), beam.detections.end());
    }
  }
  trial.conventional_detections = merge_detections(std::move(conv_all), proc.merge_radius);
  trial.adaptive_detections = merge_detections(std::move(ad_all), proc.merge_radius);

  for (const TargetConfig& tc : cfg.targets) {
    T3Target t;
    t.cell = expected_cell(rd, tc.target);
    const Detection* conv_hit = nullptr;
    const Detection* ad_hit = nullptr;
    for (const Detection& d : trial.conventional_detections) {
      if (!conv_hit && near_cell(d, t.cell, proc.merge_radius)) conv_hit = &d;
    }
    for (const Detection& d : trial.adaptive_detections) {
      if (!ad_hit && near_cell(d, t.cell, proc.merge_radius)) ad_hit = &d;
    }
    t.conventional_detected = conv_hit != nullptr;
    t.adaptive_detected = ad_hit != nullptr;
    const Detection* cue = cfg.adaptive ? ad_hit : conv_hit;
    t.target_error_deg = t.jammer_error_deg = std::numeric_limits<double>::infinity();
    if (cue) {
      // MUSIC runs on the unfiltered cube.
      DoaEstimate est = estimate_doa(rd, geometry, *cue, proc, proc.n_sources, clutter ? &*clutter : nullptr);
      const auto& az = est.azimuth_deg;
      if (az.size() >= 2) {
        const bool first_is_jammer = angular_error(az[0], cfg.jammer.azimuth_deg) <=
                                     angular_error(az[1], cfg.jammer.azimuth_deg);
        t.jammer_error_deg = angular_error(first_is_jammer ? az[0] : az[1], cfg.jammer.azimuth_deg);
        t.target_error_deg = angular_error(first_is_jammer ? az[1] : az[0], tc.target.azimuth_deg);
      } else if (az.size() == 1) {
        t.target_error_deg = angular_error(az[0], tc.target.azimuth_deg);
      }
      t.doa = std::move(est);
    }
    trial.targets.push_back(std::move(t));
  }
  return trial;
}

T4Result run_t4(const ExperimentConfig& cfg, const ArrayGeometry& geometry) {
  const IsarConfig& is = cfg.isar;
  IsarSequence seq =
      simulate_isar_sequence(cfg.radar, geometry, is.body, is.n_dwells, cfg.noise_power, cfg.seed, true);
  std::vector<CompressedCube> compressed;
  compressed.reserve(seq.dwells.size());
  for (const RawDatacube& raw : seq.dwells) compressed.push_back(range_compress(raw));

  T4Result out;
  out.diagnostics = std::move(seq.diagnostics);
  const long long abs_bin = std::llround(is.body.center_range_m / cfg.radar.range_bin_m());
  out.centre_bin = static_cast<std::size_t>(abs_bin - static_cast<long long>(cfg.radar.first_range_bin()));
  const RangeProfileHistory history = extract_target_history(
      compressed, conventional_weights(geometry, is.body.azimuth_deg).values, out.centre_bin, is.half_width);
  out.alignment = range_align(history);
  if (out.alignment.ambiguous) out.diagnostics.push_back("range alignment: ambiguous correlation peak");
  out.autofocus = icba_autofocus(out.alignment.aligned, is.autofocus);
  if (!out.autofocus.focus_gain) out.diagnostics.push_back("autofocus: no focus gain");
  out.unfocused = form_image(out.alignment.aligned, is.image_window);
  const double omega = is.omega.value_or(std::abs(is.body.rotation_rate)) * is.omega_scale;
  out.image = cross_range_scale(form_image(out.autofocus.focused, is.image_window), omega);
  out.scatterers = find_scattering_centres(out.image);
  return out;
}

// ---------------------------------------------------------------- experiments

const Artifact* ExperimentReport::find(std::string_view name) const {
  for (const Artifact& a : artifacts) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, const RunOptions& options) {
  validate_config(cfg);
  const ArrayGeometry geometry = ArrayGeometry::demonstrator(cfg.radar.wavelength);
  ExperimentReport rep;
  rep.mode = cfg.mode;
  rep.seed = cfg.seed;
  rep.config_hash = config_hash(cfg);
  std::vector<Artifact> files;
  auto metric = [&](const std::string& key, const std::string& value) { rep.metrics.push_back(key + " = " + value); };

  if (options.dump_geometry) {
    std::string s = "x_m,y_m,subarray_id\n";
    const auto pos = geometry.element_positions();
    const auto map = geometry.subarray_map();
    for (std::size_t i = 0; i < pos.size(); ++i) {
      s += fmt(pos[i].x, 6) + "," + fmt(pos[i].y, 6) + "," + std::to_string(map[i]) + "\n";
    }
    files.push_back({"geometry.csv", s});
  }
  auto emit_raw = [&](const RawDatacube& raw) {
    const RadarParams& p = raw.params;
    for (std::size_t c = 0; c < raw.values.planes(); ++c) {
      ComplexGrid g(raw.values.rows(), raw.values.cols());
      for (std::size_t m = 0; m < g.rows(); ++m) {
        const auto row = raw.values.row(c, m);
        std::copy(row.begin(), row.end(), g.row(m).begin());
      }
      files.push_back({"raw_ch" + std::to_string(c) + ".aesg",
                       encode(g, {raw.slow_time_start, 1.0 / p.prf, "s"},
                              {static_cast<double>(p.first_range_bin()) / p.sample_rate, 1.0 / p.sample_rate, "s"})});
    }
  };

  const std::size_t runs = cfg.processing.monte_carlo_runs;
  switch (cfg.mode) {
    case Mode::t1: {
      const std::vector<GroundTruthTrack> truth = truth_tracks(cfg);
      std::vector<std::pair<std::size_t, Detection>> dets;
      std::string doa = "run,name,truth_range_m,truth_azimuth_deg,detected,range_m,estimate_deg,error_deg,"
                        "projected_m,span_deg,within\n";
      std::vector<std::vector<double>> errors(truth.size());
      std::size_t detected = 0;
      for (std::size_t run = 0; run < runs; ++run) {
        const std::uint64_t s = derive_seed(cfg.seed, run);
        if (run == 0 && options.emit_raw) {
          RawDatacube raw;
          process_dwell(cfg, geometry, s, &raw);
          emit_raw(raw);
        }
        const T1Trial trial = run_t1_trial(cfg, geometry, truth, s);
        for (const Detection& d : trial.detections) dets.push_back({run, d});
        if (run == 0 && !trial.estimates.empty()) {
          files.push_back({"music_spectrum.csv", spectrum_csv(trial.estimates.front().spectrum)});
        }
        for (std::size_t i = 0; i < trial.targets.size(); ++i) {
          const T1TargetResult& r = trial.targets[i];
          doa += std::to_string(run) + "," + r.name + "," + fmt(r.truth_range_m, 2) + "," +
                 fmt(r.truth_azimuth_deg, 3) + "," + (r.detected ? "1" : "0") + ",";
          if (r.detected) {
            ++detected;
            errors[i].push_back(r.error_deg);
            doa += fmt(r.range_m, 2) + "," + fmt(r.estimate_deg, 4) + "," + fmt(r.error_deg, 4) + ",";
            if (r.span) {
              doa += fmt(r.span->projected_size_m, 2) + "," + fmt(r.span->span_deg, 4) + "," +
                     (*r.span->within ? "yes" : "no");
            } else {
              doa += ",,";
            }
          } else {
            doa += ",,,,,";
          }
          doa += "\n";
        }
      }
      files.push_back({"detections.csv", detections_csv(dets)});
      files.push_back({"doa.csv", doa});
      metric("t1.runs", std::to_string(runs));
      metric("t1.detection_rate",
             fmt(truth.empty() ? 0.0 : static_cast<double>(detected) / static_cast<double>(runs * truth.size()), 4));
      std::vector<double> all_err;
      for (std::size_t i = 0; i < truth.size(); ++i) {
        metric("t1." + truth[i].name + ".rms_error_deg", fmt(rms(errors[i]), 4));
        metric("t1." + truth[i].name + ".mean_error_deg", fmt(mean(errors[i]), 4));
        all_err.insert(all_err.end(), errors[i].begin(), errors[i].end());
      }
      metric("t1.rms_error_deg", fmt(rms(all_err), 4));
      metric("t1.mean_error_deg", fmt(mean(all_err), 4));
      break;
    }
    case Mode::t2: {
      std::string rej = "run,steer_deg,rejection_db\n";
      std::string guards = "run,steer_deg,range_bin,doppler_bin\n";
      std::vector<std::vector<double>> per_steer(cfg.steering_deg.size());
      for (std::size_t run = 0; run < runs; ++run) {
        const std::uint64_t s = derive_seed(cfg.seed, run);
        if (run == 0 && options.emit_raw) {
          RawDatacube raw;
          process_dwell(cfg, geometry, s, &raw);
          emit_raw(raw);
        }
        T2Dwell dwell = run_t2_dwell(cfg, geometry, s);
        for (std::size_t i = 0; i < dwell.steers.size(); ++i) {
          const T2Steer& st = dwell.steers[i];
          per_steer[i].push_back(st.rejection_db);
          rej += std::to_string(run) + "," + fmt(st.steer_deg, 2) + "," + fmt(st.rejection_db, 4) + "\n";
          if (run != 0) continue;
          for (std::size_t r = 0; r < st.excluded.rows(); ++r) {
            for (std::size_t c = 0; c < st.excluded.cols(); ++c) {
              if (st.excluded(r, c)) {
                guards += "0," + fmt(st.steer_deg, 2) + "," + std::to_string(r) + "," +
                          std::to_string(dwell.rd.doppler_bin(c)) + "\n";
              }
            }
          }
          const auto [conv, mvdr] = joint_normalize(st.conventional, st.adaptive);
          files.push_back({"rd_conventional_steer" + steer_tag(st.steer_deg) + ".aesg",
                           encode(conv, range_axis(dwell.rd), doppler_axis(dwell.rd))});
          files.push_back({"rd_mvdr_steer" + steer_tag(st.steer_deg) + ".aesg",
                           encode(mvdr, range_axis(dwell.rd), doppler_axis(dwell.rd))});
        }
        if (run == 0) {
          const BeamscanCurve& cs = dwell.conventional_scan;
          const BeamscanCurve& as = dwell.adaptive_scan;
          const double ref = *std::max_element(cs.energy.begin(), cs.energy.end());
          std::string scan = "azimuth_deg,conventional_db,mvdr_db\n";
          for (std::size_t k = 0; k < cs.az_grid_deg.size(); ++k) {
            scan += fmt(cs.az_grid_deg[k], 2) + "," + fmt(to_db(cs.energy[k] / ref), 4) + "," +
                    (as.energy.empty() ? std::string() : fmt(to_db(as.energy[k] / ref), 4)) + "\n";
          }
          files.push_back({"beamscan.csv", scan});
        }
      }
      files.push_back({"rejection.csv", rej});
      files.push_back({"guard_cells.csv", guards});
      double sum = 0.0;
      std::size_t above = 0;
      for (std::size_t i = 0; i < per_steer.size(); ++i) {
        const double m = mean(per_steer[i]);
        sum += m;
        if (m >= 28.0) ++above;
        metric("t2.rejection_db[" + steer_tag(cfg.steering_deg[i]) + "]", fmt(m, 3));
      }
      metric("t2.average_rejection_db", fmt(sum / static_cast<double>(per_steer.size()), 3));
      metric("t2.angles_at_or_above_28db", std::to_string(above) + "/" + std::to_string(per_steer.size()));
      break;
    }
    case Mode::t3: {
      std::vector<std::pair<std::size_t, Detection>> conv_dets, ad_dets;
      std::string doa = "run,target,conventional_detected,mvdr_detected,peak1_deg,peak2_deg,target_error_deg,"
                        "jammer_error_deg\n";
      std::size_t n_conv = 0, n_ad = 0, n_music = 0, n_total = 0;
      for (std::size_t run = 0; run < runs; ++run) {
        const std::uint64_t s = derive_seed(cfg.seed, run);
        if (run == 0 && options.emit_raw) {
          RawDatacube raw;
          process_dwell(cfg, geometry, s, &raw);
          emit_raw(raw);
        }
        const T3Trial trial = run_t3_trial(cfg, geometry, s);
        for (const Detection& d : trial.conventional_detections) conv_dets.push_back({run, d});
        for (const Detection& d : trial.adaptive_detections) ad_dets.push_back({run, d});
        for (std::size_t i = 0; i < trial.targets.size(); ++i) {
          const T3Target& t = trial.targets[i];
          ++n_total;
          n_conv += t.conventional_detected;
          n_ad += t.adaptive_detected;
          const bool ok = t.target_error_deg <= 0.5 && t.jammer_error_deg <= 0.5;
          n_music += ok;
          std::string p1, p2;
          if (t.doa && !t.doa->azimuth_deg.empty()) p1 = fmt(t.doa->azimuth_deg[0], 4);
          if (t.doa && t.doa->azimuth_deg.size() > 1) p2 = fmt(t.doa->azimuth_deg[1], 4);
          doa += std::to_string(run) + "," + std::to_string(i) + "," + (t.conventional_detected ? "1" : "0") + "," +
                 (t.adaptive_detected ? "1" : "0") + "," + p1 + "," + p2 + "," + fmt(t.target_error_deg, 4) + "," +
                 fmt(t.jammer_error_deg, 4) + "\n";
          if (run == 0 && i == 0 && t.doa) files.push_back({"music_spectrum.csv", spectrum_csv(t.doa->spectrum)});
        }
      }
      files.push_back({"detections_conventional.csv", detections_csv(conv_dets)});
      files.push_back({"detections_mvdr.csv", detections_csv(ad_dets)});
      files.push_back({"doa.csv", doa});
      metric("t3.runs", std::to_string(runs));
      metric("t3.conventional_detections", std::to_string(n_conv) + "/" + std::to_string(n_total));
      metric("t3.mvdr_detections", std::to_string(n_ad) + "/" + std::to_string(n_total));
      metric("t3.music_within_0.5deg", std::to_string(n_music) + "/" + std::to_string(n_total));
      break;
    }
    case Mode::t4: {
      if (options.emit_raw) {
        IsarSequence first = simulate_isar_sequence(cfg.radar, geometry, cfg.isar.body, 1, cfg.noise_power,
                                                    cfg.seed, true);
        emit_raw(first.dwells.front());
      }
      const T4Result r = run_t4(cfg, geometry);
      const IsarImage& img = r.image;
      const GridAxis rows{img.range_axis_m.front(), cfg.radar.range_bin_m(), "m"};
      const double dop_step = img.doppler_axis_hz.size() > 1 ? img.doppler_axis_hz[1] - img.doppler_axis_hz[0] : 0.0;
      const double xr_step = img.cross_range_axis_m.size() > 1 ? img.cross_range_axis_m[1] - img.cross_range_axis_m[0] : 0.0;
      files.push_back({"isar_image.aesg", encode(img.magnitude, rows, {img.cross_range_axis_m.front(), xr_step, "m"})});
      files.push_back({"isar_image_unfocused.aesg",
                       encode(r.unfocused.magnitude, rows, {r.unfocused.doppler_axis_hz.front(), dop_step, "Hz"})});
      std::string sc = "range_m,cross_range_m,doppler_hz,rel_db\n";
      for (const ScatteringCentre& c : r.scatterers) {
        sc += fmt(c.range_m, 3) + "," + fmt(c.cross_range_m.value_or(0.0), 3) + "," + fmt(c.doppler_hz, 4) + "," +
              fmt(c.rel_db, 3) + "\n";
      }
      files.push_back({"isar_scatterers.csv", sc});
      std::string shifts = "profile,measured_bins,smoothed_bins\n";
      for (std::size_t m = 0; m < r.alignment.measured_shifts.size(); ++m) {
        shifts += std::to_string(m) + "," + fmt(r.alignment.measured_shifts[m], 4) + "," +
                  fmt(r.alignment.smoothed_shifts[m], 4) + "\n";
      }
      files.push_back({"isar_shifts.csv", shifts});
      const auto& coeffs = r.autofocus.polynomial.coefficients;
      for (std::size_t p = 0; p < coeffs.size(); ++p) metric("t4.c" + std::to_string(p + 2), fmt(coeffs[p], 4));
      metric("t4.focus_gain", r.autofocus.focus_gain ? "yes" : "no");
      metric("t4.contrast_before", fmt(r.autofocus.contrast_before, 6));
      metric("t4.contrast_after", fmt(r.autofocus.contrast_after, 6));
      metric("t4.omega_used", fmt(img.omega_used.value_or(0.0), 6));
      metric("t4.scatterers", std::to_string(r.scatterers.size()));
      for (const std::string& d : r.diagnostics) metric("t4.diagnostic", d);
      break;
    }
  }

  std::string summary = "aesa-chain report\n";
  summary += "version = " + rep.version + "\n";
  summary += "mode = " + std::string(mode_name(rep.mode)) + "\n";
  summary += "seed = " + std::to_string(rep.seed) + "\n";
  summary += "config_hash = " + rep.config_hash + "\n";
  summary += "simd = " + std::string(kernels::active().name) + "\n";
  for (const std::string& m : rep.metrics) summary += m + "\n";
  summary += "artifacts =";
  for (const Artifact& a : files) summary += " " + a.name;
  summary += " config.json\n";

  rep.artifacts.push_back({"summary.txt", summary});
  for (Artifact& a : files) rep.artifacts.push_back(std::move(a));
  rep.artifacts.push_back({"config.json", serialize_config(cfg)});
  return rep;
}

void write_report(const ExperimentReport& report, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
  for (const Artifact& a : report.artifacts) {
    const std::string path = (std::filesystem::path(dir) / a.name).string();
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + path + "'");
    f.write(a.bytes.data(), static_cast<std::streamsize>(a.bytes.size()));
  }
}

}  // namespace aesa
