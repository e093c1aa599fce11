#include "aesa/scene_sim.hpp"

#include <cmath>
#include <sstream>

#include "aesa/rng.hpp"

namespace aesa {

void RadarParams::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("radar parameters: " + what); };
  if (!(wavelength > 0.0)) fail("wavelength must be positive");
  if (!(bandwidth > 0.0)) fail("bandwidth must be positive");
  if (!(pulse_width > 0.0)) fail("pulse_width must be positive");
  if (!(prf > 0.0)) fail("prf must be positive");
  if (!(sample_rate >= bandwidth)) fail("sample_rate must be >= bandwidth");
  if (n_pulses < 2) fail("n_pulses must be >= 2");
  if (!(r_min > 0.0) || !(r_min < r_max)) fail("need 0 < r_min < r_max");
  if (kSpeedOfLight / (2.0 * prf) < r_max) fail("r_max exceeds the unambiguous range c/(2 prf)");
}

std::size_t RadarParams::first_range_bin() const {
  return static_cast<std::size_t>(std::llround(2.0 * r_min / kSpeedOfLight * sample_rate));
}

std::size_t RadarParams::n_range_bins() const {
  const auto last = static_cast<std::size_t>(std::llround(2.0 * r_max / kSpeedOfLight * sample_rate));
  return last - first_range_bin() + 1;
}

std::size_t RadarParams::pulse_samples() const {
  return static_cast<std::size_t>(std::ceil(pulse_width * sample_rate - 1e-9));
}

namespace {

cplx chirp_sample(const RadarParams& p, double u) {
  const double centred = u - 0.5 * p.pulse_width;
  return std::polar(1.0, kPi * p.chirp_rate() * centred * centred);
}

// Adds gain * s(t - delay) to one pulse's fast-time samples.
void add_echo(const RadarParams& p, double delay_s, cplx gain, std::span<cplx> pulse) {
  const double fs = p.sample_rate;
  const double n0 = static_cast<double>(p.first_range_bin());
  const double k_lo = std::ceil(delay_s * fs - n0 - 1e-9);
  const double k_hi = (delay_s + p.pulse_width) * fs - n0;
  const auto begin = static_cast<long long>(std::max(0.0, k_lo));
  for (long long k = begin; k < static_cast<long long>(pulse.size()); ++k) {
    const double kd = static_cast<double>(k);
    if (!(kd < k_hi - 1e-9)) break;
    const double u = (n0 + kd) / fs - delay_s;
    pulse[static_cast<std::size_t>(k)] += gain * chirp_sample(p, u);
  }
}

void check_noise_power(double noise_power) {
  if (!(noise_power > 0.0)) throw DomainError("simulation: noise power must be positive");
}

}  // namespace

std::vector<cplx> lfm_replica(const RadarParams& params) {
  std::vector<cplx> h(params.pulse_samples());
  for (std::size_t n = 0; n < h.size(); ++n) {
    h[n] = chirp_sample(params, static_cast<double>(n) / params.sample_rate);
  }
  return h;
}

Eigen::VectorXcd channel_signature(const ArrayGeometry& geometry, double az_deg) {
  Eigen::VectorXcd v = subarray_steering(geometry, az_deg).values;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double m = std::abs(v(i));
    v(i) = m > 1e-12 ? v(i) / m : cplx{1.0, 0.0};
  }
  return v;
}

double echo_amplitude(const RadarParams& params, double snr_db, double noise_power) {
  const double gain = static_cast<double>(params.pulse_samples()) * static_cast<double>(params.n_pulses);
  return std::sqrt(from_db(snr_db) * noise_power / gain);
}

double processed_peak_gain(const RadarParams& params, double range_m, double radial_velocity_mps,
                           std::span<const double> doppler_window) {
  if (doppler_window.size() != params.n_pulses) throw ContractError("processed_peak_gain: window length != n_pulses");
  std::vector<cplx> pulse(params.n_fast());
  add_echo(params, 2.0 * range_m / kSpeedOfLight, cplx{1.0, 0.0}, pulse);
  const std::vector<cplx> h = lfm_replica(params);
  const double h_norm = std::sqrt(static_cast<double>(h.size()));  // unit-modulus samples
  const long long centre = std::llround(2.0 * range_m / kSpeedOfLight * params.sample_rate) -
                           static_cast<long long>(params.first_range_bin());
  double range_peak = 0.0;
  for (long long k = centre - 3; k <= centre + 3; ++k) {
    if (k < 0) continue;
    cplx acc{};
    for (std::size_t n = 0; n < h.size(); ++n) {
      const auto idx = static_cast<std::size_t>(k) + n;
      if (idx < pulse.size()) acc += pulse[idx] * std::conj(h[n]);
    }
    range_peak = std::max(range_peak, std::abs(acc) / h_norm);
  }

  const double n = static_cast<double>(params.n_pulses);
  const double bins = 2.0 * radial_velocity_mps / params.wavelength / params.prf * n;
  double doppler_peak = 0.0;
  for (long long k = std::llround(bins) - 2; k <= std::llround(bins) + 2; ++k) {
    cplx acc{};
    for (std::size_t m = 0; m < params.n_pulses; ++m) {
      const double md = static_cast<double>(m);
      acc += doppler_window[m] * std::polar(1.0, 2.0 * kPi * md * (bins - static_cast<double>(k)) / n);
    }
    doppler_peak = std::max(doppler_peak, std::abs(acc) / std::sqrt(n));
  }
  return range_peak * doppler_peak;
}

RawDatacube simulate_dwell(const RadarParams& params, const ArrayGeometry& geometry,
                           const std::vector<PointTarget>& targets, const JammerSource& jammer,
                           double noise_power, std::uint64_t seed, const SimulationOptions& options) {
  params.validate();
  check_noise_power(noise_power);
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i].range_m < params.r_min || targets[i].range_m > params.r_max) {
      std::ostringstream msg;
      msg << "simulate_dwell: target " << i << " at " << targets[i].range_m << " m lies outside the range window ["
          << params.r_min << ", " << params.r_max << "] m";
      throw ContractError(msg.str());
    }
  }
  if (jammer.active && !(jammer.jnr_db > 0.0)) throw ConfigError("simulate_dwell: active jammer needs jnr_db > 0");

  const std::size_t n_ch = geometry.n_subarrays();
  const std::size_t n_pulses = params.n_pulses;
  const std::size_t n_fast = params.n_fast();
  RawDatacube raw{ComplexCube(n_ch, n_pulses, n_fast), params, seed, 0.0};

  std::vector<cplx> echo(n_fast);
  for (const PointTarget& t : targets) {
    const Eigen::VectorXcd sig = channel_signature(geometry, t.azimuth_deg);
    const double amp = options.peak_window
                           ? std::sqrt(from_db(t.snr_db) * noise_power) /
                                 processed_peak_gain(params, t.range_m, t.radial_velocity_mps, *options.peak_window)
                           : echo_amplitude(params, t.snr_db, noise_power);
    const double delay = 2.0 * t.range_m / kSpeedOfLight;
    const double fd = 2.0 * t.radial_velocity_mps / params.wavelength;
    std::fill(echo.begin(), echo.end(), cplx{});
    add_echo(params, delay, std::polar(amp, -4.0 * kPi * t.range_m / params.wavelength), echo);
    for (std::size_t m = 0; m < n_pulses; ++m) {
      const cplx doppler = std::polar(1.0, 2.0 * kPi * fd * static_cast<double>(m) / params.prf);
      for (std::size_t c = 0; c < n_ch; ++c) {
        const cplx g = doppler * sig(static_cast<Eigen::Index>(c));
        auto pulse = raw.values.row(c, m);
        for (std::size_t k = 0; k < n_fast; ++k) pulse[k] += g * echo[k];
      }
    }
  }

  ComplexGaussian rng(seed);
  if (options.include_noise) {
    for (cplx& x : raw.values.values()) x += rng(noise_power);
  }

  if (jammer.active) {
    const Eigen::VectorXcd sig = channel_signature(geometry, jammer.azimuth_deg);
    const double jam_power = from_db(jammer.jnr_db) * noise_power;
    for (std::size_t m = 0; m < n_pulses; ++m) {
      for (std::size_t k = 0; k < n_fast; ++k) {
        const cplx z = rng(jam_power);
        for (std::size_t c = 0; c < n_ch; ++c) raw.values(c, m, k) += sig(static_cast<Eigen::Index>(c)) * z;
      }
    }
  }

  if (options.clutter.enabled) {
    const double mean_amp2 =
        std::pow(echo_amplitude(params, options.clutter.cnr_db, noise_power), 2.0);
    const std::size_t n_bins = std::min(options.clutter.n_range_bins, params.n_range_bins());
    const double n0 = static_cast<double>(params.first_range_bin());
    for (std::size_t b = 0; b < n_bins; ++b) {
      const double delay = (n0 + static_cast<double>(b)) / params.sample_rate;
      for (std::size_t c = 0; c < n_ch; ++c) {
        std::fill(echo.begin(), echo.end(), cplx{});
        add_echo(params, delay, rng(mean_amp2), echo);
        for (std::size_t m = 0; m < n_pulses; ++m) {
          auto pulse = raw.values.row(c, m);
          for (std::size_t k = 0; k < n_fast; ++k) pulse[k] += echo[k];
        }
      }
    }
  }
  return raw;
}

IsarSequence simulate_isar_sequence(const RadarParams& params, const ArrayGeometry& geometry,
                                    const RigidBodyTarget& body, std::size_t n_dwells, double noise_power,
                                    std::uint64_t seed, bool include_noise) {
  params.validate();
  check_noise_power(noise_power);
  if (body.scatterers.size() < 2) throw ConfigError("simulate_isar_sequence: need at least two scatterers");
  if (n_dwells == 0) throw ConfigError("simulate_isar_sequence: need at least one dwell");

  IsarSequence seq;
  const std::size_t n_total = n_dwells * params.n_pulses;
  const double t_centre = 0.5 * static_cast<double>(n_total - 1) / params.prf;
  const double rotation = std::abs(body.rotation_rate) * static_cast<double>(n_total) / params.prf;
  if (rotation >= 0.2) {
    std::ostringstream msg;
    msg << "total rotation " << rotation << " rad exceeds the 0.2 rad small-angle limit";
    seq.diagnostics.push_back(msg.str());
  }

  const std::size_t n_ch = geometry.n_subarrays();
  const std::size_t n_fast = params.n_fast();
  const Eigen::VectorXcd sig = channel_signature(geometry, body.azimuth_deg);
  const double amp = echo_amplitude(params, body.snr_db, noise_power);
  const double k4pi = 4.0 * kPi / params.wavelength;
  std::vector<cplx> echo(n_fast);

  for (std::size_t d = 0; d < n_dwells; ++d) {
    const std::uint64_t dwell_seed = derive_seed(seed, d + 1);
    RawDatacube raw{ComplexCube(n_ch, params.n_pulses, n_fast), params, dwell_seed,
                    static_cast<double>(d * params.n_pulses) / params.prf};
    for (std::size_t m = 0; m < params.n_pulses; ++m) {
      const double t = static_cast<double>(d * params.n_pulses + m) / params.prf - t_centre;
      double extra_phase = 0.0;
      double tp = t * t;
      for (double c : body.phase_error) {
        extra_phase += c * tp;
        tp *= t;
      }
      const double ca = std::cos(body.rotation_rate * t);
      const double sa = std::sin(body.rotation_rate * t);
      std::fill(echo.begin(), echo.end(), cplx{});
      for (const Scatterer& s : body.scatterers) {
        const double r = body.center_range_m - body.translational_velocity * t + s.down_range_m * ca -
                         s.cross_range_m * sa;
        add_echo(params, 2.0 * r / kSpeedOfLight, std::polar(amp * s.amplitude, extra_phase - k4pi * r), echo);
      }
      for (std::size_t c = 0; c < n_ch; ++c) {
        const cplx g = sig(static_cast<Eigen::Index>(c));
        auto pulse = raw.values.row(c, m);
        for (std::size_t k = 0; k < n_fast; ++k) pulse[k] += g * echo[k];
      }
    }
    if (include_noise) {
      ComplexGaussian rng(dwell_seed);
      for (cplx& x : raw.values.values()) x += rng(noise_power);
    }
    seq.dwells.push_back(std::move(raw));
  }
  return seq;
}

}  // namespace aesa
