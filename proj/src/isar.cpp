#include "aesa/isar.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "aesa/beamforming.hpp"
#include "aesa/fft.hpp"
#include "aesa/kernels.hpp"

namespace aesa {

RangeProfileHistory extract_target_history(std::span<const CompressedCube> dwells, const Eigen::VectorXcd& weights,
                                           std::size_t centre_bin, std::size_t half_width) {
  if (dwells.empty()) throw ContractError("extract_target_history: no dwells");
  const CompressedCube& first = dwells.front();
  const std::size_t n_range = first.n_range_bins();
  if (centre_bin < half_width || centre_bin + half_width >= n_range) {
    throw ContractError("extract_target_history: window exceeds the range extent of the dwells");
  }
  const std::size_t lo = centre_bin - half_width;
  const std::size_t width = 2 * half_width + 1;
  std::size_t total = 0;
  for (const auto& d : dwells) {
    if (d.n_range_bins() != n_range || d.params.prf != first.params.prf) {
      throw ContractError("extract_target_history: dwells have inconsistent shapes");
    }
    total += d.n_pulses();
  }

  RangeProfileHistory h;
  h.data = ComplexGrid(total, width);
  h.prf = first.params.prf;
  h.wavelength = first.params.wavelength;
  h.range_bin_m = first.params.range_bin_m();
  const std::size_t first_bin = first.params.first_range_bin();
  for (std::size_t b = 0; b < width; ++b) {
    h.range_axis_m.push_back(static_cast<double>(first_bin + lo + b) * h.range_bin_m);
  }

  std::size_t row = 0;
  std::vector<double> profile_power(n_range);
  for (std::size_t d = 0; d < dwells.size(); ++d) {
    const ComplexGrid beam = beamform(dwells[d].values, weights);
    std::fill(profile_power.begin(), profile_power.end(), 0.0);
    for (std::size_t m = 0; m < beam.rows(); ++m) {
      for (std::size_t r = 0; r < n_range; ++r) profile_power[r] += std::norm(beam(m, r));
      std::copy_n(beam.row(m).begin() + static_cast<std::ptrdiff_t>(lo), width, h.data.row(row).begin());
      ++row;
    }
    const auto peak = static_cast<std::size_t>(
        std::distance(profile_power.begin(), std::max_element(profile_power.begin(), profile_power.end())));
    if (peak < lo || peak >= lo + width) {
      std::ostringstream msg;
      msg << "extract_target_history: target leaves the range window at dwell " << d << " (peak bin " << peak << ")";
      throw EstimationError(msg.str());
    }
  }
  return h;
}

namespace {

// Least-squares polynomial fit of y over x = index, evaluated back on the index.
std::vector<double> polyfit_smooth(const std::vector<double>& y, std::size_t order) {
  const std::size_t n = y.size();
  const std::size_t terms = std::min(order + 1, n);
  const double centre = 0.5 * static_cast<double>(n - 1);
  const double scale = n > 1 ? centre : 1.0;
  Eigen::MatrixXd a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(terms));
  Eigen::VectorXd b(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const double x = (static_cast<double>(i) - centre) / (scale > 0.0 ? scale : 1.0);
    double p = 1.0;
    for (std::size_t j = 0; j < terms; ++j) {
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = p;
      p *= x;
    }
    b(static_cast<Eigen::Index>(i)) = y[i];
  }
  const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(b);
  const Eigen::VectorXd fit = a * coef;
  return {fit.data(), fit.data() + fit.size()};
}

}  // namespace

AlignmentResult range_align(const RangeProfileHistory& history, const AlignmentOptions& options) {
  const std::size_t n_prof = history.n_profiles();
  const std::size_t width = history.n_bins();
  if (n_prof < 2) throw ContractError("range_align: need at least two profiles");
  const std::size_t n_fft = fft::next_pow2(2 * width);

  AlignmentResult result;
  result.measured_shifts.assign(n_prof, 0.0);

  std::vector<double> reference(width);
  for (std::size_t r = 0; r < width; ++r) reference[r] = std::norm(history.data(0, r));

  std::vector<cplx> ref_spec(n_fft);
  std::vector<cplx> buf(n_fft);
  std::vector<cplx> spec(n_fft);
  std::vector<cplx> corr(n_fft);
  const auto w = static_cast<long long>(width);
  for (std::size_t k = 1; k < n_prof; ++k) {
    std::fill(buf.begin(), buf.end(), cplx{});
    for (std::size_t r = 0; r < width; ++r) buf[r] = reference[r];
    fft::forward(buf, ref_spec);
    std::fill(buf.begin(), buf.end(), cplx{});
    for (std::size_t r = 0; r < width; ++r) buf[r] = std::norm(history.data(k, r));
    fft::forward(buf, spec);
    // c[lag] = sum_r ref[r] e_k[r + lag]
    kernels::mul_conj(spec, ref_spec, spec);
    fft::inverse(spec, corr);
    auto at = [&](long long lag) { return corr[static_cast<std::size_t>((lag + static_cast<long long>(n_fft)) % static_cast<long long>(n_fft))].real(); };

    long long best = 0;
    double best_val = at(0);
    for (long long lag = -(w - 1); lag <= w - 1; ++lag) {
      const double v = at(lag);
      const double tol = 1e-12 * std::max(std::abs(v), std::abs(best_val));
      if (v > best_val + tol) {
        best = lag;
        best_val = v;
      } else if (std::abs(v - best_val) <= tol && lag != best) {
        if (std::abs(lag) < std::abs(best)) best = lag;
        if (best_val > 0.0) result.ambiguous = true;
      }
    }
    double shift = static_cast<double>(best);
    if (best > -(w - 1) && best < w - 1) {
      const double ym = at(best - 1);
      const double y0 = at(best);
      const double yp = at(best + 1);
      const double curvature = ym - 2.0 * y0 + yp;
      if (curvature < 0.0) shift += std::clamp(0.5 * (ym - yp) / curvature, -0.5, 0.5);
    }
    result.measured_shifts[k] = shift;

    const long long s = std::llround(shift);
    for (long long r = 0; r < w; ++r) {
      const long long src = r + s;
      if (src >= 0 && src < w) reference[static_cast<std::size_t>(r)] += std::norm(history.data(k, static_cast<std::size_t>(src)));
    }
  }

  result.smoothed_shifts = polyfit_smooth(result.measured_shifts, options.poly_order);
  const double offset = result.smoothed_shifts.front();
  for (double& s : result.smoothed_shifts) s -= offset;

  result.aligned = history;
  std::vector<cplx> out(n_fft);
  for (std::size_t k = 0; k < n_prof; ++k) {
    const double s = result.smoothed_shifts[k];
    if (s == 0.0) continue;
    std::fill(buf.begin(), buf.end(), cplx{});
    for (std::size_t r = 0; r < width; ++r) buf[r] = history.data(k, r);
    fft::forward(buf, spec);
    for (std::size_t f = 0; f < n_fft; ++f) {
      const double freq = static_cast<double>(f < n_fft / 2 ? static_cast<long long>(f)
                                                             : static_cast<long long>(f) - static_cast<long long>(n_fft));
      spec[f] *= std::polar(1.0, 2.0 * kPi * freq * s / static_cast<double>(n_fft));
    }
    fft::inverse(spec, out);
    std::copy_n(out.begin(), width, result.aligned.data.row(k).begin());
  }
  return result;
}

double image_contrast(const RealGrid& magnitude) {
  if (magnitude.size() == 0) throw ContractError("image_contrast: empty grid");
  double sum = 0.0;
  for (double m : magnitude.values()) sum += m * m;
  if (!(sum > 0.0)) throw DomainError("image_contrast: image is identically zero");
  const double mean = sum / static_cast<double>(magnitude.size());
  double var = 0.0;
  for (double m : magnitude.values()) {
    const double d = m * m - mean;
    var += d * d;
  }
  var /= static_cast<double>(magnitude.size());
  return std::sqrt(var) / mean;
}

double PhasePolynomial::phase(double t) const {
  double acc = 0.0;
  double tp = t * t;
  for (double c : coefficients) {
    acc += c * tp;
    tp *= t;
  }
  return acc;
}

RangeProfileHistory apply_phase_correction(const RangeProfileHistory& history, const PhasePolynomial& poly) {
  RangeProfileHistory out = history;
  for (std::size_t m = 0; m < history.n_profiles(); ++m) {
    const cplx rot = std::polar(1.0, -poly.phase(history.slow_time(m)));
    for (cplx& x : out.data.row(m)) x *= rot;
  }
  return out;
}

namespace {

RealGrid image_magnitude(const RangeProfileHistory& history, std::span<const double> window) {
  const std::size_t n = history.n_profiles();
  const std::size_t width = history.n_bins();
  RealGrid mag(width, n);
  std::vector<cplx> in(n);
  std::vector<cplx> out(n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t r = 0; r < width; ++r) {
    for (std::size_t m = 0; m < n; ++m) in[m] = history.data(m, r) * (window[m] * scale);
    fft::forward(in, out);
    fft::fftshift(std::span<cplx>(out));
    for (std::size_t j = 0; j < n; ++j) mag(r, j) = std::abs(out[j]);
  }
  return mag;
}

struct Simplex {
  std::vector<std::vector<double>> points;
  std::vector<double> values;  // minimized
};

// Nelder-Mead minimization with standard coefficients.
std::pair<std::vector<double>, double> nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                                   std::vector<double> start, double start_value,
                                                   const std::vector<double>& steps, double tolerance,
                                                   std::size_t max_iterations) {
  const std::size_t dim = start.size();
  Simplex s;
  s.points.push_back(start);
  s.values.push_back(start_value);
  for (std::size_t i = 0; i < dim; ++i) {
    std::vector<double> p = start;
    p[i] += steps[i];
    s.values.push_back(f(p));
    s.points.push_back(std::move(p));
  }
  std::vector<std::size_t> order(dim + 1);
  for (std::size_t it = 0; it < max_iterations; ++it) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s.values[a] < s.values[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[dim - 1 < order.size() ? dim - 1 : 0];
    if (std::abs(s.values[worst] - s.values[best]) <= tolerance * std::abs(s.values[best])) break;

    std::vector<double> centroid(dim, 0.0);
    for (std::size_t i : order) {
      if (i == worst) continue;
      for (std::size_t d = 0; d < dim; ++d) centroid[d] += s.points[i][d] / static_cast<double>(dim);
    }
    auto along = [&](double t) {
      std::vector<double> p(dim);
      for (std::size_t d = 0; d < dim; ++d) p[d] = centroid[d] + t * (s.points[worst][d] - centroid[d]);
      return p;
    };
    std::vector<double> xr = along(-1.0);
    const double fr = f(xr);
    if (fr < s.values[best]) {
      std::vector<double> xe = along(-2.0);
      const double fe = f(xe);
      if (fe < fr) {
        s.points[worst] = std::move(xe);
        s.values[worst] = fe;
      } else {
        s.points[worst] = std::move(xr);
        s.values[worst] = fr;
      }
      continue;
    }
    if (fr < s.values[second]) {
      s.points[worst] = std::move(xr);
      s.values[worst] = fr;
      continue;
    }
    const bool outside = fr < s.values[worst];
    std::vector<double> xc = along(outside ? -0.5 : 0.5);
    const double fc = f(xc);
    if (fc < (outside ? fr : s.values[worst])) {
      s.points[worst] = std::move(xc);
      s.values[worst] = fc;
      continue;
    }
    for (std::size_t i : order) {
      if (i == best) continue;
      for (std::size_t d = 0; d < dim; ++d) s.points[i][d] = s.points[best][d] + 0.5 * (s.points[i][d] - s.points[best][d]);
      s.values[i] = f(s.points[i]);
    }
  }
  const auto it = std::min_element(s.values.begin(), s.values.end());
  const auto idx = static_cast<std::size_t>(std::distance(s.values.begin(), it));
  return {s.points[idx], *it};
}

}  // namespace

AutofocusResult icba_autofocus(const RangeProfileHistory& history, const AutofocusConfig& config) {
  if (config.order < 2 || config.order > 4) throw ConfigError("autofocus: polynomial order must lie in [2, 4]");
  if (config.grid_points < 3) throw ConfigError("autofocus: grid_points must be >= 3");
  const std::size_t n = history.n_profiles();
  if (n < 2) throw ContractError("autofocus: need at least two profiles");
  const std::vector<double> window = window_coefficients(config.window, n);

  const std::size_t n_coef = config.order - 1;
  std::vector<double> t(n);
  for (std::size_t m = 0; m < n; ++m) t[m] = history.slow_time(m);

  AutofocusResult result;
  RangeProfileHistory work = history;
  auto contrast_of = [&](const std::vector<double>& coef) {
    ++result.evaluations;
    const PhasePolynomial poly{coef};
    for (std::size_t m = 0; m < n; ++m) {
      const cplx rot = std::polar(1.0, -poly.phase(t[m]));
      const auto src = history.data.row(m);
      auto dst = work.data.row(m);
      for (std::size_t r = 0; r < src.size(); ++r) dst[r] = src[r] * rot;
    }
    return image_contrast(image_magnitude(work, window));
  };

  std::vector<double> best(n_coef, 0.0);
  const double initial = contrast_of(best);
  double best_value = initial;
  result.contrast_before = initial;

  const double half_cpi = 0.5 * static_cast<double>(n) / history.prf;
  std::vector<double> steps(n_coef);
  for (std::size_t i = 0; i < n_coef; ++i) {
    const double span = config.max_edge_phase_rad / std::pow(half_cpi, static_cast<double>(i + 2));
    const double step = 2.0 * span / static_cast<double>(config.grid_points - 1);
    steps[i] = step;
    std::vector<double> trial = best;
    double local_best = best[i];
    for (std::size_t g = 0; g < config.grid_points; ++g) {
      trial[i] = -span + static_cast<double>(g) * step;
      if (trial[i] == best[i]) continue;
      const double c = contrast_of(trial);
      if (c > best_value) {
        best_value = c;
        local_best = trial[i];
      }
    }
    best[i] = local_best;
  }

  std::vector<double> simplex_steps(n_coef);
  for (std::size_t i = 0; i < n_coef; ++i) simplex_steps[i] = 0.5 * steps[i];
  const auto [refined, neg_value] = nelder_mead([&](const std::vector<double>& c) { return -contrast_of(c); }, best,
                                                -best_value, simplex_steps, config.tolerance, config.max_iterations);
  if (-neg_value > best_value) {
    best = refined;
    best_value = -neg_value;
  }

  if (!(best_value > initial)) {
    result.polynomial.coefficients.assign(n_coef, 0.0);
    result.focus_gain = false;
    result.contrast_after = initial;
    result.focused = history;
    return result;
  }
  result.polynomial.coefficients = best;
  result.contrast_after = best_value;
  result.focused = apply_phase_correction(history, result.polynomial);
  return result;
}

IsarImage form_image(const RangeProfileHistory& history, Window window) {
  const std::size_t n = history.n_profiles();
  if (n < 2 || history.n_bins() == 0) throw ContractError("form_image: empty history");
  IsarImage img;
  img.magnitude = image_magnitude(history, window_coefficients(window, n));
  img.range_axis_m = history.range_axis_m;
  img.doppler_axis_hz.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    img.doppler_axis_hz[j] = (static_cast<double>(j) - static_cast<double>(n / 2)) * history.prf / static_cast<double>(n);
  }
  img.contrast = image_contrast(img.magnitude);
  img.wavelength = history.wavelength;
  return img;
}

IsarImage cross_range_scale(const IsarImage& image, double omega) {
  if (!(omega > 0.0)) throw DomainError("cross_range_scale: omega must be positive");
  IsarImage out = image;
  out.cross_range_axis_m.resize(image.doppler_axis_hz.size());
  for (std::size_t j = 0; j < image.doppler_axis_hz.size(); ++j) {
    out.cross_range_axis_m[j] = image.wavelength * image.doppler_axis_hz[j] / (2.0 * omega);
  }
  out.omega_used = omega;
  return out;
}

std::vector<ScatteringCentre> find_scattering_centres(const IsarImage& image, std::size_t max_peaks, double floor_db) {
  const RealGrid& m = image.magnitude;
  double peak = 0.0;
  for (double v : m.values()) peak = std::max(peak, v);
  std::vector<ScatteringCentre> out;
  if (!(peak > 0.0)) return out;
  const double floor_mag = peak * std::pow(10.0, floor_db / 20.0);
  const auto rows = static_cast<long long>(m.rows());
  const auto cols = static_cast<long long>(m.cols());
  for (long long r = 0; r < rows; ++r) {
    for (long long c = 0; c < cols; ++c) {
      const double v = m(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
      if (v < floor_mag) continue;
      bool is_max = true;
      for (long long dr = -1; dr <= 1 && is_max; ++dr) {
        for (long long dc = -1; dc <= 1; ++dc) {
          if (dr == 0 && dc == 0) continue;
          const long long rr = r + dr;
          const long long cc = c + dc;
          if (rr < 0 || rr >= rows || cc < 0 || cc >= cols) continue;
          const double u = m(static_cast<std::size_t>(rr), static_cast<std::size_t>(cc));
          // strict against earlier neighbours, non-strict against later ones
          if (u > v || (u == v && (dr < 0 || (dr == 0 && dc < 0)))) {
            is_max = false;
            break;
          }
        }
      }
      if (!is_max) continue;
      ScatteringCentre s;
      s.row = static_cast<std::size_t>(r);
      s.column = static_cast<std::size_t>(c);
      s.range_m = image.range_axis_m.empty() ? 0.0 : image.range_axis_m[s.row];
      s.doppler_hz = image.doppler_axis_hz[s.column];
      if (!image.cross_range_axis_m.empty()) s.cross_range_m = image.cross_range_axis_m[s.column];
      s.rel_db = 20.0 * std::log10(v / peak);
      out.push_back(s);
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.rel_db > b.rel_db; });
  if (out.size() > max_peaks) out.resize(max_peaks);
  return out;
}

}  // namespace aesa
