#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "aesa/common.hpp"
#include "aesa/rd_processing.hpp"

namespace aesa {

/// Slow-time stack of compressed range profiles around one target.
/// Rows are pulses (all dwells concatenated), columns are range bins.
struct RangeProfileHistory {
  ComplexGrid data;
  double prf = 0.0;
  double wavelength = 0.0;
  double range_bin_m = 0.0;
  std::vector<double> range_axis_m;

  std::size_t n_profiles() const { return data.rows(); }
  std::size_t n_bins() const { return data.cols(); }
  /// Slow time of profile m measured from the centre of the stack.
  double slow_time(std::size_t m) const {
    return (static_cast<double>(m) - 0.5 * static_cast<double>(n_profiles() - 1)) / prf;
  }
};

/// Beamforms every dwell with `weights` and keeps range bins
/// [centre_bin - half_width, centre_bin + half_width]. Throws EstimationError
/// naming the dwell when a dwell's strongest range bin falls outside the window.
RangeProfileHistory extract_target_history(std::span<const CompressedCube> dwells, const Eigen::VectorXcd& weights,
                                           std::size_t centre_bin, std::size_t half_width);

struct AlignmentOptions {
  std::size_t poly_order = 2;  // order of the smoothing fit to the shift profile
};

struct AlignmentResult {
  RangeProfileHistory aligned;
  std::vector<double> measured_shifts;  // bins, relative to profile 0
  std::vector<double> smoothed_shifts;
  bool ambiguous = false;               // some correlation peak had an equal-valued rival
};

/// Envelope cross-correlation against a running power-summed reference,
/// parabolic sub-bin refinement, polynomial smoothing of the shift profile and
/// Fourier-domain fractional shifting of each profile.
AlignmentResult range_align(const RangeProfileHistory& history, const AlignmentOptions& options = {});

/// stdev / mean of intensity (magnitude squared). 0 for a constant grid.
double image_contrast(const RealGrid& magnitude);

/// Slow-time phase correction exp(-j (c2 t^2 + ... + cP t^P)).
struct PhasePolynomial {
  std::vector<double> coefficients;  // c2 .. cP

  std::size_t order() const { return coefficients.size() + 1; }
  double phase(double t) const;
};

struct AutofocusConfig {
  std::size_t order = 3;
  std::size_t grid_points = 21;
  double max_edge_phase_rad = 100.0;  // coarse grid for c_p spans +- this / (T/2)^p
  double tolerance = 1e-3;            // simplex stop: relative contrast spread
  std::size_t max_iterations = 500;
  Window window = Window::rectangular;

  bool operator==(const AutofocusConfig&) const = default;
};

struct AutofocusResult {
  PhasePolynomial polynomial;
  RangeProfileHistory focused;
  double contrast_before = 0.0;
  double contrast_after = 0.0;
  bool focus_gain = true;  // false when nothing beat the uncorrected image
  std::size_t evaluations = 0;
};

/// Multiplies every profile by exp(-j phase(t)).
RangeProfileHistory apply_phase_correction(const RangeProfileHistory& history, const PhasePolynomial& poly);

/// Contrast-maximizing polynomial phase autofocus: per-coefficient coarse grid
/// then Nelder-Mead refinement. Never returns a lower contrast than the input.
AutofocusResult icba_autofocus(const RangeProfileHistory& history, const AutofocusConfig& config = {});

struct IsarImage {
  RealGrid magnitude;                    // range bin x Doppler column (zero Doppler at cols/2)
  std::vector<double> range_axis_m;
  std::vector<double> doppler_axis_hz;
  std::vector<double> cross_range_axis_m;  // empty until cross_range_scale()
  double contrast = 0.0;
  std::optional<double> omega_used;
  double wavelength = 0.0;
};

/// Windowed DFT over slow time per range bin.
IsarImage form_image(const RangeProfileHistory& history, Window window = Window::hann);

/// Converts the Doppler axis to cross-range: x = lambda f / (2 omega).
IsarImage cross_range_scale(const IsarImage& image, double omega);

struct ScatteringCentre {
  std::size_t row = 0;
  std::size_t column = 0;
  double range_m = 0.0;
  double doppler_hz = 0.0;
  std::optional<double> cross_range_m;
  double rel_db = 0.0;
};

/// 2-D local maxima (8-neighbourhood) within floor_db of the image peak,
/// strongest first, at most max_peaks.
std::vector<ScatteringCentre> find_scattering_centres(const IsarImage& image, std::size_t max_peaks = 10,
                                                      double floor_db = -20.0);

}  // namespace aesa
