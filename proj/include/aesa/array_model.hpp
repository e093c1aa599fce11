#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "aesa/common.hpp"

namespace aesa {

struct ElementPosition {
  double x;  // meters, azimuth axis
  double y;  // meters, elevation axis
};

/// Planar receive array partitioned into subarrays, one receive channel each.
///
/// The default demonstrator layout is a 12 x 4 (azimuth x elevation) grid at
/// half-wavelength pitch split into six 2 x 4 subarrays that tile the azimuth
/// axis, so subarray phase centres sit one wavelength apart.
class ArrayGeometry {
 public:
  /// Build an n_az x n_el grid centred on the origin. Subarrays are blocks of
  /// sub_az x sub_el elements, numbered along azimuth first.
  ArrayGeometry(double wavelength, std::size_t n_az = 12, std::size_t n_el = 4,
                std::size_t sub_az = 2, std::size_t sub_el = 4);

  static ArrayGeometry demonstrator(double wavelength = 0.03) { return ArrayGeometry(wavelength); }

  double wavelength() const { return wavelength_; }
  double element_pitch() const { return pitch_; }
  std::size_t n_az() const { return n_az_; }
  std::size_t n_el() const { return n_el_; }
  std::size_t n_elements() const { return positions_.size(); }
  std::size_t n_subarrays() const { return n_subarrays_; }
  std::size_t subarray_size() const { return sub_az_ * sub_el_; }

  std::span<const ElementPosition> element_positions() const { return positions_; }
  std::span<const std::size_t> subarray_map() const { return subarray_of_; }

  /// Mean element position of each subarray.
  std::vector<ElementPosition> subarray_centres() const;

 private:
  double wavelength_;
  double pitch_;
  std::size_t n_az_, n_el_, sub_az_, sub_el_, n_subarrays_;
  std::vector<ElementPosition> positions_;
  std::vector<std::size_t> subarray_of_;
};

enum class SteeringLevel { element, subarray };

struct SteeringVector {
  SteeringLevel level;
  double azimuth_deg;
  double elevation_deg;
  Eigen::VectorXcd values;
};

/// Plane-wave response of each element: exp(j k (x sin az cos el + y sin el)).
/// Throws DomainError unless |az| < 90 and |el| < 90.
SteeringVector element_steering(const ArrayGeometry& geometry, double az_deg, double el_deg = 0.0);

/// Element response averaged over each subarray (divided by the element count,
/// so broadside is all ones).
SteeringVector subarray_steering(const ArrayGeometry& geometry, double az_deg, double el_deg = 0.0);

/// Power response |w^H v(az)|^2 over an azimuth grid at el = 0, in dB relative
/// to the grid maximum. Weights of length n_subarrays use subarray steering,
/// length n_elements use element steering.
std::vector<double> beampattern(const ArrayGeometry& geometry, const Eigen::VectorXcd& weights,
                                std::span<const double> az_grid_deg);

/// Same as beampattern() but linear and unnormalized.
std::vector<double> beampattern_linear(const ArrayGeometry& geometry, const Eigen::VectorXcd& weights,
                                       std::span<const double> az_grid_deg);

/// Inclusive uniform grid [start, stop] with the given step.
std::vector<double> make_grid(double start, double stop, double step);

}  // namespace aesa
