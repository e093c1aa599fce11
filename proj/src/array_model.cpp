#include "aesa/array_model.hpp"

#include <algorithm>
#include <cmath>

namespace aesa {

ArrayGeometry::ArrayGeometry(double wavelength, std::size_t n_az, std::size_t n_el, std::size_t sub_az,
                             std::size_t sub_el)
    : wavelength_(wavelength),
      pitch_(wavelength / 2.0),
      n_az_(n_az),
      n_el_(n_el),
      sub_az_(sub_az),
      sub_el_(sub_el),
      n_subarrays_(0) {
  if (!(wavelength > 0.0)) throw DomainError("ArrayGeometry: wavelength must be positive");
  if (n_az == 0 || n_el == 0 || sub_az == 0 || sub_el == 0 || n_az % sub_az != 0 || n_el % sub_el != 0) {
    throw ContractError("ArrayGeometry: subarray shape must tile the element grid");
  }
  const std::size_t sub_per_az = n_az / sub_az;
  n_subarrays_ = sub_per_az * (n_el / sub_el);
  positions_.reserve(n_az * n_el);
  subarray_of_.reserve(n_az * n_el);
  const double x0 = 0.5 * static_cast<double>(n_az - 1);
  const double y0 = 0.5 * static_cast<double>(n_el - 1);
  for (std::size_t e = 0; e < n_el; ++e) {
    for (std::size_t a = 0; a < n_az; ++a) {
      positions_.push_back({(static_cast<double>(a) - x0) * pitch_, (static_cast<double>(e) - y0) * pitch_});
      subarray_of_.push_back((e / sub_el) * sub_per_az + a / sub_az);
    }
  }
}

std::vector<ElementPosition> ArrayGeometry::subarray_centres() const {
  std::vector<ElementPosition> centres(n_subarrays_, {0.0, 0.0});
  std::vector<std::size_t> counts(n_subarrays_, 0);
  for (std::size_t k = 0; k < positions_.size(); ++k) {
    centres[subarray_of_[k]].x += positions_[k].x;
    centres[subarray_of_[k]].y += positions_[k].y;
    ++counts[subarray_of_[k]];
  }
  for (std::size_t s = 0; s < n_subarrays_; ++s) {
    centres[s].x /= static_cast<double>(counts[s]);
    centres[s].y /= static_cast<double>(counts[s]);
  }
  return centres;
}

namespace {

void check_angles(double az_deg, double el_deg) {
  if (!(std::abs(az_deg) < 90.0) || !(std::abs(el_deg) < 90.0)) {
    throw DomainError("steering: angles must satisfy |az| < 90 and |el| < 90 (got az=" +
                      std::to_string(az_deg) + ", el=" + std::to_string(el_deg) + ")");
  }
}

}  // namespace

SteeringVector element_steering(const ArrayGeometry& geometry, double az_deg, double el_deg) {
  check_angles(az_deg, el_deg);
  const double k = 2.0 * kPi / geometry.wavelength();
  const double az = deg_to_rad(az_deg);
  const double el = deg_to_rad(el_deg);
  const double ux = std::sin(az) * std::cos(el);
  const double uy = std::sin(el);
  const auto positions = geometry.element_positions();
  Eigen::VectorXcd v(static_cast<Eigen::Index>(positions.size()));
  for (std::size_t i = 0; i < positions.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = std::polar(1.0, k * (positions[i].x * ux + positions[i].y * uy));
  }
  return {SteeringLevel::element, az_deg, el_deg, std::move(v)};
}

SteeringVector subarray_steering(const ArrayGeometry& geometry, double az_deg, double el_deg) {
  const SteeringVector elem = element_steering(geometry, az_deg, el_deg);
  const auto map = geometry.subarray_map();
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(geometry.n_subarrays()));
  for (std::size_t i = 0; i < map.size(); ++i) v(static_cast<Eigen::Index>(map[i])) += elem.values(static_cast<Eigen::Index>(i));
  v /= static_cast<double>(geometry.subarray_size());
  return {SteeringLevel::subarray, az_deg, el_deg, std::move(v)};
}

std::vector<double> beampattern_linear(const ArrayGeometry& geometry, const Eigen::VectorXcd& weights,
                                       std::span<const double> az_grid_deg) {
  const auto n = static_cast<std::size_t>(weights.size());
  const bool subarray_level = n == geometry.n_subarrays();
  if (!subarray_level && n != geometry.n_elements()) {
    throw ContractError("beampattern: weight length " + std::to_string(n) + " matches neither level");
  }
  if (az_grid_deg.empty()) throw ContractError("beampattern: empty azimuth grid");
  std::vector<double> p;
  p.reserve(az_grid_deg.size());
  for (double az : az_grid_deg) {
    const SteeringVector v = subarray_level ? subarray_steering(geometry, az) : element_steering(geometry, az);
    p.push_back(std::norm(weights.dot(v.values)));  // Eigen dot() conjugates the left operand
  }
  return p;
}

std::vector<double> beampattern(const ArrayGeometry& geometry, const Eigen::VectorXcd& weights,
                                std::span<const double> az_grid_deg) {
  std::vector<double> p = beampattern_linear(geometry, weights, az_grid_deg);
  const double peak = *std::max_element(p.begin(), p.end());
  if (!(peak > 0.0)) throw NumericalError("beampattern: response is identically zero");
  for (double& x : p) x = to_db(x / peak);
  return p;
}

std::vector<double> make_grid(double start, double stop, double step) {
  if (!(step > 0.0) || stop < start) throw ContractError("make_grid: need step > 0 and stop >= start");
  const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = start + static_cast<double>(i) * step;
  return g;
}

}  // namespace aesa
